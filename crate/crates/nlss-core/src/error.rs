use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An operation needs a homogeneous operand and got a mixed one.
    NotHomogeneous,
    /// An operation defined for even matrices got something else.
    NotEven,
    /// A tensor operand has no parity assigned to one of its factors.
    ParityUndeclared,
    Pole(String),
    ZeroDenominator(String),
    LengthMismatch { expected: usize, got: usize },
    MismatchedModes,
    Budget(String),
    SupportMargin { needed: usize, got: usize },
    IllConditioned(f64),
    CoincidentSpectral,
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotHomogeneous => write!(f, "operand is not of homogeneous parity"),
            Error::NotEven => write!(f, "matrix is not even"),
            Error::ParityUndeclared => write!(f, "tensor factor has no declared parity"),
            Error::Pole(s) => write!(f, "pole: {s}"),
            Error::ZeroDenominator(s) => write!(f, "zero denominator at {s}"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::MismatchedModes => write!(f, "orders were built from different mode sets"),
            Error::Budget(s) => write!(f, "budget exceeded: {s}"),
            Error::SupportMargin { needed, got } => {
                write!(f, "support margin {got} below required {needed}")
            }
            Error::IllConditioned(c) => write!(f, "ill-conditioned fit (condition number {c:e})"),
            Error::CoincidentSpectral => write!(f, "spectral parameters coincide"),
            Error::InvalidConfig(s) => write!(f, "invalid configuration: {s}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
