//! Coefficient rings.
//!
//! Every algebraic object in the crate is generic over a `Ring`. The exact
//! rings (`GaussQ`, `RatFn`) prune only exact zeros; the float ring
//! (`Complex64`) prunes magnitudes below `FLOAT_PRUNE`.

use core::fmt::Debug;

use num_complex::Complex64;

use crate::rational::{GaussQ, Rational};

pub const FLOAT_PRUNE: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingKind {
    Exact,
    Float,
}

pub trait Ring: Clone + PartialEq + Debug + Send + Sync + 'static {
    const KIND: RingKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_gauss(q: &GaussQ) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// Whether the value is dropped from sparse maps.
    fn is_negligible(&self) -> bool;
    /// Size used for residual reporting.
    fn magnitude(&self) -> f64;

    fn is_zero(&self) -> bool {
        self.is_negligible()
    }
    fn from_int(n: i64) -> Self {
        Self::from_gauss(&GaussQ::from_int(n))
    }
    fn from_frac(p: i64, q: i64) -> Self {
        Self::from_gauss(&GaussQ::frac(p, q))
    }
    fn from_rational(r: &Rational) -> Self {
        Self::from_gauss(&GaussQ::real(r.clone()))
    }
    fn i() -> Self {
        Self::from_gauss(&GaussQ::i())
    }
    fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|x| self.mul(&x))
    }
    fn scale_int(&self, n: i64) -> Self {
        self.mul(&Self::from_int(n))
    }
}

impl Ring for GaussQ {
    const KIND: RingKind = RingKind::Exact;

    fn zero() -> Self {
        GaussQ::zero()
    }
    fn one() -> Self {
        GaussQ::one()
    }
    fn from_gauss(q: &GaussQ) -> Self {
        q.clone()
    }
    fn add(&self, o: &Self) -> Self {
        GaussQ::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        GaussQ::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        GaussQ::mul(self, o)
    }
    fn neg(&self) -> Self {
        GaussQ::neg(self)
    }
    fn conj(&self) -> Self {
        GaussQ::conj(self)
    }
    fn inv(&self) -> Option<Self> {
        GaussQ::inv(self)
    }
    fn is_negligible(&self) -> bool {
        GaussQ::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        self.abs_f64()
    }
}

impl Ring for Complex64 {
    const KIND: RingKind = RingKind::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_gauss(q: &GaussQ) -> Self {
        q.to_c64()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn inv(&self) -> Option<Self> {
        if self.re == 0.0 && self.im == 0.0 {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }
    fn is_negligible(&self) -> bool {
        self.norm() < FLOAT_PRUNE
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
