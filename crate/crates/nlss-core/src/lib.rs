#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classical;
pub mod error;
pub mod fock;
pub mod grading;
pub mod grassmann;
pub mod lax;
pub mod matrix;
pub mod quantum_rtt;
pub mod ratfn;
pub mod rational;
pub mod report;
pub mod ring;
pub mod rmatrix;
pub mod rosales;
pub mod tensor;
pub mod yangian;
