//! Square matrices `U = Σ U_ij E_ij` over a graded auxiliary space, with
//! coefficients written to the left of the basis matrices. Moving a
//! coefficient past `E_ij` costs `(−1)^{([i]+[j])·[coef]}`, which fixes the
//! product rule `(UV)_il = Σ_j U_ij · twist(V_jl, [i]+[j])`.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::grading::Grading;
use crate::grassmann::SuperScalar;
use crate::ring::Ring;

#[derive(Clone, PartialEq)]
pub struct SuperMatrix<R: Ring> {
    grading: Grading,
    entries: Vec<SuperScalar<R>>,
}

impl<R: Ring> SuperMatrix<R> {
    pub fn zero(g: Grading) -> Self {
        SuperMatrix { grading: g, entries: (0..g.dim() * g.dim()).map(|_| SuperScalar::zero()).collect() }
    }

    pub fn identity(g: Grading) -> Self {
        let mut m = Self::zero(g);
        for i in 0..g.dim() {
            m.set(i, i, SuperScalar::one());
        }
        m
    }

    /// `c · E_ij`.
    pub fn unit(g: Grading, i: usize, j: usize, c: SuperScalar<R>) -> Self {
        let mut m = Self::zero(g);
        m.set(i, j, c);
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> SuperScalar<R>>(g: Grading, mut f: F) -> Self {
        let d = g.dim();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(f(i, j));
            }
        }
        SuperMatrix { grading: g, entries }
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn dim(&self) -> usize {
        self.grading.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> &SuperScalar<R> {
        &self.entries[i * self.dim() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: SuperScalar<R>) {
        let d = self.dim();
        self.entries[i * d + j] = v;
    }

    pub fn map<S: Ring, F: Fn(&SuperScalar<R>) -> SuperScalar<S>>(&self, f: F) -> SuperMatrix<S> {
        SuperMatrix { grading: self.grading, entries: self.entries.iter().map(f).collect() }
    }

    fn zip<F: Fn(&SuperScalar<R>, &SuperScalar<R>) -> SuperScalar<R>>(&self, o: &Self, f: F) -> Self {
        assert_eq!(self.grading, o.grading, "grading mismatch");
        SuperMatrix {
            grading: self.grading,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, r: &R) -> Self {
        self.map(|a| a.scale(r))
    }

    /// `s · U`.
    pub fn lmul_scalar(&self, s: &SuperScalar<R>) -> Self {
        self.map(|a| s.mul(a))
    }

    /// `U · s`.
    pub fn rmul_scalar(&self, s: &SuperScalar<R>) -> Self {
        let g = self.grading;
        Self::from_fn(g, |i, j| self.get(i, j).mul(&s.twist(g.parity(i) + g.parity(j))))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.grading, o.grading, "grading mismatch");
        let g = self.grading;
        let d = g.dim();
        Self::from_fn(g, |i, l| {
            let mut acc = SuperScalar::zero();
            for j in 0..d {
                let u = self.get(i, j);
                let v = o.get(j, l);
                if u.is_zero() || v.is_zero() {
                    continue;
                }
                acc.add_assign(&u.mul(&v.twist(g.parity(i) + g.parity(j))));
            }
            acc
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.max_norm()).fold(0.0, f64::max)
    }

    /// Homogeneous parity `p` with `[U_ij] = [i]+[j]+p` for every entry.
    pub fn parity(&self) -> Option<u8> {
        let g = self.grading;
        let mut found: Option<u8> = None;
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                let e = self.get(i, j);
                if e.is_zero() {
                    continue;
                }
                let p = (e.parity()? + g.parity(i) + g.parity(j)) % 2;
                match found {
                    None => found = Some(p),
                    Some(q) if q != p => return None,
                    _ => {}
                }
            }
        }
        Some(found.unwrap_or(0))
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Some(0)
    }

    /// `(A^t)_ij = (−1)^{[i]([i]+[j])} A_ji`, defined on even matrices.
    pub fn supertranspose(&self) -> Result<Self> {
        if !self.is_even() {
            return Err(Error::NotEven);
        }
        Ok(self.supertranspose_unchecked())
    }

    pub(crate) fn supertranspose_unchecked(&self) -> Self {
        let g = self.grading;
        Self::from_fn(g, |i, j| {
            let a = self.get(j, i).clone();
            if g.parity(i) * (g.parity(i) + g.parity(j)) % 2 == 1 {
                a.neg()
            } else {
                a
            }
        })
    }

    /// `[[B, C]] = BC − (−1)^{[B][C]} CB`.
    pub fn supercommutator(&self, o: &Self) -> Result<Self> {
        let pb = self.parity().ok_or(Error::NotHomogeneous)?;
        let pc = o.parity().ok_or(Error::NotHomogeneous)?;
        let cb = o.mul(self);
        Ok(self.mul(o).sub(&if pb & pc == 1 { cb.neg() } else { cb }))
    }

    /// Supertrace `Σ (−1)^{[i]} U_ii`.
    pub fn supertrace(&self) -> SuperScalar<R> {
        let g = self.grading;
        let mut acc = SuperScalar::zero();
        for i in 0..g.dim() {
            let e = self.get(i, i);
            acc = if g.is_odd(i) { acc.sub(e) } else { acc.add(e) };
        }
        acc
    }
}

impl<R: Ring> fmt::Debug for SuperMatrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SuperMatrix {:?} [", self.grading)?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let e = self.get(i, j);
                if !e.is_zero() {
                    writeln!(f, "  ({i},{j}): {e:?}")?;
                }
            }
        }
        write!(f, "]")
    }
}
