//! Multivariate polynomials and rational functions over the Gaussian
//! rationals, in a fixed set of `NVARS` commuting indeterminates.
//!
//! A `RatFn` keeps its denominator as a product of normalized polynomial
//! factors with multiplicities. Sums bring both operands onto the least
//! common multiple of their factor sets, so denominators stay as small as
//! the inputs allow without a multivariate gcd.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::rational::GaussQ;
use crate::ring::{Ring, RingKind};

pub const NVARS: usize = 8;

pub type Exponents = [u8; NVARS];

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Exponents, GaussQ>,
}

fn mono_mul(a: &Exponents, b: &Exponents) -> Exponents {
    let mut out = [0u8; NVARS];
    for k in 0..NVARS {
        out[k] = a[k].checked_add(b[k]).expect("exponent overflow");
    }
    out
}

fn mono_div(a: &Exponents, b: &Exponents) -> Option<Exponents> {
    let mut out = [0u8; NVARS];
    for k in 0..NVARS {
        out[k] = a[k].checked_sub(b[k])?;
    }
    Some(out)
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: GaussQ) -> Self {
        let mut p = Poly::zero();
        p.add_term([0; NVARS], c);
        p
    }

    pub fn one() -> Self {
        Self::constant(GaussQ::one())
    }

    pub fn var(k: usize) -> Self {
        let mut e = [0u8; NVARS];
        e[k] = 1;
        let mut p = Poly::zero();
        p.add_term(e, GaussQ::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &GaussQ)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Constant term if the polynomial has no other terms.
    pub fn as_constant(&self) -> Option<GaussQ> {
        match self.terms.len() {
            0 => Some(GaussQ::zero()),
            1 => self.terms.get(&[0; NVARS]).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, e: Exponents, c: GaussQ) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&e) {
            Some(v) => {
                *v = v.add(&c);
                v.is_zero()
            }
            None => {
                self.terms.insert(e, c);
                false
            }
        };
        if remove {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &GaussQ) -> Self {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, c.mul(s))).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Poly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                out.add_term(mono_mul(e1, e2), c1.mul(c2));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn conj(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, c.conj())).collect() }
    }

    fn leading(&self) -> Option<(&Exponents, &GaussQ)> {
        self.terms.iter().next_back()
    }

    /// Splits off the leading coefficient: `self = c * monic`.
    pub fn split_content(&self) -> (GaussQ, Poly) {
        match self.leading() {
            None => (GaussQ::zero(), Poly::zero()),
            Some((_, c)) => {
                let c = c.clone();
                let inv = c.inv().expect("nonzero leading coefficient");
                (c, self.scale(&inv))
            }
        }
    }

    /// Exact quotient `self / d` if `d` divides `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (de, dc) = d.leading()?;
        let dinv = dc.inv()?;
        let mut rem = self.clone();
        let mut q = Poly::zero();
        while let Some((re, rc)) = rem.leading() {
            let te = mono_div(re, de)?;
            let tc = rc.mul(&dinv);
            let mut t = Poly::zero();
            t.add_term(te, tc);
            rem = rem.sub(&t.mul(d));
            q = q.add(&t);
        }
        Some(q)
    }

    /// Substitutes exact values for all variables.
    pub fn eval(&self, vals: &[GaussQ; NVARS]) -> GaussQ {
        let mut acc = GaussQ::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..NVARS {
                for _ in 0..e[k] {
                    t = t.mul(&vals[k]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (k, p) in e.iter().enumerate() {
                if *p > 0 {
                    write!(f, "*x{}^{}", k, p)?;
                }
            }
        }
        Ok(())
    }
}

/// Rational function `num / prod(factor^mult)`.
#[derive(Clone)]
pub struct RatFn {
    num: Poly,
    den: BTreeMap<Poly, u32>,
}

impl RatFn {
    pub fn from_poly(p: Poly) -> Self {
        RatFn { num: p, den: BTreeMap::new() }
    }

    pub fn var(k: usize) -> Self {
        Self::from_poly(Poly::var(k))
    }

    pub fn constant(c: GaussQ) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> Poly {
        expand(&self.den)
    }

    pub fn as_constant(&self) -> Option<GaussQ> {
        if self.num.is_zero() {
            return Some(GaussQ::zero());
        }
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    fn cancel(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let keys: Vec<Poly> = self.den.keys().cloned().collect();
        for f in keys {
            loop {
                let m = match self.den.get(&f) {
                    Some(m) => *m,
                    None => break,
                };
                match self.num.exact_div(&f) {
                    Some(q) => {
                        self.num = q;
                        if m == 1 {
                            self.den.remove(&f);
                        } else {
                            self.den.insert(f.clone(), m - 1);
                        }
                    }
                    None => break,
                }
            }
        }
        self
    }

    /// Divides by a polynomial, recording it as a denominator factor.
    pub fn div_poly(&self, p: &Poly) -> Option<Self> {
        if p.is_zero() {
            return None;
        }
        let (c, monic) = p.split_content();
        let mut out = self.clone();
        out.num = out.num.scale(&c.inv()?);
        if monic.as_constant().is_none() {
            *out.den.entry(monic).or_insert(0) += 1;
        }
        Some(out.cancel())
    }

    pub fn eval(&self, vals: &[GaussQ; NVARS]) -> Option<GaussQ> {
        let d = self.denominator().eval(vals);
        self.num.eval(vals).div(&d)
    }
}

fn expand(den: &BTreeMap<Poly, u32>) -> Poly {
    let mut acc = Poly::one();
    for (f, m) in den {
        acc = acc.mul(&f.pow(*m));
    }
    acc
}

fn lcm(a: &BTreeMap<Poly, u32>, b: &BTreeMap<Poly, u32>) -> BTreeMap<Poly, u32> {
    let mut out = a.clone();
    for (f, m) in b {
        let e = out.entry(f.clone()).or_insert(0);
        if *e < *m {
            *e = *m;
        }
    }
    out
}

fn cofactor(l: &BTreeMap<Poly, u32>, d: &BTreeMap<Poly, u32>) -> Poly {
    let mut acc = Poly::one();
    for (f, m) in l {
        let have = d.get(f).copied().unwrap_or(0);
        if *m > have {
            acc = acc.mul(&f.pow(*m - have));
        }
    }
    acc
}

impl PartialEq for RatFn {
    fn eq(&self, o: &Self) -> bool {
        Ring::sub(self, o).num.is_zero()
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "[{:?}] / [{:?}]", self.num, self.denominator())
        }
    }
}

impl Ring for RatFn {
    const KIND: RingKind = RingKind::Exact;

    fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }
    fn one() -> Self {
        Self::from_poly(Poly::one())
    }
    fn from_gauss(q: &GaussQ) -> Self {
        Self::constant(q.clone())
    }
    fn add(&self, o: &Self) -> Self {
        if self.num.is_zero() {
            return o.clone();
        }
        if o.num.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RatFn { num: self.num.add(&o.num), den: self.den.clone() }.cancel();
        }
        let l = lcm(&self.den, &o.den);
        let num = self.num.mul(&cofactor(&l, &self.den)).add(&o.num.mul(&cofactor(&l, &o.den)));
        RatFn { num, den: l }.cancel()
    }
    fn sub(&self, o: &Self) -> Self {
        Ring::add(self, &Ring::neg(o))
    }
    fn mul(&self, o: &Self) -> Self {
        if self.num.is_zero() || o.num.is_zero() {
            return Self::zero();
        }
        let mut den = self.den.clone();
        for (f, m) in &o.den {
            *den.entry(f.clone()).or_insert(0) += m;
        }
        RatFn { num: self.num.mul(&o.num), den }.cancel()
    }
    fn neg(&self) -> Self {
        RatFn { num: self.num.neg(), den: self.den.clone() }
    }
    fn conj(&self) -> Self {
        RatFn {
            num: self.num.conj(),
            den: self.den.iter().map(|(f, m)| (f.conj(), *m)).collect(),
        }
    }
    fn inv(&self) -> Option<Self> {
        RatFn::from_poly(expand(&self.den)).div_poly(&self.num)
    }
    fn is_negligible(&self) -> bool {
        self.num.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.num.terms().map(|(_, c)| c.abs_f64()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(k: usize) -> RatFn {
        RatFn::var(k)
    }

    #[test]
    fn sum_of_fractions_cancels() {
        // 1/(x0-x1) - 1/(x0-x1) = 0 and (x0-x1)/(x0-x1) = 1
        let d = Poly::var(0).sub(&Poly::var(1));
        let a = RatFn::one().div_poly(&d).unwrap();
        assert!(Ring::sub(&a, &a).is_zero());
        let b = RatFn::from_poly(d.clone()).div_poly(&d).unwrap();
        assert_eq!(b, RatFn::one());
    }

    #[test]
    fn partial_fractions_identity() {
        // 1/(x0 (x0+1)) = 1/x0 - 1/(x0+1)
        let x0 = Poly::var(0);
        let x0p1 = x0.add(&Poly::one());
        let lhs = RatFn::one().div_poly(&x0.mul(&x0p1)).unwrap();
        let rhs = Ring::sub(
            &RatFn::one().div_poly(&x0).unwrap(),
            &RatFn::one().div_poly(&x0p1).unwrap(),
        );
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Ring::add(&x(0), &Ring::mul(&x(1), &RatFn::i()));
        let b = a.inv().unwrap();
        assert_eq!(Ring::mul(&a, &b), RatFn::one());
    }

    #[test]
    fn exact_division() {
        let p = Poly::var(0).sub(&Poly::var(1));
        let q = Poly::var(0).add(&Poly::var(2));
        let prod = p.mul(&q);
        assert_eq!(prod.exact_div(&p), Some(q.clone()));
        assert_eq!(prod.add(&Poly::one()).exact_div(&p), None);
    }
}
