//! Sparse Grassmann-algebra scalars over a coefficient ring.
//!
//! A generator is a `u32` id packing `(index << 2) | (odd << 1) | conj`.
//! Conjugate generators come in pairs (`id ^ 1`). Monomials are stored as
//! id sequences in ascending order. Odd ids appear at most once; even ids may
//! repeat, which lets the same type serve as a polynomial ring in commuting
//! symbols (used for formal field values in functionals).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::ring::Ring;

pub type Gen = u32;
pub type Mono = SmallVec<[Gen; 8]>;

#[inline]
pub fn gen_is_odd(id: Gen) -> bool {
    (id >> 1) & 1 == 1
}

#[inline]
pub fn gen_conj(id: Gen) -> Gen {
    id ^ 1
}

#[inline]
pub fn gen_index(id: Gen) -> u32 {
    id >> 2
}

pub fn make_gen(index: u32, odd: bool, conj: bool) -> Gen {
    (index << 2) | ((odd as u32) << 1) | conj as u32
}

/// Parity of a monomial: number of odd generators mod 2.
pub fn mono_parity(m: &[Gen]) -> u8 {
    (m.iter().filter(|g| gen_is_odd(**g)).count() % 2) as u8
}

/// Merges two sorted monomials. `None` if an odd generator repeats; the
/// bool is true when the reordering sign is negative.
pub fn mono_mul(a: &[Gen], b: &[Gen]) -> Option<(Mono, bool)> {
    let mut out = Mono::with_capacity(a.len() + b.len());
    let mut odd_left_in_a = a.iter().filter(|g| gen_is_odd(**g)).count();
    let mut neg = false;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            if a[i] == b[j] && gen_is_odd(a[i]) {
                return None;
            }
            if gen_is_odd(a[i]) {
                odd_left_in_a -= 1;
            }
            out.push(a[i]);
            i += 1;
        } else {
            if gen_is_odd(b[j]) && odd_left_in_a % 2 == 1 {
                neg = !neg;
            }
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, neg))
}

/// Sorts an arbitrary generator word; `None` if it vanishes.
pub fn sort_word(word: &[Gen]) -> Option<(Mono, bool)> {
    let mut acc = Mono::new();
    let mut neg = false;
    for g in word {
        let (m, s) = mono_mul(&acc, &[*g])?;
        acc = m;
        neg ^= s;
    }
    Some((acc, neg))
}

#[derive(Clone, PartialEq)]
pub struct SuperScalar<R: Ring> {
    terms: BTreeMap<Mono, R>,
}

impl<R: Ring> Default for SuperScalar<R> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<R: Ring> SuperScalar<R> {
    pub fn zero() -> Self {
        SuperScalar { terms: BTreeMap::new() }
    }

    pub fn scalar(c: R) -> Self {
        let mut s = Self::zero();
        s.add_term(Mono::new(), c);
        s
    }

    pub fn one() -> Self {
        Self::scalar(R::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::scalar(R::from_int(n))
    }

    pub fn gen(id: Gen) -> Self {
        Self::term(&[id], R::one())
    }

    /// `c` times the ordered word `ids` (sorted with its sign).
    pub fn term(ids: &[Gen], c: R) -> Self {
        let mut s = Self::zero();
        if let Some((m, neg)) = sort_word(ids) {
            s.add_term(m, if neg { c.neg() } else { c });
        }
        s
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &R)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c` to the coefficient of an already sorted monomial.
    pub fn add_term(&mut self, m: Mono, c: R) {
        if c.is_negligible() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_negligible() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_assign(&mut self, o: &Self) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let (mut big, small) = if self.len() >= o.len() { (self.clone(), o) } else { (o.clone(), self) };
        big.add_assign(small);
        big
    }

    pub fn neg(&self) -> Self {
        SuperScalar { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, s: &R) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.mul(s));
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                if let Some((m, neg)) = mono_mul(m1, m2) {
                    let c = c1.mul(c2);
                    out.add_term(m, if neg { c.neg() } else { c });
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Negates odd monomials when `p` is odd: the sign picked up by moving
    /// this scalar past an object of parity `p`.
    pub fn twist(&self, p: u8) -> Self {
        if p % 2 == 0 {
            return self.clone();
        }
        SuperScalar {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), if mono_parity(m) == 1 { c.neg() } else { c.clone() }))
                .collect(),
        }
    }

    /// Even and odd parts.
    pub fn split_parity(&self) -> (Self, Self) {
        let mut e = Self::zero();
        let mut o = Self::zero();
        for (m, c) in &self.terms {
            if mono_parity(m) == 0 {
                e.terms.insert(m.clone(), c.clone());
            } else {
                o.terms.insert(m.clone(), c.clone());
            }
        }
        (e, o)
    }

    /// `Some(p)` if every monomial has parity `p`; zero counts as even.
    pub fn parity(&self) -> Option<u8> {
        let mut it = self.terms.keys().map(|m| mono_parity(m));
        let first = match it.next() {
            None => return Some(0),
            Some(p) => p,
        };
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Some(0)
    }

    pub fn is_odd(&self) -> bool {
        self.is_zero() || self.parity() == Some(1)
    }

    /// Coefficient of the empty monomial.
    pub fn body(&self) -> R {
        self.terms.get(&Mono::new()).cloned().unwrap_or_else(R::zero)
    }

    pub fn coeff(&self, m: &[Gen]) -> R {
        self.terms.get(m).cloned().unwrap_or_else(R::zero)
    }

    /// `(c θ_a θ_b ...)† = c̄ ... θ_b† θ_a†`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let word: Vec<Gen> = m.iter().rev().map(|g| gen_conj(*g)).collect();
            if let Some((mm, neg)) = sort_word(&word) {
                let c = c.conj();
                out.add_term(mm, if neg { c.neg() } else { c });
            }
        }
        out
    }

    /// Graded left derivative `∂/∂x`: the generator is brought to the front
    /// of each monomial, picking up (−1) per odd generator it passes.
    pub fn deriv(&self, x: Gen) -> Self {
        let mut out = Self::zero();
        let odd_x = gen_is_odd(x);
        for (m, c) in &self.terms {
            let mut mult = 0i64;
            let mut first = None;
            for (k, g) in m.iter().enumerate() {
                if *g == x {
                    if first.is_none() {
                        first = Some(k);
                    }
                    mult += 1;
                }
            }
            let Some(k) = first else { continue };
            let mut rest = m.clone();
            rest.remove(k);
            let c = c.scale_int(mult);
            let passed = if odd_x { m[..k].iter().filter(|g| gen_is_odd(**g)).count() } else { 0 };
            out.add_term(rest, if passed % 2 == 1 { c.neg() } else { c });
        }
        out
    }

    /// All first left derivatives at once: `gen → ∂self/∂gen`.
    pub fn gradient(&self) -> BTreeMap<Gen, Self> {
        let mut out: BTreeMap<Gen, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut odd_before = 0usize;
            let mut k = 0;
            while k < m.len() {
                let x = m[k];
                let mut mult = 1i64;
                while k + (mult as usize) < m.len() && m[k + mult as usize] == x {
                    mult += 1;
                }
                let mut rest = m.clone();
                rest.remove(k);
                let v = c.scale_int(mult);
                let neg = gen_is_odd(x) && odd_before % 2 == 1;
                out.entry(x).or_default().add_term(rest, if neg { v.neg() } else { v });
                if gen_is_odd(x) {
                    odd_before += 1;
                }
                k += mult as usize;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Substitutes each generator for which `f` returns a value. Generators
    /// are replaced left to right, so substituted values must have the parity
    /// of the generator they replace.
    pub fn substitute<F: Fn(Gen) -> Option<Self>>(&self, f: F) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut acc = Self::scalar(c.clone());
            for g in m.iter() {
                let v = f(*g).unwrap_or_else(|| Self::gen(*g));
                acc = acc.mul(&v);
                if acc.is_zero() {
                    break;
                }
            }
            out.add_assign(&acc);
        }
        out
    }

    pub fn map_coeffs<S: Ring, F: Fn(&R) -> S>(&self, f: F) -> SuperScalar<S> {
        let mut out = SuperScalar::<S>::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Keeps the monomials for which `keep` holds.
    pub fn filter<F: Fn(&[Gen]) -> bool>(&self, keep: F) -> Self {
        SuperScalar {
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_norm(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// `[[B, C]] = BC − (−1)^{[B][C]} CB` for homogeneous operands.
    pub fn supercommutator(&self, o: &Self) -> Result<Self> {
        let pb = self.parity().ok_or(Error::NotHomogeneous)?;
        let pc = o.parity().ok_or(Error::NotHomogeneous)?;
        let cb = o.mul(self);
        let cb = if pb & pc == 1 { cb.neg() } else { cb };
        Ok(self.mul(o).sub(&cb))
    }

    pub fn generators(&self) -> Vec<Gen> {
        let mut v: Vec<Gen> = self.terms.keys().flat_map(|m| m.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl<R: Ring> fmt::Debug for SuperScalar<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{:?}", c)?;
            for g in m.iter() {
                let t = if gen_is_odd(*g) { "θ" } else { "x" };
                let d = if *g & 1 == 1 { "†" } else { "" };
                write!(f, "·{}{}{}", t, gen_index(*g), d)?;
            }
        }
        Ok(())
    }
}

/// Hands out generator indices. Each call returns the unconjugated member
/// of a fresh conjugate pair.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    next: u32,
}

impl Registry {
    pub fn new() -> Self {
        Registry { next: 0 }
    }

    pub fn starting_at(index: u32) -> Self {
        Registry { next: index }
    }

    pub fn odd(&mut self) -> Gen {
        let g = make_gen(self.next, true, false);
        self.next += 1;
        g
    }

    pub fn even(&mut self) -> Gen {
        let g = make_gen(self.next, false, false);
        self.next += 1;
        g
    }

    pub fn next_index(&self) -> u32 {
        self.next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::GaussQ;
    use proptest::prelude::*;

    type S = SuperScalar<GaussQ>;

    fn th(i: u32) -> Gen {
        make_gen(i, true, false)
    }

    #[test]
    fn basic_products() {
        let (a, b) = (S::gen(th(1)), S::gen(th(2)));
        assert_eq!(a.mul(&b), S::term(&[th(1), th(2)], GaussQ::one()));
        assert_eq!(b.mul(&a), a.mul(&b).neg());
        assert!(a.mul(&a).is_zero());
        let one = S::one();
        let lhs = one.add(&a).mul(&one.add(&b));
        let rhs = one.add(&a).add(&b).add(&a.mul(&b));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn supercommutators_of_generators_vanish() {
        let (a, b) = (S::gen(th(1)), S::gen(th(2)));
        assert!(a.supercommutator(&b).unwrap().is_zero());
        assert!(a.supercommutator(&a).unwrap().is_zero());
        let mixed = S::one().add(&a);
        assert_eq!(mixed.supercommutator(&b), Err(Error::NotHomogeneous));
    }

    #[test]
    fn conjugation_reverses_order() {
        let (a, b) = (th(1), th(2));
        let ab = S::term(&[a, b], GaussQ::i());
        // (i θa θb)† = -i θb† θa†
        let expect = S::term(&[gen_conj(b), gen_conj(a)], GaussQ::i().neg());
        assert_eq!(ab.conj(), expect);
        assert_eq!(ab.conj().conj(), ab);
    }

    #[test]
    fn left_derivative_signs() {
        let (a, b, c) = (th(1), th(2), th(3));
        let abc = S::term(&[a, b, c], GaussQ::one());
        assert_eq!(abc.deriv(a), S::term(&[b, c], GaussQ::one()));
        assert_eq!(abc.deriv(b), S::term(&[a, c], GaussQ::one()).neg());
        assert_eq!(abc.deriv(c), S::term(&[a, b], GaussQ::one()));
        let x = make_gen(5, false, false);
        let x2 = S::term(&[x, x], GaussQ::one());
        assert_eq!(x2.deriv(x), S::gen(x).scale(&GaussQ::from_int(2)));
    }

    #[test]
    fn gradient_matches_deriv() {
        let x = make_gen(9, false, false);
        let f = S::term(&[th(1), x, th(2), x, th(3)], GaussQ::from_int(5))
            .add(&S::term(&[th(2), th(3)], GaussQ::i()));
        let grad = f.gradient();
        for g in [th(1), th(2), th(3), x, th(7)] {
            assert_eq!(grad.get(&g).cloned().unwrap_or_default(), f.deriv(g));
        }
    }

    #[test]
    fn top_degree_bounds_algebra() {
        // a product of G+1 odd elements in G generators vanishes
        let g = 4u32;
        let odd = |k: u32| {
            (0..g).fold(S::zero(), |acc, i| acc.add(&S::gen(th(i)).scale(&GaussQ::from_int(((i + 1) as i64).pow(k)))))
        };
        let top = (0..g).fold(S::one(), |acc, k| acc.mul(&odd(k)));
        assert_eq!(top.len(), 1);
        assert!(top.mul(&odd(g)).is_zero());
    }

    fn arb_scalar(ngen: u32) -> impl Strategy<Value = S> {
        prop::collection::vec((prop::collection::vec(0..ngen, 0..4), -3i64..4, -3i64..4), 0..5).prop_map(
            |ts| {
                let mut s = S::zero();
                for (ids, re, im) in ts {
                    let ids: Vec<Gen> = ids.into_iter().map(th).collect();
                    s.add_assign(&S::term(&ids, GaussQ::new(re.into(), im.into())));
                }
                s
            },
        )
    }

    proptest! {
        #[test]
        fn product_is_associative(a in arb_scalar(5), b in arb_scalar(5), c in arb_scalar(5)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn product_distributes(a in arb_scalar(5), b in arb_scalar(5), c in arb_scalar(5)) {
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn conj_is_antihomomorphism(a in arb_scalar(4), b in arb_scalar(4)) {
            prop_assert_eq!(a.mul(&b).conj(), b.conj().mul(&a.conj()));
            prop_assert_eq!(a.conj().conj(), a);
        }

        #[test]
        fn merge_sign_matches_permutation_parity(perm in Just((0u32..5).collect::<Vec<_>>()).prop_shuffle()) {
            let word: Vec<Gen> = perm.iter().map(|i| th(*i)).collect();
            let mut inversions = 0;
            for i in 0..perm.len() {
                for j in i + 1..perm.len() {
                    if perm[i] > perm[j] { inversions += 1; }
                }
            }
            let (_, neg) = sort_word(&word).unwrap();
            prop_assert_eq!(neg, inversions % 2 == 1);
        }

        #[test]
        fn graded_jacobi(a in arb_scalar(5), b in arb_scalar(5), c in arb_scalar(5)) {
            let (a, _) = a.split_parity();
            let (_, b) = b.split_parity();
            let (_, c) = c.split_parity();
            // [[a,[[b,c]]]] = [[[[a,b]],c]] + (−1)^{[a][b]} [[b,[[a,c]]]]
            let pa = a.parity().unwrap();
            let pb = b.parity().unwrap();
            let lhs = a.supercommutator(&b.supercommutator(&c).unwrap()).unwrap();
            let r1 = a.supercommutator(&b).unwrap().supercommutator(&c).unwrap();
            let r2 = b.supercommutator(&a.supercommutator(&c).unwrap()).unwrap();
            let r2 = if pa & pb == 1 { r2.neg() } else { r2 };
            prop_assert_eq!(lhs, r1.add(&r2));
        }
    }
}
