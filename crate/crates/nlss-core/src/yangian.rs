//! Well-bred vertex operators on the truncated Fock space: the first two
//! levels `T⁰`, `T¹` of the super-Yangian generators and their checks.
//!
//! Auxiliary-space expressions such as `a†_{n…0} P_{∞k} a_{0…n}` are built
//! in a multi-slot graded algebra whose coefficients are operator words, so
//! every sign comes from the graded product rule.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::binomial;

use crate::fock::{FockOperator, FockRing, FockSpace, SparseOp};
use crate::grading::Grading;
use crate::report::CheckReport;
use crate::ring::{Ring, RingKind};

/// `α_k^n = (−1)^{k−1} C(n−1, k−1)`.
pub fn alpha(k: usize, n: usize) -> i64 {
    assert!(1 <= k && k <= n, "alpha needs 1 <= k <= n");
    let b = binomial(n as i64 - 1, k as i64 - 1);
    if k % 2 == 1 {
        b
    } else {
        -b
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaCoefficients {
    n_max: usize,
    table: Vec<Vec<i64>>,
}

impl AlphaCoefficients {
    pub fn new(n_max: usize) -> Self {
        let table = (1..=n_max).map(|n| (1..=n).map(|k| alpha(k, n)).collect()).collect();
        AlphaCoefficients { n_max, table }
    }

    pub fn get(&self, k: usize, n: usize) -> i64 {
        self.table[n - 1][k - 1]
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

/// `Σ_{n=k}^{i−1} C(N,n) α_k^n α_{i−n}^{N−n} = α_k^N − α_i^N` for
/// `1 ≤ k ≤ i ≤ N ≤ n_max`.
pub fn check_alpha_identity(n_max: usize) -> CheckReport {
    let t = AlphaCoefficients::new(n_max);
    let mut worst = 0i64;
    let mut triples = 0usize;
    for big in 1..=n_max {
        for i in 1..=big {
            for k in 1..=i {
                let lhs: i64 = (k..i).map(|n| binomial(big as i64, n as i64) * t.get(k, n) * t.get(i - n, big - n)).sum();
                let rhs = t.get(k, big) - t.get(i, big);
                worst = worst.max((lhs - rhs).abs());
                triples += 1;
            }
        }
    }
    CheckReport::exact("yangian.alpha_identity", worst == 0, worst as f64, &format!("N<={n_max}")).with_param("triples", triples)
}

/// One tensor factor of an auxiliary slot: identity, matrix unit `E_ij`,
/// basis vector `e_c` or dual vector `e†_c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Factor {
    One,
    E(u8, u8),
    V(u8),
    D(u8),
}

impl Factor {
    fn parity(self, g: Grading) -> u8 {
        match self {
            Factor::One => 0,
            Factor::E(i, j) => (g.parity(i as usize) + g.parity(j as usize)) % 2,
            Factor::V(c) | Factor::D(c) => g.parity(c as usize),
        }
    }

    fn mul(self, o: Factor) -> Option<Factor> {
        use Factor::*;
        match (self, o) {
            (One, x) | (x, One) => Some(x),
            (E(i, j), E(k, l)) => (j == k).then_some(E(i, l)),
            (E(i, j), V(c)) => (j == c).then_some(V(i)),
            (D(c), E(i, j)) => (c == i).then_some(D(j)),
            (D(c), V(d)) => (c == d).then_some(One),
            (V(c), D(d)) => Some(E(c, d)),
            (a, b) => panic!("no product {a:?}·{b:?} inside one slot"),
        }
    }
}

/// Coefficients of the auxiliary algebra.
pub trait Coeff: Clone {
    fn cmul(&self, o: &Self) -> Self;
    fn cadd(&self, o: &Self) -> Self;
    fn cneg(&self) -> Self;
    fn cis_zero(&self) -> bool;
}

impl<R: Ring> Coeff for FockOperator<R> {
    fn cmul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn cadd(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn cneg(&self) -> Self {
        self.scale(&R::from_int(-1))
    }
    fn cis_zero(&self) -> bool {
        self.blocks().all(|(_, b)| b.is_zero())
    }
}

/// Letters of a formal operator word; `Mom(v)` is the (even, central)
/// momentum of integration variable `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Letter {
    Dag(u8, u8),
    Ann(u8, u8),
    Mom(u8),
}

/// Integer combination of operator words.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Formal(pub BTreeMap<Vec<Letter>, i64>);

impl Formal {
    pub fn letter(l: Letter) -> Self {
        Formal([(vec![l], 1)].into_iter().collect())
    }

    pub fn unit() -> Self {
        Formal([(Vec::new(), 1)].into_iter().collect())
    }
}

impl Coeff for Formal {
    fn cmul(&self, o: &Self) -> Self {
        let mut out: BTreeMap<Vec<Letter>, i64> = BTreeMap::new();
        for (a, x) in &self.0 {
            for (b, y) in &o.0 {
                let mut w = a.clone();
                w.extend_from_slice(b);
                *out.entry(w).or_insert(0) += x * y;
            }
        }
        out.retain(|_, v| *v != 0);
        Formal(out)
    }
    fn cadd(&self, o: &Self) -> Self {
        let mut out = self.0.clone();
        for (w, v) in &o.0 {
            *out.entry(w.clone()).or_insert(0) += v;
        }
        out.retain(|_, v| *v != 0);
        Formal(out)
    }
    fn cneg(&self) -> Self {
        Formal(self.0.iter().map(|(w, v)| (w.clone(), -v)).collect())
    }
    fn cis_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// Even element of `End(V)^{⊗a} ⊗ 𝒜` over a fixed number of auxiliary
/// slots, with the operator coefficient as the last tensor factor.
#[derive(Clone, Debug)]
pub struct AuxElem<C: Coeff> {
    grading: Grading,
    slots: usize,
    terms: BTreeMap<Vec<Factor>, C>,
}

impl<C: Coeff> AuxElem<C> {
    pub fn zero(grading: Grading, slots: usize) -> Self {
        AuxElem { grading, slots, terms: BTreeMap::new() }
    }

    pub fn single(grading: Grading, key: Vec<Factor>, c: C) -> Self {
        let slots = key.len();
        let mut e = Self::zero(grading, slots);
        e.push(key, c);
        e
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Factor>, &C)> {
        self.terms.iter()
    }

    pub fn push(&mut self, key: Vec<Factor>, c: C) {
        assert_eq!(key.len(), self.slots);
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v = v.cadd(&c);
                if v.cis_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                if !c.cis_zero() {
                    self.terms.insert(key, c);
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.push(k.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        AuxElem { grading: self.grading, slots: self.slots, terms: self.terms.iter().map(|(k, c)| (k.clone(), c.cneg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// `(x₁⊗…⊗x_s⊗A)(y₁⊗…⊗y_s⊗B) = (−1)^{Σ_{a>b}|x_a||y_b|} x₁y₁⊗…⊗AB`,
    /// with `|A|` the total auxiliary parity of its term.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.slots, o.slots);
        let g = self.grading;
        let mut out = Self::zero(g, self.slots);
        for (kx, cx) in &self.terms {
            let px: Vec<u8> = kx.iter().map(|f| f.parity(g)).collect();
            let op_par = px.iter().sum::<u8>() % 2;
            'pairs: for (ky, cy) in &o.terms {
                let mut key = Vec::with_capacity(self.slots);
                let mut sign = 0u8;
                let mut after = op_par;
                for b in (0..self.slots).rev() {
                    sign ^= ky[b].parity(g) & after;
                    after ^= px[b];
                    match kx[b].mul(ky[b]) {
                        Some(f) => key.push(f),
                        None => continue 'pairs,
                    }
                }
                key.reverse();
                let c = cx.cmul(cy);
                out.push(key, if sign == 1 { c.cneg() } else { c });
            }
        }
        out
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// Keep the first `keep` slots; every later slot must be `One`.
    pub fn contract(&self, keep: usize) -> Self {
        let mut out = Self::zero(self.grading, keep);
        for (k, c) in &self.terms {
            assert!(k[keep..].iter().all(|f| *f == Factor::One), "uncontracted auxiliary slot in {k:?}");
            out.push(k[..keep].to_vec(), c.clone());
        }
        out
    }

    /// Move the factors in place into a larger slot layout: slot `i` goes
    /// to `map[i]`.
    pub fn relocate(&self, slots: usize, map: &[usize]) -> Self {
        let mut out = Self::zero(self.grading, slots);
        for (k, c) in &self.terms {
            let mut key = vec![Factor::One; slots];
            for (i, f) in k.iter().enumerate() {
                key[map[i]] = *f;
            }
            out.push(key, c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rewrite `One` in slot `s` as `Σ_i E_ii`, the normal form for a slot
    /// holding matrices.
    pub fn expand_identity(&self, s: usize) -> Self {
        let mut out = Self::zero(self.grading, self.slots);
        for (k, c) in &self.terms {
            if k[s] == Factor::One {
                for i in 0..self.grading.k() {
                    let mut k2 = k.clone();
                    k2[s] = Factor::E(i as u8, i as u8);
                    out.push(k2, c.clone());
                }
            } else {
                out.push(k.clone(), c.clone());
            }
        }
        out
    }
}

/// `P_{st} = Σ_ij (−1)^{[j]} E_ij ⊗ E_ji` over slots `s`, `t` (the first
/// factor in the earlier slot; `P_{st} = P_{ts}`), coefficient `unit`.
pub fn perm_elem<C: Coeff>(grading: Grading, slots: usize, s: usize, t: usize, unit: &C) -> AuxElem<C> {
    let (s, t) = (s.min(t), s.max(t));
    let mut e = AuxElem::zero(grading, slots);
    for i in 0..grading.k() {
        for j in 0..grading.k() {
            let mut key = vec![Factor::One; slots];
            key[s] = Factor::E(i as u8, j as u8);
            key[t] = Factor::E(j as u8, i as u8);
            e.push(key, if grading.is_odd(j) { unit.cneg() } else { unit.clone() });
        }
    }
    e
}

/// `Σ_c f(c)^{(slot)} ⊗ coeff(c)`.
pub fn vector_elem<C: Coeff>(grading: Grading, slots: usize, slot: usize, dual: bool, coeff: impl Fn(usize) -> C) -> AuxElem<C> {
    let mut e = AuxElem::zero(grading, slots);
    for c in 0..grading.k() {
        let mut key = vec![Factor::One; slots];
        key[slot] = if dual { Factor::D(c as u8) } else { Factor::V(c as u8) };
        e.push(key, coeff(c));
    }
    e
}

pub fn identity_elem<C: Coeff>(grading: Grading, slots: usize, unit: &C) -> AuxElem<C> {
    let mut e = AuxElem::zero(grading, slots);
    for i in 0..grading.k() {
        let mut key = vec![Factor::One; slots];
        if slots > 0 {
            key[0] = Factor::E(i as u8, i as u8);
            e.push(key, unit.clone());
        } else {
            e.push(key, unit.clone());
            break;
        }
    }
    e
}

/// `I` on slot `s` only.
pub fn identity_at<C: Coeff>(grading: Grading, slots: usize, s: usize, unit: &C) -> AuxElem<C> {
    let mut e = AuxElem::zero(grading, slots);
    for i in 0..grading.k() {
        let mut key = vec![Factor::One; slots];
        key[s] = Factor::E(i as u8, i as u8);
        e.push(key, unit.clone());
    }
    e
}

/// `a†_{v_1}⋯a†_{v_m} · mid · a_{v_m}⋯a_{v_1}` with variable `v` living in
/// slot `1 + v`, contracted down to slot 0.
pub fn sandwich(grading: Grading, vars: &[usize], mid: &AuxElem<Formal>) -> AuxElem<Formal> {
    let slots = mid.slots();
    let mut left = identity_elem_unit(grading, slots);
    for &v in vars {
        let d = vector_elem(grading, slots, 1 + v, true, |c| dag_letter(grading, c, v));
        left = left.mul(&d);
    }
    let mut right = identity_elem_unit(grading, slots);
    for &v in vars.iter().rev() {
        let a = vector_elem(grading, slots, 1 + v, false, |c| Formal::letter(Letter::Ann(c as u8, v as u8)));
        right = right.mul(&a);
    }
    left.mul(mid).mul(&right).contract(1)
}

/// `a†_v = (a_v)† = Σ_c (−1)^{[c]} e†_c ⊗ a†_c`, the graded adjoint of
/// `Σ_c e_c ⊗ a_c`.
fn dag_letter(grading: Grading, c: usize, v: usize) -> Formal {
    let f = Formal::letter(Letter::Dag(c as u8, v as u8));
    if grading.is_odd(c) {
        f.cneg()
    } else {
        f
    }
}

fn identity_elem_unit(grading: Grading, slots: usize) -> AuxElem<Formal> {
    AuxElem::single(grading, vec![Factor::One; slots], Formal::unit())
}

/// K×K matrix of operators `T = Σ E_ij ⊗ T_ij`, level 0 or 1.
#[derive(Clone, Debug)]
pub struct YangianLevel<R: Ring> {
    pub level: u8,
    pub grading: Grading,
    pub entries: Vec<FockOperator<R>>,
}

impl<R: Ring> YangianLevel<R> {
    pub fn entry(&self, i: usize, j: usize) -> &FockOperator<R> {
        &self.entries[i * self.grading.k() + j]
    }

    /// Embed as an auxiliary element on slot `s` of `slots`.
    pub fn elem(&self, slots: usize, s: usize) -> AuxElem<FockOperator<R>> {
        let k = self.grading.k();
        let mut e = AuxElem::zero(self.grading, slots);
        for i in 0..k {
            for j in 0..k {
                let mut key = vec![Factor::One; slots];
                key[s] = Factor::E(i as u8, j as u8);
                e.push(key, self.entry(i, j).clone());
            }
        }
        e
    }

    fn from_elem(level: u8, grading: Grading, e: &AuxElem<FockOperator<R>>) -> Self {
        let k = grading.k();
        let mut entries = vec![FockOperator::new(); k * k];
        for (key, c) in e.terms() {
            match key[0] {
                Factor::E(i, j) => entries[i as usize * k + j as usize] = c.clone(),
                f => panic!("level matrix has factor {f:?}"),
            }
        }
        YangianLevel { level, grading, entries }
    }
}

/// Which closed form of `T⁰` to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum T0Form {
    /// `Σ_n (−1)^{n+1}/n! Σ_k (−1)^{n−k} C(n,k) a†_{n…0} P_{∞k} a_{0…n}`.
    Printed,
    /// `−N·I − Σ_n 1/(n+1)! Σ_k (−1)^k C(n,k) a†_{n…0} P_{∞k} a_{0…n}`, from
    /// the seed `T^{(1)} = −(I + P_{∞0})`.
    Derived,
}

/// Which closed form of `T¹` to assemble. All share the `μ_k α_k^n P_{∞k}`
/// part; they differ in the order-`g` terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum T1Form {
    /// `−ig Σ_{i<k} P_{∞k}P_{∞i}` plus `ig T⁰T⁰`.
    Recast,
    /// `−ig n α_k^n P_{∞k} − ig α_k^n Σ_{i<k} P_{∞i}P_{∞k}`, no `T⁰T⁰`.
    Unrecast,
    /// As `Unrecast` with `α_k^n` in the linear term replaced by
    /// `α_k^n − α_k^{n−1}` (`α_n^{n−1} = 0`).
    Derived,
}

/// Cached component operators on a Fock space.
pub struct WellBred<'a, R: FockRing> {
    space: &'a FockSpace<R>,
    ann: Vec<Vec<FockOperator<R>>>,
    cre: Vec<Vec<FockOperator<R>>>,
    id: FockOperator<R>,
}

fn factorial<R: Ring>(n: usize) -> R {
    R::from_int((1..=n as i64).product())
}

impl<'a, R: FockRing> WellBred<'a, R> {
    pub fn new(space: &'a FockSpace<R>) -> Self {
        let k = space.grading().k();
        let p = space.grid().len();
        let ann = (0..k).map(|c| (0..p).map(|q| space.annihilator(c, q)).collect()).collect();
        let cre = (0..k).map(|c| (0..p).map(|q| space.creator(c, q)).collect()).collect();
        let mut id = FockOperator::new();
        for n in 0..=space.n_max() {
            id.insert(n, n, SparseOp::identity(space.sector_dim(n)));
        }
        WellBred { space, ann, cre, id }
    }

    pub fn space(&self) -> &FockSpace<R> {
        self.space
    }

    pub fn identity(&self) -> &FockOperator<R> {
        &self.id
    }

    fn grading(&self) -> Grading {
        self.space.grading()
    }

    /// Nested grid sum for one nested word
    /// `a†_{c_1}(v_1)⋯a†_{c_m}(v_m) a_{d_m}(v_m)⋯a_{d_1}(v_1)`, each
    /// variable weighted by `k^{mom(v)}`.
    fn eval_word(&self, word: &[Letter]) -> FockOperator<R> {
        let mut dags = Vec::new();
        let mut anns = Vec::new();
        let mut mom: BTreeMap<u8, u32> = BTreeMap::new();
        for l in word {
            match *l {
                Letter::Dag(c, v) => dags.push((c as usize, v)),
                Letter::Ann(c, v) => anns.push((c as usize, v)),
                Letter::Mom(v) => *mom.entry(v).or_insert(0) += 1,
            }
        }
        assert_eq!(dags.len(), anns.len(), "unbalanced word");
        let m = dags.len();
        let mut inner = self.id.clone();
        for l in (0..m).rev() {
            let (c, v) = dags[l];
            let (d, v2) = anns[m - 1 - l];
            assert_eq!(v, v2, "word is not nested");
            let w = mom.get(&v).copied().unwrap_or(0);
            let mut acc = FockOperator::new();
            for q in 0..self.space.grid().len() {
                let kq = self.space.momentum(q).clone();
                let weight = (0..w).fold(R::one(), |a, _| a.mul(&kq));
                if weight.is_zero() {
                    continue;
                }
                let term = self.cre[c][q].mul(&inner).mul(&self.ann[d][q]);
                acc = acc.add(&term.scale(&weight));
            }
            inner = acc;
        }
        inner.truncated_top = false;
        inner
    }

    fn eval(&self, e: &AuxElem<Formal>) -> AuxElem<FockOperator<R>> {
        let mut out = AuxElem::zero(self.grading(), e.slots());
        for (key, f) in e.terms() {
            let mut op = FockOperator::new();
            for (w, c) in &f.0 {
                op = op.add(&self.eval_word(w).scale(&R::from_int(*c)));
            }
            out.push(key.clone(), op);
        }
        out
    }

    fn unit_formal(&self) -> Formal {
        Formal::unit()
    }

    /// `Σ_k c_k P_{∞k}` between `a†_{n…0}` and `a_{0…n}` (slots ∞, 0…n).
    fn t0_term(&self, n: usize, coeff: impl Fn(usize) -> i64) -> AuxElem<FockOperator<R>> {
        let g = self.grading();
        let slots = n + 2;
        let mut mid = AuxElem::zero(g, slots);
        for k in 0..=n {
            let c = coeff(k);
            if c == 0 {
                continue;
            }
            let p = perm_elem(g, slots, 0, 1 + k, &Formal(self.unit_formal().0.into_iter().map(|(w, _)| (w, c)).collect()));
            mid = mid.add(&p);
        }
        let vars: Vec<usize> = (0..=n).rev().collect();
        self.eval(&sandwich(g, &vars, &mid))
    }

    fn scale_elem(e: &AuxElem<FockOperator<R>>, s: &R) -> AuxElem<FockOperator<R>> {
        let mut out = AuxElem::zero(e.grading, e.slots);
        for (k, c) in e.terms() {
            out.push(k.clone(), c.scale(s));
        }
        out
    }

    pub fn build_t0(&self, form: T0Form) -> YangianLevel<R> {
        let g = self.grading();
        let mut t = AuxElem::zero(g, 1);
        for n in 0..self.space.n_max() {
            let (scalar, term) = match form {
                T0Form::Printed => {
                    let s = if (n + 1) % 2 == 0 { R::one() } else { R::from_int(-1) };
                    (s.mul(&factorial::<R>(n).inv().expect("nonzero")), self.t0_term(n, |k| if (n - k) % 2 == 0 { binomial(n as i64, k as i64) } else { -binomial(n as i64, k as i64) }))
                }
                T0Form::Derived => (
                    factorial::<R>(n + 1).inv().expect("nonzero").neg(),
                    self.t0_term(n, |k| if k % 2 == 0 { binomial(n as i64, k as i64) } else { -binomial(n as i64, k as i64) }),
                ),
            };
            t = t.add(&Self::scale_elem(&term, &scalar));
        }
        if form == T0Form::Derived {
            let mid = identity_at(g, 2, 0, &Formal::unit());
            t = t.sub(&self.eval(&sandwich(g, &[0], &mid)));
        }
        YangianLevel::from_elem(0, g, &t)
    }

    /// `T¹` in the chosen closed form; `μ_k` is the grid variable of slot `k`.
    pub fn build_t1(&self, t0: &YangianLevel<R>, form: T1Form) -> YangianLevel<R> {
        let g = self.grading();
        let ig = R::i().mul(self.space.coupling());
        let unit = |c: i64| Formal([(Vec::new(), c)].into_iter().collect());
        let mut t = AuxElem::zero(g, 1);
        for n in 1..=self.space.n_max() {
            let slots = n + 1;
            let mut lin = AuxElem::zero(g, slots);
            let mut shift = AuxElem::zero(g, slots);
            let mut quad = AuxElem::zero(g, slots);
            for k in 1..=n {
                let a = alpha(k, n);
                let mom = Formal([(vec![Letter::Mom(k as u8 - 1)], a)].into_iter().collect());
                lin = lin.add(&perm_elem(g, slots, 0, k, &mom));
                let c = match form {
                    T1Form::Recast => 0,
                    T1Form::Unrecast => n as i64 * a,
                    T1Form::Derived => n as i64 * (a - if k < n { alpha(k, n - 1) } else { 0 }),
                };
                shift = shift.add(&perm_elem(g, slots, 0, k, &unit(c)));
                for i in 1..k {
                    let pk = perm_elem(g, slots, 0, k, &unit(a));
                    let pi = perm_elem(g, slots, 0, i, &Formal::unit());
                    quad = quad.add(&match form {
                        T1Form::Recast => pk.mul(&pi),
                        _ => pi.mul(&pk),
                    });
                }
            }
            let vars: Vec<usize> = (0..n).collect();
            let lin = self.eval(&sandwich(g, &vars, &lin));
            let rest = self.eval(&sandwich(g, &vars, &shift.add(&quad)));
            let s = if n % 2 == 0 { R::one() } else { R::from_int(-1) };
            let s = s.mul(&factorial::<R>(n).inv().expect("nonzero"));
            t = t.add(&Self::scale_elem(&lin.sub(&Self::scale_elem(&rest, &ig)), &s));
        }
        if form == T1Form::Recast {
            let t0e = t0.elem(1, 0);
            t = t.add(&Self::scale_elem(&t0e.mul(&t0e), &ig));
        }
        YangianLevel::from_elem(1, g, &t)
    }
}

/// Drop the auxiliary-identity component of slot `s`:
/// `X ↦ X − I_s ⊗ (1/K) Σ_l X_{ll}`.
pub fn traceless_at<R: Ring>(e: &AuxElem<FockOperator<R>>, s: usize) -> AuxElem<FockOperator<R>> {
    let k = e.grading.k();
    let inv_k = R::from_int(k as i64).inv().expect("nonzero").neg();
    let mut out = e.clone();
    for (key, c) in e.terms() {
        if let Factor::E(i, j) = key[s] {
            if i == j {
                for l in 0..k {
                    let mut k2 = key.clone();
                    k2[s] = Factor::E(l as u8, l as u8);
                    out.push(k2, c.scale(&inv_k));
                }
            }
        }
    }
    out
}

impl<'a, R: FockRing> WellBred<'a, R> {
    /// `(all-zero, worst)` of `e` with each coefficient applied to the
    /// projected input sectors in `sectors`.
    fn residual(&self, e: &AuxElem<FockOperator<R>>, sectors: core::ops::RangeInclusive<usize>) -> (bool, f64) {
        let mut zero = true;
        let mut worst: f64 = 0.0;
        for (_, c) in e.terms() {
            let (z, w) = self.space.residual_on(c, sectors.clone());
            zero &= z;
            worst = worst.max(w);
        }
        (zero, worst)
    }

    fn scaled(&self, e: &AuxElem<FockOperator<R>>, s: &R) -> AuxElem<FockOperator<R>> {
        Self::scale_elem(e, s)
    }

    /// Residuals of the four order-`λ⁻²` well-bred relations, slots `(∞, 0)`,
    /// all grid momenta `μ`. The `T¹` ones are compared modulo `I_∞`.
    pub fn wellbred_residuals(&self, t0: &YangianLevel<R>, t1: &YangianLevel<R>) -> [(bool, f64); 4] {
        let g = self.grading();
        let n_max = self.space.n_max();
        let ig = R::i().mul(self.space.coupling());
        let t0e = t0.elem(2, 0);
        let t1e = t1.elem(2, 0);
        let id = identity_elem(g, 2, &self.id);
        let ip = id.add(&perm_elem(g, 2, 0, 1, &self.id));
        let mut out = [(true, 0.0f64); 4];
        let mut fold = |i: usize, r: (bool, f64)| {
            out[i].0 &= r.0;
            out[i].1 = out[i].1.max(r.1);
        };
        for q in 0..self.space.grid().len() {
            let mu = self.space.momentum(q).clone();
            let a = vector_elem(g, 2, 1, false, |c| self.ann[c][q].clone());
            let ad = vector_elem(g, 2, 1, true, |c| if g.is_odd(c) { self.cre[c][q].cneg() } else { self.cre[c][q].clone() });
            let r0 = t0e.commutator(&a).sub(&ip.mul(&a));
            fold(0, self.residual(&r0, 1..=n_max));
            let rhs1 = self.scaled(&ip.mul(&a), &mu).add(&self.scaled(&ip.mul(&a).mul(&id.add(&t0e)), &ig));
            let r1 = traceless_at(&t1e.commutator(&a).sub(&rhs1), 0);
            fold(1, self.residual(&r1, 1..=n_max));
            let r2 = t0e.commutator(&ad).add(&ad.mul(&ip));
            fold(2, self.residual(&r2, 0..=n_max - 1));
            let rhs3 = self.scaled(&ad.mul(&ip), &mu.neg()).add(&self.scaled(&ad.mul(&ip).mul(&id.sub(&t0e)), &ig));
            let r3 = traceless_at(&t1e.commutator(&ad).sub(&rhs3), 0);
            fold(3, self.residual(&r3, 0..=n_max - 1));
        }
        out
    }
}

impl<'a, R: FockRing> WellBred<'a, R> {
    fn verdict(&self, id: &str, zero: bool, worst: f64, domain: &str) -> CheckReport {
        match R::KIND {
            RingKind::Exact => CheckReport::exact(id, zero, worst, domain),
            RingKind::Float => CheckReport::tolerance(id, worst, crate::fock::FLOAT_TOL, domain),
        }
    }

    fn domain(&self) -> String {
        let g = self.grading();
        format!("gl({}|{}), P={}, n_max={}", g.m, g.n, self.space.grid().len(), self.space.n_max())
    }

    /// The four order-`λ⁻²` well-bred commutators for the derived `T⁰`,
    /// `T¹`; the printed forms' residuals ride along as parameters.
    pub fn check_wellbred_orders(&self) -> CheckReport {
        let t0 = self.build_t0(T0Form::Derived);
        let t1 = self.build_t1(&t0, T1Form::Derived);
        let r = self.wellbred_residuals(&t0, &t1);
        let zero = r.iter().all(|x| x.0);
        let worst = r.iter().map(|x| x.1).fold(0.0, f64::max);
        let t0p = self.build_t0(T0Form::Printed);
        let printed_t0 = self.wellbred_residuals(&t0p, &t1);
        let recast = self.wellbred_residuals(&t0, &self.build_t1(&t0, T1Form::Recast));
        let unrecast = self.wellbred_residuals(&t0, &self.build_t1(&t0, T1Form::Unrecast));
        self.verdict("yangian.wellbred_orders", zero, worst, &self.domain())
            .with_param("t0_a", r[0].1)
            .with_param("t1_a", r[1].1)
            .with_param("t0_adag", r[2].1)
            .with_param("t1_adag", r[3].1)
            .with_param("t1_compared", "traceless part in the auxiliary space")
            .with_param("printed_t0_residual", printed_t0[0].1.max(printed_t0[2].1))
            .with_param("recast_t1_residual", recast[1].1.max(recast[3].1))
            .with_param("unrecast_t1_residual", unrecast[1].1.max(unrecast[3].1))
    }

    /// `H⁽ʳ⁾ = Σ_k k^r Σ_j a†_j(k)a_j(k)` on all sectors.
    pub fn hamiltonian(&self, power: u32) -> FockOperator<R> {
        self.space.hamiltonian(power)
    }

    /// (a) `[T⁰_{∞′}, T⁰_∞] = [P_{∞′∞}, T⁰_∞]`; (b) `[T¹_{∞′}, T⁰_∞] =
    /// [P_{∞′∞}, T¹_∞]` modulo `I_{∞′}`; (c) `[T^{0,1}, H⁽ʳ⁾] = 0`,
    /// `r ≤ max_power`. Slots: `∞` = 0, `∞′` = 1.
    pub fn check_frt_symmetry(&self, max_power: u32) -> CheckReport {
        let n_max = self.space.n_max();
        let g = self.grading();
        let t0 = self.build_t0(T0Form::Derived);
        let t1 = self.build_t1(&t0, T1Form::Derived);
        let p = perm_elem(g, 2, 1, 0, &self.id);
        let t0a = t0.elem(2, 0);
        let t0b = t0.elem(2, 1);
        let t1a = t1.elem(2, 0);
        let t1b = t1.elem(2, 1);
        let normal = |e: AuxElem<FockOperator<R>>| e.expand_identity(0).expand_identity(1);
        let a = self.residual(&normal(t0b.commutator(&t0a).sub(&p.commutator(&t0a))), 0..=n_max);
        let b = self.residual(&traceless_at(&normal(t1b.commutator(&t0a).sub(&p.commutator(&t1a))), 1), 0..=n_max);
        let mut c = (true, 0.0f64);
        for r in 0..=max_power {
            let h = AuxElem::single(g, vec![Factor::One], self.hamiltonian(r));
            for t in [&t0, &t1] {
                let x = self.residual(&t.elem(1, 0).commutator(&h), 0..=n_max);
                c.0 &= x.0;
                c.1 = c.1.max(x.1);
            }
        }
        let zero = a.0 && b.0 && c.0;
        let worst = a.1.max(b.1).max(c.1);
        self.verdict("yangian.frt_symmetry", zero, worst, &self.domain())
            .with_param("level0_closure", a.1)
            .with_param("t1_t0_frt", b.1)
            .with_param("hierarchy_commutators", c.1)
            .with_param("powers", format!("0..={max_power}"))
    }

    /// `ρ(σ) = −str_∞(σ_∞ T⁰_∞)` is a representation of `gl(M|N)`:
    /// `[[ρ(E_ab), ρ(E_cd)]] = ρ([[E_ab, E_cd]])` on all sectors.
    pub fn check_gl_closure(&self) -> CheckReport {
        let g = self.grading();
        let k = g.k();
        let n_max = self.space.n_max();
        let t0 = self.build_t0(T0Form::Derived).elem(1, 0);
        let rho = |a: usize, b: usize| -> FockOperator<R> {
            let s = AuxElem::single(g, vec![Factor::E(a as u8, b as u8)], self.id.clone());
            let mut out = FockOperator::new();
            for (key, c) in s.mul(&t0).terms() {
                if let Factor::E(i, j) = key[0] {
                    if i == j {
                        let sign = if g.is_odd(i as usize) { R::one() } else { R::from_int(-1) };
                        out = out.add(&c.scale(&sign));
                    }
                }
            }
            out
        };
        let ops: Vec<Vec<FockOperator<R>>> = (0..k).map(|a| (0..k).map(|b| rho(a, b)).collect()).collect();
        let par = |a: usize, b: usize| (g.parity(a) + g.parity(b)) % 2;
        let mut zero = true;
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for d in 0..k {
                        let (p1, p2) = (par(a, b), par(c, d));
                        let lhs = ops[a][b].supercommutator(&ops[c][d], p1, p2);
                        // [[E_ab, E_cd]] = δ_bc E_ad − (−1)^{p1 p2} δ_da E_cb
                        let mut rhs = FockOperator::new();
                        if b == c {
                            rhs = rhs.add(&ops[a][d]);
                        }
                        if d == a {
                            let s = if p1 & p2 == 1 { R::one() } else { R::from_int(-1) };
                            rhs = rhs.add(&ops[c][b].scale(&s));
                        }
                        let (z, w) = self.space.residual_on(&lhs.sub(&rhs), 0..=n_max);
                        zero &= z;
                        worst = worst.max(w);
                    }
                }
            }
        }
        self.verdict("yangian.gl_closure", zero, worst, &self.domain())
    }

    /// Fermion-number parity `(−1)^F` on each sector.
    fn parity_op(&self) -> FockOperator<R> {
        let g = self.grading();
        let mut op = FockOperator::new();
        for n in 0..=self.space.n_max() {
            let d: Vec<R> = (0..self.space.sector_dim(n))
                .map(|idx| {
                    let f: usize = self.space.decode(n, idx).iter().map(|s| g.parity(s.0) as usize).sum();
                    if f % 2 == 1 {
                        R::from_int(-1)
                    } else {
                        R::one()
                    }
                })
                .collect();
            op.insert(n, n, SparseOp::diagonal(&d));
        }
        op
    }

    /// `T_ij` has parity `[i]+[j]`, maps each sector to itself, and kills
    /// the vacuum; the next `T⁰` term beyond the truncation vanishes.
    pub fn check_structure(&self) -> CheckReport {
        let g = self.grading();
        let k = g.k();
        let t0 = self.build_t0(T0Form::Derived);
        let t1 = self.build_t1(&t0, T1Form::Derived);
        let f = self.parity_op();
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for t in [&t0, &t1] {
            for i in 0..k {
                for j in 0..k {
                    let e = t.entry(i, j);
                    ok &= e.blocks().all(|((o, n), _)| o == n);
                    ok &= e.block(0, 0).map_or(true, |b| b.is_zero());
                    let s = if (g.parity(i) + g.parity(j)) % 2 == 1 { R::from_int(-1) } else { R::one() };
                    let d = e.mul(&f).sub(&f.mul(e).scale(&s));
                    let (z, w) = self.space.residual_on(&d, 0..=self.space.n_max());
                    ok &= z;
                    worst = worst.max(w);
                }
            }
        }
        let beyond = self.t0_term(self.space.n_max(), |k| if k % 2 == 0 { 1 } else { -1 });
        let beyond_zero = beyond.terms().all(|(_, c)| c.cis_zero());
        ok &= beyond_zero;
        self.verdict("yangian.structure", ok, worst, &self.domain()).with_param("next_t0_term_vanishes", beyond_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{MomentumGrid, Normalization};
    use crate::rational::GaussQ;

    fn space(m: usize, n: usize, n_max: usize, ks: &[i64]) -> FockSpace<GaussQ> {
        FockSpace::build(Grading::new(m, n), MomentumGrid::from_ints(ks).unwrap(), n_max, GaussQ::frac(1, 3), Normalization::Factorial).unwrap()
    }

    #[test]
    fn alpha_spot_values() {
        assert_eq!((alpha(1, 1), alpha(1, 2), alpha(2, 2)), (1, 1, -1));
        assert!(check_alpha_identity(8).pass);
    }

    #[test]
    fn frt_and_symmetry_exact() {
        for (m, n) in [(1, 1), (2, 1)] {
            let s = space(m, n, 2, &[-1, 2, 3]);
            let w = WellBred::new(&s);
            let r = w.check_frt_symmetry(3);
            assert!(r.pass, "{r:?}");
            assert!(w.check_gl_closure().pass);
            assert!(w.check_structure().pass);
        }
    }

    #[test]
    fn wellbred_derived_forms_hold() {
        for (m, n, nm) in [(2, 0, 3), (1, 1, 3), (2, 1, 2), (1, 2, 2)] {
            let s = space(m, n, nm, &[-1, 2, 3]);
            let w = WellBred::new(&s);
            let t0 = w.build_t0(T0Form::Derived);
            let t1 = w.build_t1(&t0, T1Form::Derived);
            assert!(w.wellbred_residuals(&t0, &t1).iter().all(|r| r.0), "gl({m}|{n})");
        }
    }

    #[test]
    fn printed_forms_fail() {
        let s = space(1, 1, 2, &[-1, 2, 3]);
        let w = WellBred::new(&s);
        let t0 = w.build_t0(T0Form::Derived);
        let t0p = w.build_t0(T0Form::Printed);
        let t1 = w.build_t1(&t0, T1Form::Derived);
        assert!(!w.wellbred_residuals(&t0p, &t1)[0].0);
        for form in [T1Form::Recast, T1Form::Unrecast] {
            let r = w.wellbred_residuals(&t0, &w.build_t1(&t0, form));
            assert!(!(r[1].0 && r[3].0), "{form:?}");
        }
        let rep = w.check_wellbred_orders();
        assert!(rep.pass);
    }

    #[test]
    fn level0_one_particle() {
        // diagonal entries act nontrivially on one particle, not on the vacuum
        let s = space(1, 1, 1, &[0, 1]);
        let w = WellBred::new(&s);
        let t0 = w.build_t0(T0Form::Derived);
        for i in 0..2 {
            let e = t0.entry(i, i);
            let b = e.block(1, 1).unwrap();
            assert!(!b.is_zero());
        }
        assert!(t0.entry(0, 0).block(0, 0).map_or(true, |b| b.is_zero()));
    }

    #[test]
    fn float_ring_agrees() {
        use crate::rational::Rational;
        use num_complex::Complex64;
        let grid = MomentumGrid::new(alloc::vec![Rational::new(-7, 10), Rational::new(2, 5), Rational::new(19, 10)]).unwrap();
        let s = FockSpace::build(Grading::new(1, 1), grid, 3, Complex64::new(0.45, 0.0), Normalization::Unit).unwrap();
        let w = WellBred::new(&s);
        let r = w.check_wellbred_orders();
        assert!(r.pass, "{r:?}");
        assert!(w.check_frt_symmetry(2).pass);
    }
}
