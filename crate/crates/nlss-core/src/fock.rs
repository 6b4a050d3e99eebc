//! Truncated Fock representation of the graded ZF algebra on a discrete
//! momentum grid.
//!
//! States in sector `n` are coefficient vectors over `((color, momentum))ⁿ`
//! with plain (ungraded) complex components; the auxiliary basis vectors
//! carry the grading, so moving `e_a` past `e_b` costs `(−1)^{[a][b]}`.
//! Momentum deltas are Kronecker deltas with unit weight.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grading::Grading;
use crate::rational::{GaussQ, Rational};
use crate::report::CheckReport;
use crate::ring::{Ring, RingKind};
use crate::rmatrix::r_quantum;
use crate::tensor::GradedTensor;

/// Default cap on the pre-projection dimension of any sector.
pub const DEFAULT_DIM_CAP: usize = 20_000;
/// Float tolerance for operator identities.
pub const FLOAT_TOL: f64 = 1e-12;

/// Rings that can supply `√n` where the unit normalization needs it.
pub trait FockRing: Ring {
    fn sqrt_int(n: u64) -> Option<Self>;
}

impl FockRing for Complex64 {
    fn sqrt_int(n: u64) -> Option<Self> {
        Some(Complex64::new(libm::sqrt(n as f64), 0.0))
    }
}

impl FockRing for GaussQ {
    fn sqrt_int(n: u64) -> Option<Self> {
        let r = libm::sqrt(n as f64) as u64;
        (0..=1).map(|d| r + d).find(|s| s * s == n).map(|s| GaussQ::from_int(s as i64))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentumGrid {
    momenta: Vec<Rational>,
}

impl MomentumGrid {
    pub fn new(momenta: Vec<Rational>) -> Result<Self> {
        if momenta.is_empty() {
            return Err(Error::InvalidConfig(String::from("momentum grid is empty")));
        }
        if momenta.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(String::from("momenta must be strictly increasing")));
        }
        Ok(MomentumGrid { momenta })
    }

    pub fn from_ints(ks: &[i64]) -> Result<Self> {
        Self::new(ks.iter().map(|&k| Rational::from_int(k)).collect())
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn momentum(&self, i: usize) -> &Rational {
        &self.momenta[i]
    }

    pub fn momenta(&self) -> &[Rational] {
        &self.momenta
    }
}

/// How the `√(n+1)` factors of the creation/annihilation formulas are
/// carried. `Factorial` is the similarity transform `ψₙ ↦ √(n!) ψₙ`, which
/// removes every square root (the scalar product picks up `1/n!`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Unit,
    Factorial,
}

/// Sparse matrix stored by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp<R: Ring> {
    rows: usize,
    cols: Vec<Vec<(usize, R)>>,
}

fn push_acc<R: Ring>(acc: &mut BTreeMap<usize, R>, i: usize, v: R) {
    let e = acc.entry(i).or_insert_with(R::zero);
    *e = e.add(&v);
}

fn finish<R: Ring>(acc: BTreeMap<usize, R>) -> Vec<(usize, R)> {
    acc.into_iter().filter(|(_, v)| !v.is_negligible()).collect()
}

impl<R: Ring> SparseOp<R> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseOp { rows, cols: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        SparseOp { rows: n, cols: (0..n).map(|i| vec![(i, R::one())]).collect() }
    }

    pub fn from_columns(rows: usize, cols: Vec<BTreeMap<usize, R>>) -> Self {
        SparseOp { rows, cols: cols.into_iter().map(finish).collect() }
    }

    pub fn diagonal(d: &[R]) -> Self {
        SparseOp { rows: d.len(), cols: d.iter().enumerate().map(|(i, v)| if v.is_negligible() { vec![] } else { vec![(i, v.clone())] }).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, R)] {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols.len(), o.rows, "shape mismatch");
        let cols = o
            .cols
            .iter()
            .map(|col| {
                let mut acc = BTreeMap::new();
                for (k, b) in col {
                    for (i, a) in &self.cols[*k] {
                        push_acc(&mut acc, *i, a.mul(b));
                    }
                }
                finish(acc)
            })
            .collect();
        SparseOp { rows: self.rows, cols }
    }

    fn zip(&self, o: &Self, f: impl Fn(&R, &R) -> R) -> Self {
        assert_eq!((self.rows, self.cols.len()), (o.rows, o.cols.len()), "shape mismatch");
        let cols = self
            .cols
            .iter()
            .zip(&o.cols)
            .map(|(a, b)| {
                let mut acc: BTreeMap<usize, (R, R)> = BTreeMap::new();
                for (i, v) in a {
                    acc.entry(*i).or_insert_with(|| (R::zero(), R::zero())).0 = v.clone();
                }
                for (i, v) in b {
                    acc.entry(*i).or_insert_with(|| (R::zero(), R::zero())).1 = v.clone();
                }
                acc.into_iter().map(|(i, (x, y))| (i, f(&x, &y))).filter(|(_, v)| !v.is_negligible()).collect()
            })
            .collect();
        SparseOp { rows: self.rows, cols }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, s: &R) -> Self {
        SparseOp {
            rows: self.rows,
            cols: self.cols.iter().map(|c| c.iter().map(|(i, v)| (*i, v.mul(s))).filter(|(_, v)| !v.is_negligible()).collect()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut cols = vec![BTreeMap::new(); self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            for (i, v) in c {
                cols[*i].insert(j, v.conj());
            }
        }
        Self::from_columns(self.cols.len(), cols)
    }

    pub fn apply(&self, v: &[R]) -> Vec<R> {
        let mut out = vec![R::zero(); self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            if v[j].is_negligible() {
                continue;
            }
            for (i, a) in c {
                out[*i] = out[*i].add(&a.mul(&v[j]));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    pub fn max_norm(&self) -> f64 {
        self.cols.iter().flatten().map(|(_, v)| v.magnitude()).fold(0.0, f64::max)
    }

    /// Rank by Gaussian elimination on the dense form; float pivots below
    /// `1e-9` times the largest entry count as zero.
    pub fn rank(&self) -> usize {
        let mut m: Vec<Vec<R>> = vec![vec![R::zero(); self.cols.len()]; self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            for (i, v) in c {
                m[*i][j] = v.clone();
            }
        }
        let thresh = match R::KIND {
            RingKind::Exact => 0.0,
            RingKind::Float => 1e-9 * self.max_norm().max(1.0),
        };
        let mut rank = 0;
        for col in 0..self.cols.len() {
            let piv = (rank..self.rows).max_by(|&a, &b| m[a][col].magnitude().partial_cmp(&m[b][col].magnitude()).unwrap());
            let Some(p) = piv else { break };
            if m[p][col].magnitude() <= thresh || m[p][col].is_zero() {
                continue;
            }
            m.swap(rank, p);
            let inv = m[rank][col].inv().expect("nonzero pivot");
            for r in 0..self.rows {
                if r != rank && !m[r][col].is_zero() {
                    let f = m[r][col].mul(&inv);
                    for c in col..self.cols.len() {
                        let d = f.mul(&m[rank][c]);
                        m[r][c] = m[r][c].sub(&d);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Columns of `self` followed by those of `o`.
    pub fn hcat(&self, o: &Self) -> Self {
        assert_eq!(self.rows, o.rows);
        let mut cols = self.cols.clone();
        cols.extend(o.cols.iter().cloned());
        SparseOp { rows: self.rows, cols }
    }
}

/// Operator between particle-number sectors, keyed by `(out, in)`.
#[derive(Clone, Debug)]
pub struct FockOperator<R: Ring> {
    blocks: BTreeMap<(usize, usize), SparseOp<R>>,
    /// Set when a raising block out of the top sector was dropped.
    pub truncated_top: bool,
}

impl<R: Ring> FockOperator<R> {
    pub fn new() -> Self {
        FockOperator { blocks: BTreeMap::new(), truncated_top: false }
    }

    pub fn insert(&mut self, out: usize, inp: usize, op: SparseOp<R>) {
        match self.blocks.get_mut(&(out, inp)) {
            Some(b) => *b = b.add(&op),
            None => {
                self.blocks.insert((out, inp), op);
            }
        }
    }

    pub fn block(&self, out: usize, inp: usize) -> Option<&SparseOp<R>> {
        self.blocks.get(&(out, inp))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &SparseOp<R>)> {
        self.blocks.iter()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = FockOperator { blocks: BTreeMap::new(), truncated_top: self.truncated_top || o.truncated_top };
        for (&(m, n), b) in &o.blocks {
            for (&(l, m2), a) in &self.blocks {
                if m2 == m {
                    out.insert(l, n, a.mul(b));
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.truncated_top |= o.truncated_top;
        for (&(a, b), op) in &o.blocks {
            out.insert(a, b, op.clone());
        }
        out
    }

    pub fn scale(&self, s: &R) -> Self {
        FockOperator { blocks: self.blocks.iter().map(|(k, v)| (*k, v.scale(s))).collect(), truncated_top: self.truncated_top }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&R::from_int(-1)))
    }

    /// Super-commutator `[[A, B]] = AB − (−1)^{pa·pb} BA`.
    pub fn supercommutator(&self, o: &Self, pa: u8, pb: u8) -> Self {
        let s = if pa & pb & 1 == 1 { R::one() } else { R::from_int(-1) };
        self.mul(o).add(&o.mul(self).scale(&s))
    }

    /// Blocks leaving input sector `n`, sorted by output sector.
    pub fn from_sector(&self, n: usize) -> Vec<(usize, &SparseOp<R>)> {
        self.blocks.iter().filter(|((_, i), _)| *i == n).map(|((o, _), b)| (*o, b)).collect()
    }
}

impl<R: Ring> Default for FockOperator<R> {
    fn default() -> Self {
        Self::new()
    }
}

/// Entries `(color, momentum index, coefficient)` of a one-particle profile.
pub type Profile<R> = Vec<(usize, usize, R)>;

type Slot = (usize, usize);

pub struct FockSpace<R: FockRing> {
    grading: Grading,
    grid: MomentumGrid,
    n_max: usize,
    g: R,
    norm: Normalization,
    moms: Vec<R>,
    /// `rtab[p][q] = R(k_p − k_q)`.
    rtab: Vec<Vec<GradedTensor<R>>>,
    projectors: Vec<SparseOp<R>>,
}

impl<R: FockRing> FockSpace<R> {
    pub fn build(grading: Grading, grid: MomentumGrid, n_max: usize, g: R, norm: Normalization) -> Result<Self> {
        Self::build_capped(grading, grid, n_max, g, norm, DEFAULT_DIM_CAP)
    }

    pub fn build_capped(grading: Grading, grid: MomentumGrid, n_max: usize, g: R, norm: Normalization, cap: usize) -> Result<Self> {
        let d1 = grading.k() * grid.len();
        let top = (0..n_max).try_fold(1usize, |acc, _| acc.checked_mul(d1)).filter(|&d| d <= cap);
        if top.is_none() {
            return Err(Error::Budget(format!("sector {n_max} exceeds dimension cap {cap}")));
        }
        if norm == Normalization::Unit && (1..=n_max as u64).any(|n| R::sqrt_int(n).is_none()) {
            return Err(Error::InvalidConfig(String::from("unit normalization needs square roots absent from this ring")));
        }
        let moms: Vec<R> = grid.momenta().iter().map(R::from_rational).collect();
        let p = grid.len();
        let mut rtab = Vec::with_capacity(p);
        for a in 0..p {
            let mut row = Vec::with_capacity(p);
            for b in 0..p {
                row.push(if g.is_zero() {
                    GradedTensor::identity(&[grading, grading])
                } else {
                    r_quantum(&moms[a].sub(&moms[b]), &g, grading)?
                });
            }
            rtab.push(row);
        }
        let mut space = FockSpace { grading, grid, n_max, g, norm, moms, rtab, projectors: Vec::new() };
        space.projectors = (0..=n_max).map(|n| space.build_projector(n)).collect();
        Ok(space)
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn coupling(&self) -> &R {
        &self.g
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    pub fn momentum(&self, p: usize) -> &R {
        &self.moms[p]
    }

    fn one_dim(&self) -> usize {
        self.grading.k() * self.grid.len()
    }

    pub fn sector_dim(&self, n: usize) -> usize {
        self.one_dim().pow(n as u32)
    }

    pub fn encode(&self, x: &[Slot]) -> usize {
        let p = self.grid.len();
        x.iter().fold(0, |acc, &(c, m)| acc * self.one_dim() + c * p + m)
    }

    pub fn decode(&self, n: usize, mut idx: usize) -> Vec<Slot> {
        let p = self.grid.len();
        let d = self.one_dim();
        let mut x = vec![(0, 0); n];
        for t in (0..n).rev() {
            let s = idx % d;
            idx /= d;
            x[t] = (s / p, s % p);
        }
        x
    }

    fn par(&self, c: usize) -> u8 {
        self.grading.parity(c)
    }

    /// Apply a two-slot graded operator to slots `l < m` of basis state `x`,
    /// accumulating `coeff ·` result into `acc`.
    fn apply_pair(&self, t: &GradedTensor<R>, l: usize, m: usize, x: &[Slot], coeff: &R, acc: &mut BTreeMap<Vec<Slot>, R>) {
        let before_l: u8 = x[..l].iter().map(|s| self.par(s.0)).sum::<u8>() % 2;
        let before_m: u8 = x[..m].iter().map(|s| self.par(s.0)).sum::<u8>() % 2;
        for (idx, c) in t.terms() {
            let (i, j) = (idx[0].0 as usize, idx[0].1 as usize);
            let (k, q) = (idx[1].0 as usize, idx[1].1 as usize);
            if j != x[l].0 || q != x[m].0 {
                continue;
            }
            let pl = (self.par(i) + self.par(j)) % 2;
            let pm = (self.par(k) + self.par(q)) % 2;
            let sign = (pl * before_l + pm * before_m) % 2;
            let mut y = x.to_vec();
            y[l].0 = i;
            y[m].0 = k;
            let mut v = c.body().mul(coeff);
            if sign == 1 {
                v = v.neg();
            }
            let e = acc.entry(y).or_insert_with(R::zero);
            *e = e.add(&v);
        }
    }

    /// `(T_i ψ)(…p_i, p_{i+1}…) = R_{i,i+1}(p_i − p_{i+1}) P_{i,i+1} ψ(…p_{i+1}, p_i…)`.
    fn swap_op(&self, n: usize, i: usize) -> SparseOp<R> {
        let dim = self.sector_dim(n);
        let cols = (0..dim)
            .map(|col| {
                let x = self.decode(n, col);
                let mut y = x.clone();
                y.swap(i, i + 1);
                let s = if self.par(x[i].0) & self.par(x[i + 1].0) == 1 { R::from_int(-1) } else { R::one() };
                let mut acc = BTreeMap::new();
                self.apply_pair(&self.rtab[y[i].1][y[i + 1].1], i, i + 1, &y, &s, &mut acc);
                acc.into_iter().map(|(z, v)| (self.encode(&z), v)).collect()
            })
            .collect();
        SparseOp::from_columns(dim, cols)
    }

    fn build_projector(&self, n: usize) -> SparseOp<R> {
        let dim = self.sector_dim(n);
        if n < 2 {
            return SparseOp::identity(dim);
        }
        let gens: Vec<SparseOp<R>> = (0..n - 1).map(|i| self.swap_op(n, i)).collect();
        let start: Vec<usize> = (0..n).collect();
        let mut seen: BTreeMap<Vec<usize>, SparseOp<R>> = BTreeMap::new();
        seen.insert(start.clone(), SparseOp::identity(dim));
        let mut frontier = vec![start];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for perm in frontier {
                for (i, t) in gens.iter().enumerate() {
                    let mut q = perm.clone();
                    q.swap(i, i + 1);
                    if !seen.contains_key(&q) {
                        let op = t.mul(&seen[&perm]);
                        seen.insert(q.clone(), op);
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
        let count = seen.len() as i64;
        let sum = seen.values().fold(SparseOp::zero(dim, dim), |a, b| a.add(b));
        sum.scale(&R::from_int(count).inv().expect("nonzero"))
    }

    /// The R-symmetrizer on sector `n`.
    pub fn projector(&self, n: usize) -> &SparseOp<R> {
        &self.projectors[n]
    }

    /// Projector as a block-diagonal operator.
    pub fn projector_op(&self) -> FockOperator<R> {
        let mut op = FockOperator::new();
        for n in 0..=self.n_max {
            op.insert(n, n, self.projectors[n].clone());
        }
        op
    }

    fn lower_factor(&self, n_out: usize) -> R {
        match self.norm {
            Normalization::Unit => R::sqrt_int(n_out as u64 + 1).expect("checked at build"),
            Normalization::Factorial => R::one(),
        }
    }

    fn raise_factor(&self, n_in: usize) -> R {
        match self.norm {
            Normalization::Unit => R::sqrt_int(n_in as u64 + 1).expect("checked at build").inv().expect("nonzero"),
            Normalization::Factorial => R::one(),
        }
    }

    /// Component annihilator `a_j(k_p)`.
    pub fn annihilator(&self, j: usize, p: usize) -> FockOperator<R> {
        let mut op = FockOperator::new();
        for n in 0..self.n_max {
            let f = self.lower_factor(n);
            let cols = (0..self.sector_dim(n + 1))
                .map(|col| {
                    let x = self.decode(n + 1, col);
                    let mut acc = BTreeMap::new();
                    if x[0] == (j, p) {
                        acc.insert(self.encode(&x[1..]), f.clone());
                    }
                    acc
                })
                .collect();
            op.insert(n, n + 1, SparseOp::from_columns(self.sector_dim(n), cols));
        }
        op
    }

    /// Component creator `a†_j(k_p)`: the inserted vector sits in slot `m`
    /// behind `R_{m−1,m}(p_{m−1} − p_m)⋯R_{0m}(p_0 − p_m)`.
    pub fn creator(&self, j: usize, p: usize) -> FockOperator<R> {
        let mut op = FockOperator::new();
        for n in 0..self.n_max {
            let f = self.raise_factor(n);
            let cols = (0..self.sector_dim(n))
                .map(|col| {
                    let x = self.decode(n, col);
                    let mut total: BTreeMap<usize, R> = BTreeMap::new();
                    for m in 0..=n {
                        let mut y = x.clone();
                        y.insert(m, (j, p));
                        let before: u8 = x[..m].iter().map(|s| self.par(s.0)).sum::<u8>() % 2;
                        let s = if before & self.par(j) == 1 { f.neg() } else { f.clone() };
                        let mut cur: BTreeMap<Vec<Slot>, R> = BTreeMap::new();
                        cur.insert(y, s);
                        for l in 0..m {
                            let mut nxt = BTreeMap::new();
                            for (z, c) in &cur {
                                self.apply_pair(&self.rtab[z[l].1][z[m].1], l, m, z, c, &mut nxt);
                            }
                            cur = nxt;
                        }
                        for (z, c) in cur {
                            push_acc(&mut total, self.encode(&z), c);
                        }
                    }
                    total
                })
                .collect();
            op.insert(n + 1, n, SparseOp::from_columns(self.sector_dim(n + 1), cols));
        }
        op.truncated_top = true;
        op
    }

    /// `A(f) = Σ conj(f_j(k)) a_j(k)`.
    pub fn annihilation_op(&self, f: &Profile<R>) -> FockOperator<R> {
        f.iter().fold(FockOperator::new(), |acc, (j, p, c)| acc.add(&self.annihilator(*j, *p).scale(&c.conj())))
    }

    /// `A†(f) = Σ a†_j(k) f_j(k)`.
    pub fn creation_op(&self, f: &Profile<R>) -> FockOperator<R> {
        let mut op = f.iter().fold(FockOperator::new(), |acc, (j, p, c)| acc.add(&self.creator(*j, *p).scale(c)));
        op.truncated_top = true;
        op
    }

    /// Sign decorating `φ†` in the scalar product,
    /// `(−1)^{Σ_k ([i_1]+…+[i_k])[i_{k+1}]}`.
    pub fn conjugate_sign(&self, x: &[Slot]) -> i64 {
        let mut acc = 0u8;
        let mut run = 0u8;
        for s in x {
            acc ^= run & self.par(s.0);
            run ^= self.par(s.0);
        }
        if acc == 1 {
            -1
        } else {
            1
        }
    }

    /// Sign of `(e†_{i_1}⊗…⊗e†_{i_n})(e_{i_1}⊗…⊗e_{i_n})` in the graded
    /// tensor product.
    pub fn contraction_sign(&self, x: &[Slot]) -> i64 {
        let mut s = 0u8;
        for (a, xa) in x.iter().enumerate() {
            for xb in &x[a + 1..] {
                s ^= self.par(xa.0) & self.par(xb.0);
            }
        }
        if s == 1 {
            -1
        } else {
            1
        }
    }

    fn weight(&self, n: usize) -> R {
        match self.norm {
            Normalization::Unit => R::one(),
            Normalization::Factorial => R::from_int((1..=n as i64).product()).inv().expect("nonzero"),
        }
    }

    /// `⟨φ, ψ⟩` on sector `n`.
    pub fn inner(&self, n: usize, phi: &[R], psi: &[R]) -> R {
        let mut acc = R::zero();
        for (idx, (a, b)) in phi.iter().zip(psi).enumerate() {
            if a.is_negligible() || b.is_negligible() {
                continue;
            }
            let x = self.decode(n, idx);
            let s = self.conjugate_sign(&x) * self.contraction_sign(&x);
            acc = acc.add(&a.conj().mul(b).mul(&R::from_int(s)));
        }
        acc.mul(&self.weight(n))
    }

    /// `H⁽ʳ⁾ = Σ_k k^r Σ_j a†_j(k) a_j(k)`.
    pub fn hamiltonian(&self, power: u32) -> FockOperator<R> {
        let mut h = FockOperator::new();
        for p in 0..self.grid.len() {
            let kp = self.moms[p].clone();
            let w = (0..power).fold(R::one(), |a, _| a.mul(&kp));
            for j in 0..self.grading.k() {
                h = h.add(&self.creator(j, p).mul(&self.annihilator(j, p)).scale(&w));
            }
        }
        h.truncated_top = false;
        h
    }

    /// `Σ_i k_i^r` on each basis state of sector `n`.
    pub fn power_sums(&self, n: usize, power: u32) -> Vec<R> {
        (0..self.sector_dim(n))
            .map(|idx| {
                self.decode(n, idx).iter().fold(R::zero(), |acc, s| acc.add(&(0..power).fold(R::one(), |a, _| a.mul(&self.moms[s.1]))))
            })
            .collect()
    }

    fn domain(&self) -> String {
        format!("gl({}|{}), P={}, n_max={}", self.grading.m, self.grading.n, self.grid.len(), self.n_max)
    }

    /// Largest residual of `op·Π` over input sectors in `sectors`.
    pub fn residual_on(&self, op: &FockOperator<R>, sectors: impl IntoIterator<Item = usize>) -> (bool, f64) {
        let mut zero = true;
        let mut worst: f64 = 0.0;
        for n in sectors {
            for (_, b) in op.from_sector(n) {
                let r = b.mul(&self.projectors[n]);
                zero &= r.is_zero();
                worst = worst.max(r.max_norm());
            }
        }
        (zero, worst)
    }

    fn verdict(&self, id: &str, zero: bool, worst: f64, domain: &str) -> CheckReport {
        match R::KIND {
            RingKind::Exact => CheckReport::exact(id, zero, worst, domain),
            RingKind::Float => CheckReport::tolerance(id, worst, FLOAT_TOL, domain),
        }
    }

    fn sign(&self, j: usize, k: usize) -> R {
        if self.par(j) & self.par(k) == 1 {
            R::from_int(-1)
        } else {
            R::one()
        }
    }

    /// Component ZF relations for `k₁ ≠ k₂`, each on the sectors where both
    /// sides stay inside the truncation.
    pub fn check_zf(&self) -> Result<CheckReport> {
        let kk = self.grading.k();
        let np = self.grid.len();
        if np < 2 {
            return Err(Error::InvalidConfig(String::from("ZF check needs two distinct momenta")));
        }
        let ig = R::i().mul(&self.g);
        let a: Vec<Vec<FockOperator<R>>> = (0..kk).map(|j| (0..np).map(|p| self.annihilator(j, p)).collect()).collect();
        let ad: Vec<Vec<FockOperator<R>>> = (0..kk).map(|j| (0..np).map(|p| self.creator(j, p)).collect()).collect();
        let (mut z1, mut z2, mut z3) = (true, true, true);
        let (mut w1, mut w2, mut w3): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for j in 0..kk {
            for k in 0..kk {
                let s = self.sign(j, k);
                let pj = self.par(j);
                let pk = self.par(k);
                for p1 in 0..np {
                    for p2 in 0..np {
                        if p1 == p2 {
                            continue;
                        }
                        let d21 = self.moms[p2].sub(&self.moms[p1]).add(&ig);
                        let c = ig.neg().mul(&d21.inv().ok_or_else(|| Error::Pole(String::from("k2 - k1 + ig")))?);
                        let lhs = a[j][p1].supercommutator(&a[k][p2], pj, pk);
                        let rhs = a[j][p2].mul(&a[k][p1]).add(&a[k][p2].mul(&a[j][p1]).scale(&s)).scale(&c);
                        let (z, w) = self.residual_on(&lhs.sub(&rhs), 2..=self.n_max);
                        z1 &= z;
                        w1 = w1.max(w);
                        let lhs = ad[j][p1].supercommutator(&ad[k][p2], pj, pk);
                        let rhs = ad[j][p2].mul(&ad[k][p1]).add(&ad[k][p2].mul(&ad[j][p1]).scale(&s)).scale(&c);
                        let (z, w) = self.residual_on(&lhs.sub(&rhs), 0..=self.n_max.saturating_sub(2));
                        z2 &= z;
                        w2 = w2.max(w);
                        let d12 = self.moms[p1].sub(&self.moms[p2]).add(&ig);
                        let c3 = ig.neg().mul(&d12.inv().ok_or_else(|| Error::Pole(String::from("k1 - k2 + ig")))?);
                        let (z, w) = self.residual_on(&self.zf3_residual(&a, &ad, j, k, p1, p2, &c3), 0..self.n_max);
                        z3 &= z;
                        w3 = w3.max(w);
                    }
                }
            }
        }
        let zero = z1 && z2 && z3;
        let worst = w1.max(w2).max(w3);
        let dom = format!("{}; AA on n>=2, A+A+ on n<=n_max-2, AA+ on n<=n_max-1", self.domain());
        Ok(self
            .verdict("fock.zf", zero, worst, &dom)
            .with_param("aa_residual", w1)
            .with_param("adag_adag_residual", w2)
            .with_param("a_adag_residual", w3)
            .with_param("delta_measure", "kronecker, unit weight"))
    }

    #[allow(clippy::too_many_arguments)]
    fn zf3_residual(&self, a: &[Vec<FockOperator<R>>], ad: &[Vec<FockOperator<R>>], j: usize, k: usize, p1: usize, p2: usize, c3: &R) -> FockOperator<R> {
        let s = self.sign(j, k);
        let lhs = a[j][p1].supercommutator(&ad[k][p2], self.par(j), self.par(k));
        let mut inner = ad[k][p2].mul(&a[j][p1]).scale(&s);
        if j == k {
            for l in 0..self.grading.k() {
                inner = inner.add(&ad[l][p2].mul(&a[l][p1]));
            }
        }
        let mut rhs = inner.scale(c3);
        if j == k && p1 == p2 {
            let mut id = FockOperator::new();
            for n in 0..=self.n_max {
                id.insert(n, n, SparseOp::identity(self.sector_dim(n)));
            }
            rhs = rhs.add(&id);
        }
        lhs.sub(&rhs)
    }

    /// `[[a_j(k), a†_k(k)]]` at coincident momenta, where the Kronecker
    /// delta term must be present.
    pub fn check_zf_contact(&self) -> Result<CheckReport> {
        let kk = self.grading.k();
        let np = self.grid.len();
        let ig = R::i().mul(&self.g);
        let a: Vec<Vec<FockOperator<R>>> = (0..kk).map(|j| (0..np).map(|p| self.annihilator(j, p)).collect()).collect();
        let ad: Vec<Vec<FockOperator<R>>> = (0..kk).map(|j| (0..np).map(|p| self.creator(j, p)).collect()).collect();
        let c3 = if ig.is_zero() { R::zero() } else { R::from_int(-1) };
        let mut zero = true;
        let mut worst: f64 = 0.0;
        let mut without_delta: f64 = 0.0;
        for j in 0..kk {
            for k in 0..kk {
                for p in 0..np {
                    let r = self.zf3_residual(&a, &ad, j, k, p, p, &c3);
                    let (z, w) = self.residual_on(&r, 0..self.n_max);
                    zero &= z;
                    worst = worst.max(w);
                    if j == k {
                        let mut id = FockOperator::new();
                        for n in 0..=self.n_max {
                            id.insert(n, n, SparseOp::identity(self.sector_dim(n)));
                        }
                        let (_, w0) = self.residual_on(&r.add(&id), 0..self.n_max);
                        without_delta = without_delta.max(w0);
                    }
                }
            }
        }
        Ok(self.verdict("fock.zf_contact", zero, worst, &self.domain()).with_param("residual_without_delta", without_delta))
    }

    /// `Π² = Π` on every sector, and the momentum-ordered monomials
    /// `a†(k_{i_1})⋯a†(k_{i_n})Ω`, `k_{i_1} > … > k_{i_n}` (weakly when `g = 0`),
    /// span the image of `Π`.
    pub fn check_projector_and_pbw(&self) -> CheckReport {
        let mut zero = true;
        let mut worst: f64 = 0.0;
        let mut ranks = Vec::new();
        let mut pbw_ok = true;
        for n in 0..=self.n_max {
            let p = &self.projectors[n];
            let d = p.mul(p).sub(p);
            zero &= d.is_zero();
            worst = worst.max(d.max_norm());
            let img = p.rank();
            let mono = self.pbw_monomials(n);
            let rm = mono.rank();
            let joint = p.hcat(&mono).rank();
            pbw_ok &= rm == img && joint == img;
            ranks.push(format!("{n}:{img}"));
        }
        let pass_zero = zero && pbw_ok;
        let mut r = self.verdict("fock.projector_pbw", pass_zero, worst, &self.domain()).with_param("ranks", ranks.join(",")).with_param("pbw_spans", pbw_ok);
        if R::KIND == RingKind::Float {
            r.pass = r.pass && pbw_ok;
        }
        r
    }

    /// Columns `a†_{c_1}(k_1)⋯a†_{c_n}(k_n)Ω` over ordered momenta.
    pub fn pbw_monomials(&self, n: usize) -> SparseOp<R> {
        let np = self.grid.len();
        let kk = self.grading.k();
        let strict = !self.g.is_zero();
        let mut seqs: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for s in &seqs {
                for p in 0..np {
                    let ok = match s.last() {
                        None => true,
                        Some(&q) => p < q || (!strict && p == q),
                    };
                    if ok {
                        let mut t = s.clone();
                        t.push(p);
                        next.push(t);
                    }
                }
            }
            seqs = next;
        }
        let creators: Vec<Vec<FockOperator<R>>> = (0..kk).map(|j| (0..np).map(|p| self.creator(j, p)).collect()).collect();
        let mut cols = Vec::new();
        for s in seqs {
            for code in 0..kk.pow(n as u32) {
                let mut colors = Vec::with_capacity(n);
                let mut c = code;
                for _ in 0..n {
                    colors.push(c % kk);
                    c /= kk;
                }
                let mut v = vec![R::one()];
                for t in (0..n).rev() {
                    let op = creators[colors[t]][s[t]].block(n - t, n - t - 1).expect("within truncation");
                    v = op.apply(&v);
                }
                let mut col = BTreeMap::new();
                for (i, x) in v.into_iter().enumerate() {
                    if !x.is_negligible() {
                        col.insert(i, x);
                    }
                }
                cols.push(col);
            }
        }
        let dim = self.sector_dim(n);
        let ncols = cols.len();
        let mut op = SparseOp::from_columns(dim, cols);
        if ncols == 0 {
            op = SparseOp::zero(dim, 0);
        }
        op
    }

    /// `⟨φ, A(f)ψ⟩ = ⟨A†(f)φ, ψ⟩` on the given projected states.
    pub fn adjoint_residual(&self, f: &Profile<R>, n: usize, phi: &[R], psi: &[R]) -> f64 {
        let a = self.annihilation_op(f);
        let ad = self.creation_op(f);
        let aps = a.block(n, n + 1).expect("inside truncation").apply(psi);
        let adp = ad.block(n + 1, n).expect("inside truncation").apply(phi);
        self.inner(n, phi, &aps).sub(&self.inner(n + 1, &adp, psi)).magnitude()
    }

    /// `H⁽ʳ⁾` eigenvalue law `(H⁽ʳ⁾ − Σ k_i^r)Π = 0`, self-adjointness, and
    /// mutual commutativity for `r ≤ max_power`.
    pub fn check_hamiltonians(&self, max_power: u32) -> CheckReport {
        let hs: Vec<FockOperator<R>> = (0..=max_power).map(|r| self.hamiltonian(r)).collect();
        let mut zero = true;
        let mut worst: f64 = 0.0;
        for (r, h) in hs.iter().enumerate() {
            for n in 0..=self.n_max {
                let p = &self.projectors[n];
                let hb = h.block(n, n).cloned().unwrap_or_else(|| SparseOp::zero(self.sector_dim(n), self.sector_dim(n)));
                let e = SparseOp::diagonal(&self.power_sums(n, r as u32));
                let d = hb.mul(p).sub(&e.mul(p));
                zero &= d.is_zero();
                worst = worst.max(d.max_norm());
                let sa = p.mul(&hb.adjoint()).mul(p).sub(&p.mul(&hb).mul(p));
                zero &= sa.is_zero();
                worst = worst.max(sa.max_norm());
            }
        }
        for a in 0..hs.len() {
            for b in a + 1..hs.len() {
                let c = hs[a].mul(&hs[b]).sub(&hs[b].mul(&hs[a]));
                let (z, w) = self.residual_on(&c, 0..=self.n_max);
                zero &= z;
                worst = worst.max(w);
            }
        }
        self.verdict("fock.hamiltonians", zero, worst, &self.domain()).with_param("powers", format!("0..={max_power}"))
    }

    /// Apply a product of smeared operators (rightmost first) to `Ω`.
    pub fn act_on_vacuum(&self, ops: &[FockOperator<R>]) -> Option<(usize, Vec<R>)> {
        let mut n = 0;
        let mut v = vec![R::one()];
        for op in ops.iter().rev() {
            let (out, b) = op.from_sector(n).into_iter().next()?;
            v = b.apply(&v);
            n = out;
        }
        Some((n, v))
    }
}

/// `⟨g, f⟩ = Σ conj(g_j(k)) f_j(k)`.
pub fn profile_inner<R: Ring>(g: &Profile<R>, f: &Profile<R>) -> R {
    let mut acc = R::zero();
    for (cg, pg, vg) in g {
        for (cf, pf, vf) in f {
            if cg == cf && pg == pf {
                acc = acc.add(&vg.conj().mul(vf));
            }
        }
    }
    acc
}

/// Parity of a profile supported on one parity class.
pub fn profile_parity<R: Ring>(grading: Grading, f: &Profile<R>) -> Option<u8> {
    let mut ps = f.iter().map(|(c, _, _)| grading.parity(*c));
    let first = ps.next().unwrap_or(0);
    ps.all(|p| p == first).then_some(first)
}

/// Wick sum `Σ_σ ε(σ) Π ⟨g_{σ(i)}, f_i⟩`, with `ε(σ)` the Koszul sign of
/// reordering `g₁…g_n f₁…f_n` into `(g_{σ(1)} f₁)…(g_{σ(n)} f_n)`.
pub fn wick_sum<R: Ring>(grading: Grading, gs: &[Profile<R>], fs: &[Profile<R>]) -> Result<R> {
    if gs.len() != fs.len() {
        return Ok(R::zero());
    }
    let n = gs.len();
    let pg: Vec<u8> = gs.iter().map(|g| profile_parity(grading, g).ok_or(Error::NotHomogeneous)).collect::<Result<_>>()?;
    let pf: Vec<u8> = fs.iter().map(|f| profile_parity(grading, f).ok_or(Error::NotHomogeneous)).collect::<Result<_>>()?;
    let mut total = R::zero();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        // word positions: g_a at a, f_b at n + b; target order g_{σ(1)}, f_1, …
        let target: Vec<(usize, u8)> = (0..n).flat_map(|i| [(perm[i], pg[perm[i]]), (n + i, pf[i])]).collect();
        let mut sign = 0u8;
        for a in 0..target.len() {
            for b in a + 1..target.len() {
                if target[a].0 > target[b].0 {
                    sign ^= target[a].1 & target[b].1;
                }
            }
        }
        let mut term = (0..n).fold(R::one(), |acc, i| acc.mul(&profile_inner(&gs[perm[i]], &fs[i])));
        if sign == 1 {
            term = term.neg();
        }
        total = total.add(&term);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(total)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else { return false };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Order-`g⁰` fields: `Φ(g,t) = Σ conj(g_j(k)) e^{−ik²t} a_j(k)` and
/// `Φ†(f,t) = Σ a†_j(k) f_j(k) e^{ik²t}`; `phase[p] = e^{ik_p²t}`.
pub fn free_field<R: FockRing>(space: &FockSpace<R>, g: &Profile<R>, phase: &[R], dagger: bool) -> FockOperator<R> {
    let twisted: Profile<R> = g.iter().map(|(c, p, v)| (*c, *p, v.mul(&phase[*p]))).collect();
    if dagger {
        space.creation_op(&twisted)
    } else {
        space.annihilation_op(&twisted)
    }
}

/// `⟨Ω, Φ(g₁)…Φ(g_m) Φ†(f₁)…Φ†(f_n) Ω⟩` by operator action, against the
/// Wick sum. Requires a free (`g = 0`) space.
pub fn check_correlations<R: FockRing>(space: &FockSpace<R>, gs: &[Profile<R>], fs: &[Profile<R>], phase: &[R]) -> Result<CheckReport> {
    if !space.coupling().is_zero() {
        return Err(Error::InvalidConfig(String::from("order-g^0 correlators need a free space")));
    }
    if fs.len() > space.n_max() {
        return Err(Error::Budget(format!("{} creators exceed n_max = {}", fs.len(), space.n_max())));
    }
    let mut ops: Vec<FockOperator<R>> = gs.iter().map(|g| free_field(space, g, phase, false)).collect();
    ops.extend(fs.iter().map(|f| free_field(space, f, phase, true)));
    let value = match space.act_on_vacuum(&ops) {
        Some((0, v)) => v[0].clone(),
        _ => R::zero(),
    };
    let expected = wick_sum(space.grading(), gs, fs)?;
    let diff = value.sub(&expected);
    let dom = format!("gl({}|{}), m={}, n={}", space.grading().m, space.grading().n, gs.len(), fs.len());
    let r = match R::KIND {
        RingKind::Exact => CheckReport::exact("fock.correlator", diff.is_zero(), diff.magnitude(), &dom),
        RingKind::Float => CheckReport::tolerance("fock.correlator", diff.magnitude(), FLOAT_TOL, &dom),
    };
    Ok(r.with_param("value", format!("{value:?}")).with_param("order", "g^0"))
}

/// Float-only flow check `e^{iHt} a_j(k) e^{−iHt} = e^{−ik^r t} a_j(k)` for
/// `H = H⁽ʳ⁾` on projected sectors.
pub fn check_flow(space: &FockSpace<Complex64>, power: u32, t: f64) -> CheckReport {
    let phases = |n: usize, sgn: f64| -> SparseOp<Complex64> {
        let d: Vec<Complex64> = space.power_sums(n, power).iter().map(|e| Complex64::from_polar(1.0, sgn * e.re * t)).collect();
        SparseOp::diagonal(&d)
    };
    let mut worst: f64 = 0.0;
    for j in 0..space.grading().k() {
        for p in 0..space.grid().len() {
            let a = space.annihilator(j, p);
            let kr = libm::pow(space.momentum(p).re, power as f64);
            let ph = Complex64::from_polar(1.0, -kr * t);
            for n in 0..space.n_max() {
                let b = a.block(n, n + 1).expect("block");
                let pr = space.projector(n + 1);
                let lhs = phases(n, 1.0).mul(b).mul(&phases(n + 1, -1.0)).mul(pr);
                let rhs = b.mul(pr).scale(&ph);
                worst = worst.max(lhs.sub(&rhs).max_norm());
            }
        }
    }
    CheckReport::tolerance("fock.flow", worst, FLOAT_TOL, &format!("H^({power}), t={t}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::c64;

    fn space_f(m: usize, n: usize, n_max: usize) -> FockSpace<Complex64> {
        let grid = MomentumGrid::new(vec![Rational::new(-1, 2), Rational::new(1, 3), Rational::from_int(2)]).unwrap();
        FockSpace::build(Grading::new(m, n), grid, n_max, c64(0.4, 0.0), Normalization::Unit).unwrap()
    }

    fn space_x(m: usize, n: usize, n_max: usize) -> FockSpace<GaussQ> {
        let grid = MomentumGrid::from_ints(&[-1, 1, 2]).unwrap();
        FockSpace::build(Grading::new(m, n), grid, n_max, GaussQ::frac(2, 5), Normalization::Factorial).unwrap()
    }

    #[test]
    fn sector_dimensions() {
        let s = space_x(2, 1, 2);
        assert_eq!((0..=2).map(|n| s.sector_dim(n)).collect::<Vec<_>>(), [1, 9, 81]);
        let s0 = space_x(1, 0, 0);
        assert_eq!(s0.sector_dim(0), 1);
    }

    #[test]
    fn projector_idempotent_and_pbw_exact() {
        for (m, n) in [(1, 0), (1, 1), (2, 1)] {
            let r = space_x(m, n, 2).check_projector_and_pbw();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn unit_normalization_rejected_in_exact_ring() {
        let grid = MomentumGrid::from_ints(&[0, 1]).unwrap();
        assert!(FockSpace::build(Grading::new(1, 0), grid, 2, GaussQ::one(), Normalization::Unit).is_err());
    }

    #[test]
    fn dimension_cap() {
        let grid = MomentumGrid::from_ints(&[0, 1, 2]).unwrap();
        let r = FockSpace::build_capped(Grading::new(2, 1), grid, 3, c64(0.5, 0.0), Normalization::Unit, 100);
        assert!(matches!(r, Err(Error::Budget(_))));
    }

    #[test]
    fn zf_exact() {
        for (m, n) in [(1, 0), (1, 1), (2, 1), (1, 2)] {
            let r = space_x(m, n, 2).check_zf().unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn zf_float_three_particles() {
        let r = space_f(1, 1, 3).check_zf().unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn contact_term_present() {
        let r = space_x(1, 1, 2).check_zf_contact().unwrap();
        assert!(r.pass, "{r:?}");
        let without: f64 = r.params.iter().find(|(k, _)| k == "residual_without_delta").unwrap().1.parse().unwrap();
        assert!(without > 0.5);
    }

    #[test]
    fn free_limit_is_graded_ccr() {
        let grid = MomentumGrid::from_ints(&[0, 1]).unwrap();
        let s = FockSpace::build(Grading::new(1, 1), grid, 2, GaussQ::zero(), Normalization::Factorial).unwrap();
        assert!(s.check_zf().unwrap().pass);
        assert!(s.check_zf_contact().unwrap().pass);
    }

    #[test]
    fn single_mode_scalar_case() {
        let grid = MomentumGrid::from_ints(&[1]).unwrap();
        let s = FockSpace::build(Grading::new(1, 0), grid, 3, GaussQ::frac(1, 2), Normalization::Factorial).unwrap();
        // equal momenta: the two-particle sector is projected away
        assert_eq!(s.projector(2).rank(), 0);
        assert!(s.check_zf_contact().unwrap().pass);
    }

    #[test]
    fn creation_on_vacuum_is_basis_state() {
        let s = space_f(1, 1, 2);
        let f: Profile<Complex64> = vec![(0, 1, c64(1.0, 0.0))];
        let (n, v) = s.act_on_vacuum(&[s.creation_op(&f)]).unwrap();
        assert_eq!(n, 1);
        assert_eq!(v[s.encode(&[(0, 1)])], c64(1.0, 0.0));
        assert_eq!(v.iter().filter(|x| x.norm() > 0.0).count(), 1);
    }

    #[test]
    fn a_adag_on_vacuum_is_norm() {
        let s = space_f(1, 1, 2);
        let f: Profile<Complex64> = vec![(1, 2, c64(0.3, -0.7))];
        let (n, v) = s.act_on_vacuum(&[s.annihilation_op(&f), s.creation_op(&f)]).unwrap();
        assert_eq!(n, 0);
        assert!((v[0] - profile_inner(&f, &f)).norm() < 1e-14);
    }

    #[test]
    fn scalar_product_signs_cancel() {
        let s = space_x(1, 2, 2);
        for idx in 0..s.sector_dim(2) {
            let x = s.decode(2, idx);
            assert_eq!(s.conjugate_sign(&x) * s.contraction_sign(&x), 1);
        }
    }

    #[test]
    fn hamiltonians_exact() {
        let r = space_x(1, 1, 2).check_hamiltonians(3);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn two_particle_energy() {
        let s = space_x(1, 1, 2);
        let h = s.hamiltonian(2);
        let f1: Profile<GaussQ> = vec![(0, 0, GaussQ::one())];
        let f2: Profile<GaussQ> = vec![(1, 2, GaussQ::one())];
        let (n, v) = s.act_on_vacuum(&[s.creation_op(&f1), s.creation_op(&f2)]).unwrap();
        let hv = h.block(n, n).unwrap().apply(&v);
        let e = GaussQ::from_int(1 + 4);
        assert!(hv.iter().zip(&v).all(|(a, b)| a.sub(&b.mul(&e)).is_zero()));
    }

    #[test]
    fn flow_phase() {
        let grid = MomentumGrid::from_ints(&[-1, 2]).unwrap();
        let s = FockSpace::build(Grading::new(1, 1), grid, 2, c64(0.3, 0.0), Normalization::Unit).unwrap();
        assert!(check_flow(&s, 3, 1.0).pass);
    }

    #[test]
    fn correlators_match_wick() {
        let grid = MomentumGrid::from_ints(&[-1, 0, 2]).unwrap();
        let s = FockSpace::build(Grading::new(1, 1), grid, 2, GaussQ::zero(), Normalization::Factorial).unwrap();
        let ph = vec![GaussQ::one(); 3];
        let q = |c: usize, p: usize, a: i64, b: i64| (c, p, GaussQ::new(Rational::from_int(a), Rational::from_int(b)));
        let gs = vec![vec![q(1, 0, 1, 2), q(1, 2, -1, 0)], vec![q(0, 1, 2, 1)]];
        let fs = vec![vec![q(1, 0, 3, 0), q(1, 1, 1, 1)], vec![q(1, 2, 0, 1)]];
        assert!(check_correlations(&s, &gs, &fs, &ph).unwrap().pass);
        let gs2 = vec![gs[0].clone()];
        let r = check_correlations(&s, &gs2, &fs, &ph).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn adjointness_on_random_states() {
        use rand::{Rng, SeedableRng};
        let s = space_f(1, 2, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut rand_vec = |d: usize| -> Vec<Complex64> { (0..d).map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect() };
        let f: Profile<Complex64> = vec![(0, 0, c64(0.5, 0.1)), (2, 1, c64(-0.2, 0.9))];
        let phi = s.projector(1).apply(&rand_vec(s.sector_dim(1)));
        let psi = s.projector(2).apply(&rand_vec(s.sector_dim(2)));
        assert!(s.adjoint_residual(&f, 1, &phi, &psi) < 1e-12);
        let nrm = s.inner(2, &psi, &psi);
        assert!(nrm.im.abs() < 1e-14 && nrm.re > 0.0);
    }
}
