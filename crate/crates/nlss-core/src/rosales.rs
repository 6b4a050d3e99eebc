//! Order-by-order Rosales series for the graded NLS equation on discrete
//! momentum modes.
//!
//! Momentum integrals become unit-weight sums over a `ModeSet`. The field
//! amplitudes `λ_j(q)` live on one momentum set and the conjugate
//! amplitudes `λ†_j(p)` on a disjoint one, so every denominator
//! `Q_n(p,q,0) = Π (p_i − q_{i−1})(p_i − q_i)` is nonzero. The two families
//! are independent symbols; the residual cancellation is an algebraic
//! identity in them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grading::Grading;
use crate::grassmann::{make_gen, SuperScalar};
use crate::rational::{GaussQ, Rational};
use crate::report::CheckReport;
use crate::rmatrix::sample_rational;

type S = SuperScalar<GaussQ>;

pub const MAX_FERMION_MODES: usize = 6;

/// `Σ c · e^{i(ωx x + ωt t)}`.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct ExpPolynomial {
    terms: BTreeMap<(Rational, Rational), S>,
}

impl ExpPolynomial {
    pub fn zero() -> Self {
        ExpPolynomial { terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, wx: Rational, wt: Rational, c: S) {
        if c.is_zero() {
            return;
        }
        let key = (wx, wt);
        let remove = match self.terms.get_mut(&key) {
            Some(v) => {
                v.add_assign(&c);
                v.is_zero()
            }
            None => {
                self.terms.insert(key.clone(), c);
                false
            }
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Rational, Rational), &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((a, b), c) in &o.terms {
            out.add_term(a.clone(), b.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &GaussQ) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), c.scale(s));
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &o.terms {
                out.add_term(a1.add(a2), b1.add(b2), c1.mul(c2));
            }
        }
        out
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), c.scale(&GaussQ::new(Rational::zero(), a.clone())));
        }
        out
    }

    pub fn dt(&self) -> Self {
        let mut out = Self::zero();
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), c.scale(&GaussQ::new(Rational::zero(), b.clone())));
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.terms.values().map(|c| c.max_norm()).fold(0.0, f64::max)
    }

    /// Every coefficient has Grassmann parity `p`.
    pub fn has_parity(&self, p: u8) -> bool {
        self.terms.values().all(|c| c.parity() == Some(p))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    pub grading: Grading,
    /// Momenta carrying `λ_j`.
    pub q_momenta: Vec<Rational>,
    /// Momenta carrying `λ†_j`.
    pub p_momenta: Vec<Rational>,
    /// `lam[j][a]` = `λ_j(q_a)`.
    pub lam: Vec<Vec<S>>,
    /// `lamdag[j][b]` = `λ†_j(p_b)`.
    pub lamdag: Vec<Vec<S>>,
}

impl ModeSet {
    pub fn new(grading: Grading, q_momenta: Vec<Rational>, p_momenta: Vec<Rational>, lam: Vec<Vec<S>>, lamdag: Vec<Vec<S>>) -> Result<Self> {
        let k = grading.k();
        let mut all: Vec<&Rational> = q_momenta.iter().chain(&p_momenta).collect();
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("mode momenta must be pairwise distinct".into()));
        }
        if lam.len() != k || lamdag.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: lam.len().min(lamdag.len()) });
        }
        for j in 0..k {
            if lam[j].len() != q_momenta.len() || lamdag[j].len() != p_momenta.len() {
                return Err(Error::LengthMismatch { expected: q_momenta.len(), got: lam[j].len() });
            }
            let p = grading.parity(j);
            if lam[j].iter().chain(&lamdag[j]).any(|a| !a.is_zero() && a.parity() != Some(p)) {
                return Err(Error::InvalidConfig(format!("amplitude of color {j} has wrong parity")));
            }
        }
        let fermion_modes = grading.n * (q_momenta.len() + p_momenta.len());
        if fermion_modes > MAX_FERMION_MODES {
            return Err(Error::Budget(format!("{fermion_modes} fermionic modes > {MAX_FERMION_MODES}")));
        }
        Ok(ModeSet { grading, q_momenta, p_momenta, lam, lamdag })
    }

    /// Seeded random mode set. Each amplitude is a random Gaussian rational
    /// times its own generator: odd (paired with its conjugate) for
    /// fermionic colors, and for bosonic colors an even formal symbol when
    /// `formal_bosons` is set, nothing otherwise.
    pub fn random(grading: Grading, nq: usize, np: usize, formal_bosons: bool, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut momenta: Vec<Rational> = Vec::new();
        while momenta.len() < nq + np {
            let r = sample_rational(&mut rng, 40, 7);
            if !momenta.contains(&r) {
                momenta.push(r);
            }
        }
        let p_momenta = momenta.split_off(nq);
        let q_momenta = momenta;
        let k = grading.k();
        let coeff = |rng: &mut ChaCha8Rng| loop {
            let c = GaussQ::new(sample_rational(rng, 5, 3), sample_rational(rng, 5, 3));
            if !c.is_zero() {
                break c;
            }
        };
        let modes = nq + np;
        let mut lam = vec![Vec::new(); k];
        let mut lamdag = vec![Vec::new(); k];
        for j in 0..k {
            let odd = grading.is_odd(j);
            for a in 0..modes {
                let idx = (j * modes + a) as u32;
                let c = coeff(&mut rng);
                let g = make_gen(idx, odd, a >= nq);
                let amp = if odd || formal_bosons { S::term(&[g], c) } else { S::scalar(c) };
                if a < nq {
                    lam[j].push(amp);
                } else {
                    lamdag[j].push(amp);
                }
            }
        }
        ModeSet::new(grading, q_momenta, p_momenta, lam, lamdag)
    }
}

fn tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * base);
        for t in &out {
            for b in 0..base {
                let mut u = t.clone();
                u.push(b);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

fn q_denominator(p: &[Rational], q: &[Rational]) -> Result<Rational> {
    let mut d = Rational::one();
    for i in 1..=p.len() {
        for f in [p[i - 1].sub(&q[i - 1]), p[i - 1].sub(&q[i])] {
            if f.is_zero() {
                return Err(Error::ZeroDenominator(format!("p={p:?} q={q:?}")));
            }
            d = d.mul(&f);
        }
    }
    Ok(d)
}

/// `(ωx, ωt)` of `Ω_n = Σ(q x − q² t) − Σ(p x − p² t)`.
fn omega(p: &[Rational], q: &[Rational]) -> (Rational, Rational) {
    let mut wx = Rational::zero();
    let mut wt = Rational::zero();
    for v in q {
        wx = wx.add(v);
        wt = wt.sub(&v.mul(v));
    }
    for v in p {
        wx = wx.sub(v);
        wt = wt.add(&v.mul(v));
    }
    (wx, wt)
}

/// `φ_j^{(n)}`: sum over `p ∈ P^n`, `q ∈ Q^{n+1}`, colors `k ∈ [K]^n` of
/// `λ†_{k1}(p1)…λ†_{kn}(pn) λ_{kn}(qn)…λ_{k1}(q1) λ_j(q0) e^{iΩn}/Qn`.
pub fn build_phi_order(n: usize, j: usize, modes: &ModeSet) -> Result<ExpPolynomial> {
    let k = modes.grading.k();
    let mut out = ExpPolynomial::zero();
    let ps = tuples(modes.p_momenta.len(), n);
    let qs = tuples(modes.q_momenta.len(), n + 1);
    let ks = tuples(k, n);
    for pi in &ps {
        let p: Vec<Rational> = pi.iter().map(|a| modes.p_momenta[*a].clone()).collect();
        for qi in &qs {
            let q: Vec<Rational> = qi.iter().map(|a| modes.q_momenta[*a].clone()).collect();
            let den = q_denominator(&p, &q)?;
            let (wx, wt) = omega(&p, &q);
            let w = GaussQ::real(den.inv().expect("checked nonzero"));
            let mut acc = S::zero();
            for kk in &ks {
                let mut c = S::scalar(w.clone());
                for i in 0..n {
                    c = c.mul(&modes.lamdag[kk[i]][pi[i]]);
                }
                for i in (0..n).rev() {
                    c = c.mul(&modes.lam[kk[i]][qi[i + 1]]);
                }
                c = c.mul(&modes.lam[j][qi[0]]);
                acc.add_assign(&c);
            }
            out.add_term(wx, wt, acc);
        }
    }
    Ok(out)
}

/// `φ†_j^{(n)}`, the conjugate series: `λ†_j(q0)λ†_{k1}(q1)…λ†_{kn}(qn)
/// λ_{kn}(pn)…λ_{k1}(p1) e^{−iΩn}/Qn` with `q` over the `λ†` momenta and
/// `p` over the `λ` momenta.
pub fn build_phidag_order(n: usize, j: usize, modes: &ModeSet) -> Result<ExpPolynomial> {
    let k = modes.grading.k();
    let mut out = ExpPolynomial::zero();
    let ps = tuples(modes.q_momenta.len(), n);
    let qs = tuples(modes.p_momenta.len(), n + 1);
    let ks = tuples(k, n);
    for pi in &ps {
        let p: Vec<Rational> = pi.iter().map(|a| modes.q_momenta[*a].clone()).collect();
        for qi in &qs {
            let q: Vec<Rational> = qi.iter().map(|a| modes.p_momenta[*a].clone()).collect();
            let den = q_denominator(&p, &q)?;
            let (wx, wt) = omega(&p, &q);
            let w = GaussQ::real(den.inv().expect("checked nonzero"));
            let mut acc = S::zero();
            for kk in &ks {
                let mut c = S::scalar(w.clone()).mul(&modes.lamdag[j][qi[0]]);
                for i in 0..n {
                    c = c.mul(&modes.lamdag[kk[i]][qi[i + 1]]);
                }
                for i in (0..n).rev() {
                    c = c.mul(&modes.lam[kk[i]][pi[i]]);
                }
                acc.add_assign(&c);
            }
            out.add_term(wx.neg(), wt.neg(), acc);
        }
    }
    Ok(out)
}

/// All orders `0..=n_max` of `φ_j` and `φ†_j` for every color.
#[derive(Clone, Debug)]
pub struct SeriesTable {
    modes: ModeSet,
    pub phi: Vec<Vec<ExpPolynomial>>,
    pub phidag: Vec<Vec<ExpPolynomial>>,
}

impl SeriesTable {
    pub fn build(modes: &ModeSet, n_max: usize) -> Result<Self> {
        let k = modes.grading.k();
        let mut phi = Vec::new();
        let mut phidag = Vec::new();
        for n in 0..=n_max {
            phi.push((0..k).map(|j| build_phi_order(n, j, modes)).collect::<Result<Vec<_>>>()?);
            phidag.push((0..k).map(|j| build_phidag_order(n, j, modes)).collect::<Result<Vec<_>>>()?);
        }
        Ok(SeriesTable { modes: modes.clone(), phi, phidag })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }
}

/// Coefficient of `g^n` in `iφ_t + φ_xx − 2g(φ†_k φ_k)φ_j` with
/// `φ = Σ (−g)^m φ^{(m)}`.
pub fn nlss_residual_order(n: usize, j: usize, table: &SeriesTable, modes: &ModeSet) -> Result<ExpPolynomial> {
    if table.modes() != modes {
        return Err(Error::MismatchedModes);
    }
    if n >= table.phi.len() {
        return Err(Error::LengthMismatch { expected: n + 1, got: table.phi.len() });
    }
    let k = modes.grading.k();
    let sign = if n % 2 == 0 { GaussQ::one() } else { GaussQ::from_int(-1) };
    let lin = table.phi[n][j].dt().scale(&GaussQ::i()).add(&table.phi[n][j].dx().dx());
    let mut out = lin.scale(&sign);
    if n >= 1 {
        // −2 · (−1)^{n−1} Σ_{a+b+c=n−1} φ†_k^{(a)} φ_k^{(b)} φ_j^{(c)}
        let mut cubic = ExpPolynomial::zero();
        for a in 0..n {
            for b in 0..n - a {
                let c = n - 1 - a - b;
                for kk in 0..k {
                    cubic = cubic.add(&table.phidag[a][kk].mul(&table.phi[b][kk]).mul(&table.phi[c][j]));
                }
            }
        }
        let w = if (n - 1) % 2 == 0 { -2 } else { 2 };
        out = out.add(&cubic.scale(&GaussQ::from_int(w)));
    }
    Ok(out)
}

/// Residuals at every order `0..=n_max` and color, for several mode sets.
pub fn check_rosales(grading: Grading, n_max: usize, mode_sets: usize, seed: u64) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut all_zero = true;
    let mut parity_ok = true;
    for s in 0..mode_sets {
        // alternate between numeric and formal bosonic amplitudes
        let modes = ModeSet::random(grading, 2, 2, s % 2 == 1, seed.wrapping_add(s as u64))?;
        let table = SeriesTable::build(&modes, n_max)?;
        for n in 0..=n_max {
            for j in 0..grading.k() {
                let r = nlss_residual_order(n, j, &table, &modes)?;
                all_zero &= r.is_zero();
                worst = worst.max(r.max_norm());
                let p = grading.parity(j);
                parity_ok &= table.phi[n][j].has_parity(p) && table.phidag[n][j].has_parity(p);
            }
        }
    }
    Ok(CheckReport::exact("rosales.residual", all_zero && parity_ok, worst, &format!("orders 0..={n_max}"))
        .with_param("m", grading.m)
        .with_param("n", grading.n)
        .with_param("mode_sets", mode_sets)
        .with_param("grading_consistent", parity_ok))
}

/// `Σq_j² − Σp_i² − (Σq_j − Σp_i)²`.
pub fn quadratic_lhs(p: &[Rational], q: &[Rational]) -> Rational {
    let sq = |v: &[Rational]| v.iter().fold(Rational::zero(), |a, x| a.add(&x.mul(x)));
    let sum = |v: &[Rational]| v.iter().fold(Rational::zero(), |a, x| a.add(x));
    let d = sum(q).sub(&sum(p));
    sq(q).sub(&sq(p)).sub(&d.mul(&d))
}

/// `−2 Σ_{c=c0}^{n−1} Σ_{a=c0}^{c} (p_{a+1} − q_a)(p_{c+1} − q_{c+1})` with
/// `p` indexed from 1 and `q` from 0. `c0 = 1` is the printed range;
/// `c0 = 0` is the range under which the identity holds.
pub fn quadratic_rhs(p: &[Rational], q: &[Rational], c0: usize) -> Rational {
    let n = p.len();
    let pp = |i: usize| &p[i - 1];
    let mut acc = Rational::zero();
    for c in c0..n {
        for a in c0..=c {
            acc = acc.add(&pp(a + 1).sub(&q[a]).mul(&pp(c + 1).sub(&q[c + 1])));
        }
    }
    acc.mul(&Rational::from_int(-2))
}

/// Probes the quadratic identity behind the residual cancellation. The
/// report passes when the identity holds with both sums starting at 0;
/// the discrepancy of the literal reading (sums from 1) is attached.
pub fn check_quadratic_identity(n: usize, p: &[Rational], q: &[Rational]) -> Result<CheckReport> {
    if p.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: p.len() });
    }
    if q.len() != n + 1 {
        return Err(Error::LengthMismatch { expected: n + 1, got: q.len() });
    }
    let lhs = quadratic_lhs(p, q);
    let working = lhs.sub(&quadratic_rhs(p, q, 0));
    let literal = lhs.sub(&quadratic_rhs(p, q, 1));
    Ok(CheckReport::exact("rosales.quadratic_identity", working.is_zero(), working.to_f64().abs(), &format!("n={n}"))
        .with_param("convention", "c,a from 0")
        .with_param("lhs", &lhs)
        .with_param("literal_discrepancy", &literal))
}

/// Quadratic identity over seeded random tuples for `n = 0..=n_max`.
pub fn probe_quadratic_identity(n_max: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::new();
    let mut literal_fails = 0usize;
    for n in 0..=n_max {
        for _ in 0..samples {
            let p: Vec<Rational> = (0..n).map(|_| sample_rational(&mut rng, 50, 9)).collect();
            let q: Vec<Rational> = (0..=n).map(|_| sample_rational(&mut rng, 50, 9)).collect();
            let r = check_quadratic_identity(n, &p, &q)?;
            if r.params.iter().any(|(k, v)| k == "literal_discrepancy" && v != "0") {
                literal_fails += 1;
            }
            parts.push(r);
        }
    }
    Ok(CheckReport::combine("rosales.quadratic_identity", &format!("n=0..={n_max}"), &parts)
        .with_param("convention", "c,a from 0")
        .with_param("literal_reading_failures", literal_fails)
        .with_param("samples", parts.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{gen_conj, Gen};

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn order_zero_is_free_wave() {
        let g = Grading::new(1, 0);
        let m = ModeSet::random(g, 2, 2, false, 3).unwrap();
        let phi0 = build_phi_order(0, 0, &m).unwrap();
        assert_eq!(phi0.len(), 2);
        for (i, q) in m.q_momenta.iter().enumerate() {
            let mut e = ExpPolynomial::zero();
            e.add_term(q.clone(), q.mul(q).neg(), m.lam[0][i].clone());
            assert!(phi0.terms().any(|(k, c)| k == e.terms().next().unwrap().0 && c == &m.lam[0][i]));
        }
    }

    #[test]
    fn order_one_scalar_hand_expansion() {
        // one p-mode, two q-modes, scalar NLS
        let g = Grading::new(1, 0);
        let (p, q0, q1) = (r(2, 1), r(0, 1), r(1, 1));
        let lam = vec![vec![S::scalar(GaussQ::from_int(3)), S::scalar(GaussQ::from_int(5))]];
        let lamdag = vec![vec![S::scalar(GaussQ::from_int(7))]];
        let m = ModeSet::new(g, vec![q0.clone(), q1.clone()], vec![p.clone()], lam, lamdag).unwrap();
        let phi1 = build_phi_order(1, 0, &m).unwrap();
        // hand expansion: Σ_{qa,qb} 7·λ(qa)·λ(qb) e^{iΩ}/((p−qb)(p−qa))
        let mut expect = ExpPolynomial::zero();
        let qs = [(q0.clone(), 3i64), (q1.clone(), 5)];
        for (qb, lb) in &qs {
            for (qa, la) in &qs {
                let den = p.sub(qb).mul(&p.sub(qa));
                let c = Rational::from_int(7 * la * lb).div(&den).unwrap();
                let wx = qa.add(qb).sub(&p);
                let wt = p.mul(&p).sub(&qa.mul(qa)).sub(&qb.mul(qb));
                expect.add_term(wx, wt, S::scalar(GaussQ::real(c)));
            }
        }
        assert_eq!(phi1, expect);
    }

    #[test]
    fn order_one_fermionic_coefficient_is_cubic_monomial() {
        // two fermionic colors so that λ†_1 λ_1 λ_0 survives
        let g = Grading::new(0, 2);
        let m = ModeSet::random(g, 2, 1, false, 11).unwrap();
        let phi1 = build_phi_order(1, 0, &m).unwrap();
        assert!(phi1.has_parity(1));
        for (_, c) in phi1.terms() {
            for (mono, _) in c.terms() {
                assert_eq!(mono.len(), 3);
            }
        }
        let (p, qa, qb) = (&m.p_momenta[0], &m.q_momenta[0], &m.q_momenta[1]);
        let (wx, wt) = omega(&[p.clone()], &[qa.clone(), qb.clone()]);
        let den = q_denominator(&[p.clone()], &[qa.clone(), qb.clone()]).unwrap();
        // same-color terms cancel between (qa,qb) and (qb,qa); cross-color
        // terms keep the written order λ†_1(p) λ_1(q1) λ_0(q0)
        let expect = m.lamdag[1][0]
            .mul(&m.lam[1][1])
            .mul(&m.lam[0][0])
            .add(&m.lamdag[1][0].mul(&m.lam[1][0]).mul(&m.lam[0][1]))
            .scale(&GaussQ::real(den.inv().unwrap()));
        let coef = phi1.terms().find(|(k, _)| k.0 == wx && k.1 == wt).map(|(_, c)| c.clone()).unwrap();
        assert_eq!(coef, expect);
    }

    #[test]
    fn residuals_vanish_through_order_three() {
        for (mm, nn) in [(1, 0), (1, 1), (2, 1)] {
            let g = Grading::new(mm, nn);
            let modes = ModeSet::random(g, 2, 2, true, 5).unwrap();
            let t = SeriesTable::build(&modes, 3).unwrap();
            for n in 0..=3 {
                for j in 0..g.k() {
                    let res = nlss_residual_order(n, j, &t, &modes).unwrap();
                    assert!(res.is_zero(), "M={mm} N={nn} n={n} j={j} |res|={}", res.max_norm());
                }
            }
        }
    }

    #[test]
    fn mismatched_modes_rejected() {
        let g = Grading::new(1, 0);
        let a = ModeSet::random(g, 2, 2, false, 1).unwrap();
        let b = ModeSet::random(g, 2, 2, false, 2).unwrap();
        let t = SeriesTable::build(&a, 1).unwrap();
        assert_eq!(nlss_residual_order(1, 0, &t, &b).unwrap_err(), Error::MismatchedModes);
    }

    #[test]
    fn coinciding_momenta_rejected() {
        let g = Grading::new(1, 0);
        let one = vec![vec![S::one()]];
        assert!(ModeSet::new(g, vec![r(1, 2)], vec![r(1, 2)], one.clone(), one).is_err());
    }

    #[test]
    fn fermion_budget_enforced() {
        assert!(matches!(ModeSet::random(Grading::new(0, 2), 2, 2, false, 0), Err(Error::Budget(_))));
    }

    #[test]
    fn swapping_fermion_generators_flips_shared_terms() {
        // relabel the two λ generators of the fermionic color; monomials
        // holding both flip sign, others are only relabeled
        let g = Grading::new(1, 1);
        let m = ModeSet::random(g, 2, 1, false, 21).unwrap();
        let ga: Gen = m.lam[1][0].generators()[0];
        let gb: Gen = m.lam[1][1].generators()[0];
        let mut swapped = m.clone();
        swapped.lam[1][0] = m.lam[1][0].substitute(|x| (x == ga).then(|| S::gen(gb)));
        swapped.lam[1][1] = m.lam[1][1].substitute(|x| (x == gb).then(|| S::gen(ga)));
        let phi = build_phi_order(1, 1, &m).unwrap();
        let phis = build_phi_order(1, 1, &swapped).unwrap();
        let relabel = |x: Gen| -> Option<S> {
            if x == ga {
                Some(S::gen(gb))
            } else if x == gb {
                Some(S::gen(ga))
            } else {
                None
            }
        };
        let _ = gen_conj(ga);
        for ((k, c), (k2, c2)) in phi.terms().zip(phis.terms()) {
            assert_eq!(k, k2);
            for (mono, v) in c.terms() {
                let both = mono.contains(&ga) && mono.contains(&gb);
                let mapped: Vec<Gen> = mono.iter().map(|x| if *x == ga { gb } else if *x == gb { ga } else { *x }).collect();
                let (sorted, neg) = crate::grassmann::sort_word(&mapped).unwrap();
                assert_eq!(neg, both, "sign oracle");
                let expect = if neg { v.neg() } else { v.clone() };
                assert_eq!(c2.coeff(&sorted), expect);
            }
            assert_eq!(c.substitute(relabel), c2.clone());
        }
    }

    #[test]
    fn quadratic_identity_conventions() {
        // n=0: both sides vanish
        assert!(check_quadratic_identity(0, &[], &[r(3, 1)]).unwrap().pass);
        // n=1, p=(2), q=(0,1): LHS = −2(p1−q0)(p1−q1) = −4; printed range gives 0
        let rep = check_quadratic_identity(1, &[r(2, 1)], &[r(0, 1), r(1, 1)]).unwrap();
        assert!(rep.pass);
        assert!(rep.params.contains(&("lhs".into(), "-4".into())));
        assert!(rep.params.contains(&("literal_discrepancy".into(), "-4".into())));
        assert!(probe_quadratic_identity(4, 20, 9).unwrap().pass);
        assert!(check_quadratic_identity(2, &[r(1, 1)], &[r(1, 1)]).is_err());
    }
}
