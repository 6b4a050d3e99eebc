//! Lattice fields, the graded Poisson bracket and the conserved charges.
//!
//! Fields live on sites `x_a = a·Δ`. Integrals become `Δ Σ_a`, the bracket
//! delta becomes `δ_ab/Δ`, derivatives use the skew-adjoint stencil
//! `(Dφ)(a) = (φ(a+1) − φ(a−1)) / 2Δ` with zero outside the grid, and
//! `sg(0) = 0`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grading::Grading;
use crate::grassmann::{gen_conj, gen_index, gen_is_odd, make_gen, Gen, SuperScalar};
use crate::matrix::SuperMatrix;
use crate::rational::{GaussQ, Rational};
use crate::report::CheckReport;
use crate::ring::Ring;

/// Formal generator standing for `φ_j(x_a)` (or its conjugate).
pub fn field_gen(grading: Grading, site: usize, color: usize, dag: bool) -> Gen {
    make_gen((site * grading.k() + color) as u32, grading.is_odd(color), dag)
}

/// Inverse of `field_gen`: `(site, color, dag)`.
pub fn decode_field_gen(grading: Grading, g: Gen) -> (usize, usize, bool) {
    let idx = gen_index(g) as usize;
    (idx / grading.k(), idx % grading.k(), g & 1 == 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldConfiguration<R: Ring> {
    grading: Grading,
    spacing: R,
    margin: usize,
    phi: Vec<Vec<SuperScalar<R>>>,
    phidag: Vec<Vec<SuperScalar<R>>>,
}

impl<R: Ring> FieldConfiguration<R> {
    /// Every interior site carries the formal generators `φ_j(x_a)`,
    /// `φ†_j(x_a)`; the margin sites are zero.
    pub fn formal(grading: Grading, sites: usize, margin: usize, spacing: R) -> Result<Self> {
        if 2 * margin >= sites {
            return Err(Error::InvalidConfig(format!("{sites} sites cannot hold a margin of {margin}")));
        }
        let k = grading.k();
        let mut phi = vec![vec![SuperScalar::zero(); k]; sites];
        let mut phidag = phi.clone();
        for a in margin..sites - margin {
            for j in 0..k {
                phi[a][j] = SuperScalar::gen(field_gen(grading, a, j, false));
                phidag[a][j] = SuperScalar::gen(field_gen(grading, a, j, true));
            }
        }
        Ok(FieldConfiguration { grading, spacing, margin, phi, phidag })
    }

    /// Builds a configuration from site values; conjugates follow from
    /// `SuperScalar::conj`. Fermionic colors must be odd, bosonic even, and
    /// margin sites zero.
    pub fn from_values(grading: Grading, spacing: R, margin: usize, phi: Vec<Vec<SuperScalar<R>>>) -> Result<Self> {
        let sites = phi.len();
        if 2 * margin >= sites {
            return Err(Error::InvalidConfig(format!("{sites} sites cannot hold a margin of {margin}")));
        }
        for (a, row) in phi.iter().enumerate() {
            if row.len() != grading.k() {
                return Err(Error::LengthMismatch { expected: grading.k(), got: row.len() });
            }
            for (j, v) in row.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                if (a < margin || a >= sites - margin) && !v.is_zero() {
                    return Err(Error::InvalidConfig(format!("site {a} lies in the margin but is nonzero")));
                }
                if v.parity() != Some(grading.parity(j)) {
                    return Err(Error::InvalidConfig(format!("color {j} at site {a} has the wrong parity")));
                }
            }
        }
        let phidag = phi.iter().map(|row| row.iter().map(|v| v.conj()).collect()).collect();
        Ok(FieldConfiguration { grading, spacing, margin, phi, phidag })
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn spacing(&self) -> &R {
        &self.spacing
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn sites(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self, site: usize, color: usize) -> &SuperScalar<R> {
        &self.phi[site][color]
    }

    pub fn phidag(&self, site: usize, color: usize) -> &SuperScalar<R> {
        &self.phidag[site][color]
    }

    /// Value standing in for a formal field generator.
    pub fn value_of(&self, g: Gen) -> Option<SuperScalar<R>> {
        let (a, j, dag) = decode_field_gen(self.grading, g);
        if a >= self.sites() {
            return None;
        }
        Some(if dag { self.phidag[a][j].clone() } else { self.phi[a][j].clone() })
    }

    /// Evaluates a functional over the formal generators at this
    /// configuration.
    pub fn evaluate(&self, f: &SuperScalar<R>) -> SuperScalar<R> {
        f.substitute(|g| self.value_of(g))
    }

    pub fn require_margin(&self, needed: usize) -> Result<()> {
        if self.margin < needed {
            return Err(Error::SupportMargin { needed, got: self.margin });
        }
        Ok(())
    }

    fn diff(&self, f: &[Vec<SuperScalar<R>>]) -> Vec<Vec<SuperScalar<R>>> {
        let n = f.len();
        let half = R::from_frac(1, 2).mul(&self.spacing.inv().expect("nonzero spacing"));
        let zero = vec![SuperScalar::zero(); self.grading.k()];
        (0..n)
            .map(|a| {
                let next = if a + 1 < n { &f[a + 1] } else { &zero };
                let prev = if a > 0 { &f[a - 1] } else { &zero };
                next.iter().zip(prev).map(|(u, v)| u.sub(v).scale(&half)).collect()
            })
            .collect()
    }
}

/// `Σ_jk l_j m_jk r_k`, or `Σ_j l_j r_j` without a matrix.
fn contract<R: Ring>(l: &[SuperScalar<R>], m: Option<&SuperMatrix<R>>, r: &[SuperScalar<R>]) -> SuperScalar<R> {
    let mut acc = SuperScalar::zero();
    match m {
        None => {
            for (a, b) in l.iter().zip(r) {
                if !a.is_zero() && !b.is_zero() {
                    acc.add_assign(&a.mul(b));
                }
            }
        }
        Some(m) => {
            for (j, a) in l.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (k, b) in r.iter().enumerate() {
                    let c = m.get(j, k);
                    if c.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc.add_assign(&a.mul(c).mul(b));
                }
            }
        }
    }
    acc
}

/// `table[x][y] = Σ l(x) m r(y)`.
fn table<R: Ring>(l: &[Vec<SuperScalar<R>>], m: Option<&SuperMatrix<R>>, r: &[Vec<SuperScalar<R>>]) -> Vec<Vec<SuperScalar<R>>> {
    l.iter().map(|lx| r.iter().map(|ry| contract(lx, m, ry)).collect()).collect()
}

fn sg(a: usize, b: usize) -> i64 {
    (a as i64 - b as i64).signum()
}

/// `S(x,y,t) = sg(t−x)sg(x−y) + sg(x−y)sg(y−t) + sg(y−t)sg(t−x)`.
pub fn s_weight(x: usize, y: usize, t: usize) -> i64 {
    sg(t, x) * sg(x, y) + sg(x, y) * sg(y, t) + sg(y, t) * sg(t, x)
}

/// The K×K matrix `E_ab` over the base grading.
pub fn basis_matrix<R: Ring>(grading: Grading, a: usize, b: usize) -> SuperMatrix<R> {
    SuperMatrix::unit(grading.base(), a, b, SuperScalar::one())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Charge<R: Ring> {
    N,
    P,
    H,
    Q { sigma: SuperMatrix<R>, order: u8 },
}

impl<R: Ring> Charge<R> {
    fn stencil_radius(&self) -> usize {
        match self {
            Charge::N => 0,
            Charge::P | Charge::H => 1,
            Charge::Q { order, .. } => *order as usize,
        }
    }
}

pub fn build_charge<R: Ring>(kind: &Charge<R>, f: &FieldConfiguration<R>, g: &R) -> Result<SuperScalar<R>> {
    f.require_margin(kind.stencil_radius())?;
    let dx = f.spacing.clone();
    let n = f.sites();
    let mut acc = SuperScalar::zero();
    match kind {
        Charge::N => {
            for a in 0..n {
                acc.add_assign(&contract(&f.phidag[a], None, &f.phi[a]));
            }
        }
        Charge::P => {
            let dphi = f.diff(&f.phi);
            for a in 0..n {
                acc.add_assign(&contract(&f.phidag[a], None, &dphi[a]));
            }
        }
        Charge::H => {
            let dphi = f.diff(&f.phi);
            let dphidag = f.diff(&f.phidag);
            let mut quartic = SuperScalar::zero();
            for a in 0..n {
                acc.add_assign(&contract(&dphidag[a], None, &dphi[a]));
                for j in 0..f.grading.k() {
                    for k in 0..f.grading.k() {
                        let t = f.phidag[a][j].mul(&f.phidag[a][k]).mul(&f.phi[a][k]).mul(&f.phi[a][j]);
                        quartic.add_assign(&t);
                    }
                }
            }
            acc.add_assign(&quartic.scale(g));
        }
        Charge::Q { sigma, order } => {
            if sigma.grading() != f.grading.base() {
                return Err(Error::InvalidConfig("σ must be a K×K matrix over the field grading".into()));
            }
            acc = build_q(sigma, *order, f, g)?;
            return Ok(acc);
        }
    }
    Ok(acc.scale(&dx))
}

fn build_q<R: Ring>(sigma: &SuperMatrix<R>, order: u8, f: &FieldConfiguration<R>, g: &R) -> Result<SuperScalar<R>> {
    let dx = f.spacing.clone();
    let dx2 = dx.mul(&dx);
    let n = f.sites();
    let half_g = g.mul(&R::from_frac(1, 2));
    match order {
        0 => {
            let mut acc = SuperScalar::zero();
            for a in 0..n {
                acc.add_assign(&contract(&f.phidag[a], Some(sigma), &f.phi[a]));
            }
            Ok(acc.scale(&dx))
        }
        1 => {
            let dphi = f.diff(&f.phi);
            let mut local = SuperScalar::zero();
            for a in 0..n {
                local.add_assign(&contract(&f.phidag[a], Some(sigma), &dphi[a]));
            }
            let b = table(&f.phidag, Some(sigma), &f.phi);
            let a_t = table(&f.phidag, None, &f.phi);
            let mut nonlocal = SuperScalar::zero();
            for x in 0..n {
                for y in 0..n {
                    let s = sg(x, y);
                    if s == 0 || b[x][y].is_zero() || a_t[y][x].is_zero() {
                        continue;
                    }
                    let t = b[x][y].mul(&a_t[y][x]);
                    if s > 0 {
                        nonlocal.add_assign(&t);
                    } else {
                        nonlocal = nonlocal.sub(&t);
                    }
                }
            }
            Ok(local.scale(&dx).sub(&nonlocal.scale(&half_g.mul(&dx2))))
        }
        2 => {
            let dphi = f.diff(&f.phi);
            let ddphi = f.diff(&dphi);
            let dphidag = f.diff(&f.phidag);
            let mut local = SuperScalar::zero();
            for a in 0..n {
                local.add_assign(&contract(&f.phidag[a], Some(sigma), &ddphi[a]));
            }
            let a_t = table(&f.phidag, None, &f.phi);
            let b = table(&f.phidag, Some(sigma), &f.phi);
            let b_r = table(&f.phidag, Some(sigma), &dphi);
            let b_l = table(&dphidag, Some(sigma), &f.phi);
            let mut two = SuperScalar::zero();
            for x in 0..n {
                for y in 0..n {
                    let s = sg(x, y);
                    if s == 0 || a_t[y][x].is_zero() {
                        continue;
                    }
                    let t = b_r[x][y].sub(&b_l[x][y]).mul(&a_t[y][x]);
                    two = if s > 0 { two.add(&t) } else { two.sub(&t) };
                }
            }
            let mut three = SuperScalar::zero();
            for x in 0..n {
                for y in 0..n {
                    let sxy = sg(x, y);
                    if sxy == 0 || a_t[y][x].is_zero() {
                        continue;
                    }
                    for z in 0..n {
                        let w = sxy * sg(y, z);
                        if w == 0 || b[x][z].is_zero() || a_t[z][y].is_zero() {
                            continue;
                        }
                        let t = a_t[y][x].mul(&b[x][z]).mul(&a_t[z][y]);
                        three = if w > 0 { three.add(&t) } else { three.sub(&t) };
                    }
                }
            }
            let quarter_g2 = g.mul(g).mul(&R::from_frac(1, 4));
            Ok(local
                .scale(&dx)
                .sub(&two.scale(&half_g.mul(&dx2)))
                .add(&three.scale(&quarter_g2.mul(&dx2).mul(&dx))))
        }
        _ => Err(Error::InvalidConfig(format!("charge order {order} is not built"))),
    }
}

/// The triple-integral term of the `{Q¹_σ, Q¹_ω}` relation,
/// `−i (g/2)² ∫ S(x,y,t) (Φ†(x)σΦ(y)·Φ†(y)ωΦ(t) − (σ↔ω)) Φ†(t)Φ(x)`.
pub fn q1q1_extra<R: Ring>(sigma: &SuperMatrix<R>, omega: &SuperMatrix<R>, f: &FieldConfiguration<R>, g: &R) -> Result<SuperScalar<R>> {
    let n = f.sites();
    let a_t = table(&f.phidag, None, &f.phi);
    let bs = table(&f.phidag, Some(sigma), &f.phi);
    let bo = table(&f.phidag, Some(omega), &f.phi);
    let mut acc = SuperScalar::zero();
    for x in 0..n {
        for t in 0..n {
            if a_t[t][x].is_zero() {
                continue;
            }
            let mut inner = SuperScalar::zero();
            for y in 0..n {
                let w = s_weight(x, y, t);
                if w == 0 {
                    continue;
                }
                let mut u = bs[x][y].mul(&bo[y][t]);
                u = u.sub(&bo[x][y].mul(&bs[y][t]));
                if !u.is_zero() {
                    inner.add_assign(&u.scale(&R::from_int(w)));
                }
            }
            if !inner.is_zero() {
                acc.add_assign(&inner.mul(&a_t[t][x]));
            }
        }
    }
    let dx = f.spacing.clone();
    let c = R::i().neg().mul(g).mul(g).mul(&R::from_frac(1, 4)).mul(&dx).mul(&dx).mul(&dx);
    Ok(acc.scale(&c))
}

/// `{F, G} = (i/Δ) Σ (−1)^{[F][ℓ]} ((−1)^{[ℓ]} ∂F/∂φ ∂G/∂φ† − ∂F/∂φ† ∂G/∂φ)`,
/// summed over every generator pair `(φ, φ†)` occurring in `F` and `G`.
pub fn poisson_bracket<R: Ring>(f: &SuperScalar<R>, g: &SuperScalar<R>, spacing: &R) -> Result<SuperScalar<R>> {
    let pf = f.parity().ok_or(Error::NotHomogeneous)?;
    g.parity().ok_or(Error::NotHomogeneous)?;
    Ok(bracket_from_gradients(pf, &f.gradient(), &g.gradient(), spacing))
}

fn bracket_from_gradients<R: Ring>(
    pf: u8,
    gf: &BTreeMap<Gen, SuperScalar<R>>,
    gg: &BTreeMap<Gen, SuperScalar<R>>,
    spacing: &R,
) -> SuperScalar<R> {
    let mut acc = SuperScalar::zero();
    for (&x, dfx) in gf {
        let Some(dgx) = gg.get(&gen_conj(x)) else { continue };
        let odd = gen_is_odd(x);
        let mut neg = pf == 1 && odd;
        if x & 1 == 0 {
            neg ^= odd;
        } else {
            neg = !neg;
        }
        let t = dfx.mul(dgx);
        acc = if neg { acc.sub(&t) } else { acc.add(&t) };
    }
    acc.scale(&R::i().mul(&spacing.inv().expect("nonzero spacing")))
}

/// Hamiltonian vector field of an even functional: `x ↦ {F, x}` for every
/// field generator `x` of the formal configuration.
pub fn vector_field<R: Ring>(f: &SuperScalar<R>, formal: &FieldConfiguration<R>) -> Result<BTreeMap<Gen, SuperScalar<R>>> {
    if f.parity() != Some(0) {
        return Err(Error::NotEven);
    }
    let gf = f.gradient();
    let mut out = BTreeMap::new();
    for a in 0..formal.sites() {
        for j in 0..formal.grading.k() {
            for dag in [false, true] {
                let x = field_gen(formal.grading, a, j, dag);
                let mut gx = BTreeMap::new();
                gx.insert(x, SuperScalar::one());
                let v = bracket_from_gradients(0, &gf, &gx, &formal.spacing);
                if !v.is_zero() {
                    out.insert(x, v);
                }
            }
        }
    }
    Ok(out)
}

const EPS_A: u32 = 0x3fff_fff0;
const EPS_B: u32 = 0x3fff_fff1;

/// `{F, G}` evaluated at `point`, for even `F` given symbolically over the
/// formal generators of `formal` and `G` given as a builder. The even
/// derivation `{F, ·}` is applied by shifting every field value by
/// `ε·{F, φ}(point)` with `ε = η₁η₂` nilpotent, and reading off the
/// ε-linear part of `G`.
pub fn bracket_at(
    f: &SuperScalar<Complex64>,
    formal: &FieldConfiguration<Complex64>,
    point: &FieldConfiguration<Complex64>,
    build_g: impl Fn(&FieldConfiguration<Complex64>) -> Result<SuperScalar<Complex64>>,
) -> Result<SuperScalar<Complex64>> {
    let vf = vector_field(f, formal)?;
    let ea = make_gen(EPS_A, true, false);
    let eb = make_gen(EPS_B, true, false);
    let eps = SuperScalar::term(&[ea, eb], Complex64::new(1.0, 0.0));
    let mut shifted = point.clone();
    for (x, v) in &vf {
        let (a, j, dag) = decode_field_gen(point.grading, *x);
        let dv = eps.mul(&point.evaluate(v));
        if dag {
            shifted.phidag[a][j] = shifted.phidag[a][j].add(&dv);
        } else {
            shifted.phi[a][j] = shifted.phi[a][j].add(&dv);
        }
    }
    let gv = build_g(&shifted)?;
    let mut out = SuperScalar::zero();
    for (m, c) in gv.terms() {
        let n = m.len();
        if n >= 2 && m[n - 2] == ea && m[n - 1] == eb {
            out.add_term(m[..n - 2].iter().copied().collect(), *c);
        }
    }
    Ok(out)
}

/// Odd Grassmann generator carried by fermionic color `j` in numeric
/// profiles.
pub fn profile_gen(j: usize) -> Gen {
    make_gen(0x2000_0000 + j as u32, true, false)
}

/// Smooth test profile on `[−half_width, half_width]` with `margin` zero
/// sites on either side:
/// `φ_j(x) = amp_j · e^{−(x−c_j)²} · e^{i k_j x}`, times `θ_j` for
/// fermionic colors.
pub fn gaussian_configuration(
    grading: Grading,
    spacing: f64,
    half_width: f64,
    margin: usize,
    amps: &[Complex64],
) -> Result<FieldConfiguration<Complex64>> {
    gaussian_profile(grading, spacing, half_width, 1.0, margin, amps)
}

/// As [`gaussian_configuration`] with envelope `e^{−((x−c_j)/width)²}`.
pub fn gaussian_profile(
    grading: Grading,
    spacing: f64,
    half_width: f64,
    width: f64,
    margin: usize,
    amps: &[Complex64],
) -> Result<FieldConfiguration<Complex64>> {
    if amps.len() != grading.k() {
        return Err(Error::LengthMismatch { expected: grading.k(), got: amps.len() });
    }
    let interior = libm::round(2.0 * half_width / spacing) as usize + 1;
    let sites = interior + 2 * margin;
    let mut phi = vec![vec![SuperScalar::zero(); grading.k()]; sites];
    for (i, row) in phi.iter_mut().enumerate().skip(margin).take(interior) {
        let x = -half_width + (i - margin) as f64 * spacing;
        for (j, v) in row.iter_mut().enumerate() {
            let c = 0.3 * j as f64 - 0.2;
            let k = 0.5 + 0.25 * j as f64;
            let env = libm::exp(-(x - c) * (x - c) / (width * width));
            let val = amps[j] * Complex64::new(env * libm::cos(k * x), env * libm::sin(k * x));
            *v = if grading.is_odd(j) {
                SuperScalar::term(&[profile_gen(j)], val)
            } else {
                SuperScalar::scalar(val)
            };
        }
    }
    FieldConfiguration::from_values(grading, Complex64::new(spacing, 0.0), margin, phi)
}

fn to_float(m: &SuperMatrix<GaussQ>) -> SuperMatrix<Complex64> {
    m.map(|e| e.map_coeffs(|c| c.to_c64()))
}

/// Exact part of the charge algebra on a formal grid:
/// `{Q⁰_σ, Qⁿ_ω} = i Qⁿ_{[[σ,ω]]}` for `n ≤ max_order` over the given
/// pairs.
pub fn check_q0_closure(
    grading: Grading,
    sites: usize,
    spacing: &Rational,
    g: &Rational,
    pairs: &[(SuperMatrix<GaussQ>, SuperMatrix<GaussQ>)],
    max_order: u8,
) -> Result<CheckReport> {
    let dx = GaussQ::real(spacing.clone());
    let gg = GaussQ::real(g.clone());
    let f = FieldConfiguration::formal(grading, sites, 2, dx.clone())?;
    let mut worst = 0.0f64;
    let mut zero = true;
    for (sigma, omega) in pairs {
        sigma.parity().ok_or(Error::NotHomogeneous)?;
        omega.parity().ok_or(Error::NotHomogeneous)?;
        let comm = sigma.supercommutator(omega)?;
        let q0 = build_charge(&Charge::Q { sigma: sigma.clone(), order: 0 }, &f, &gg)?;
        for n in 0..=max_order {
            let qn = build_charge(&Charge::Q { sigma: omega.clone(), order: n }, &f, &gg)?;
            let rhs = build_charge(&Charge::Q { sigma: comm.clone(), order: n }, &f, &gg)?;
            let res = poisson_bracket(&q0, &qn, &dx)?.sub(&rhs.scale(&GaussQ::i()));
            zero &= res.is_zero();
            worst = worst.max(res.max_norm());
        }
    }
    Ok(CheckReport::exact("classical.q0_closure", zero, worst, &format!("gl({}|{})", grading.m, grading.n))
        .with_param("pairs", pairs.len())
        .with_param("max_order", max_order)
        .with_param("sites", sites))
}

/// `{Q⁰_σ, Q⁰_σ} = 2iN` and `{Q⁰_σ, Q¹_σ} = 2iP` for odd `σ` with `σ² = I`.
pub fn check_supersymmetry(grading: Grading, sites: usize, sigma: &SuperMatrix<GaussQ>, g: &Rational) -> Result<CheckReport> {
    if sigma.parity() != Some(1) || sigma.mul(sigma) != SuperMatrix::identity(grading.base()) {
        return Err(Error::InvalidConfig("σ must be odd with σ² = I".into()));
    }
    let dx = GaussQ::frac(1, 2);
    let gg = GaussQ::real(g.clone());
    let f = FieldConfiguration::formal(grading, sites, 2, dx.clone())?;
    let q0 = build_charge(&Charge::Q { sigma: sigma.clone(), order: 0 }, &f, &gg)?;
    let q1 = build_charge(&Charge::Q { sigma: sigma.clone(), order: 1 }, &f, &gg)?;
    let two_i = GaussQ::new(Rational::zero(), Rational::from_int(2));
    let n = build_charge(&Charge::N, &f, &gg)?.scale(&two_i);
    let p = build_charge(&Charge::P, &f, &gg)?.scale(&two_i);
    let r0 = poisson_bracket(&q0, &q0, &dx)?.sub(&n);
    let r1 = poisson_bracket(&q0, &q1, &dx)?.sub(&p);
    let worst = r0.max_norm().max(r1.max_norm());
    Ok(CheckReport::exact("classical.supersymmetry", r0.is_zero() && r1.is_zero(), worst, &format!("gl({}|{})", grading.m, grading.n)))
}

/// Which continuum identity a refinement study measures.
#[derive(Clone, Debug)]
pub enum Conservation {
    /// `{H, Qⁿ_σ} = 0`.
    HQ { sigma: SuperMatrix<GaussQ>, order: u8 },
    /// `{Q¹_σ, Q¹_ω} − i Q²_{[[σ,ω]]} − extra(σ, ω) = 0`.
    Q1Q1 { sigma: SuperMatrix<GaussQ>, omega: SuperMatrix<GaussQ> },
}

/// Residual of a continuum identity on the Gaussian profile at one spacing.
pub fn conservation_residual(which: &Conservation, grading: Grading, spacing: f64, g: f64, amps: &[Complex64]) -> Result<f64> {
    let margin = 3;
    let point = gaussian_configuration(grading, spacing, 4.0, margin, amps)?;
    let dx = Complex64::new(spacing, 0.0);
    let gc = Complex64::new(g, 0.0);
    let formal = FieldConfiguration::formal(grading, point.sites(), margin, dx)?;
    let res = match which {
        Conservation::HQ { sigma, order } => {
            let h = build_charge(&Charge::H, &formal, &gc)?;
            let q = Charge::Q { sigma: to_float(sigma), order: *order };
            bracket_at(&h, &formal, &point, |c| build_charge(&q, c, &gc))?
        }
        Conservation::Q1Q1 { sigma, omega } => {
            if sigma.parity() != Some(0) || omega.parity() != Some(0) {
                return Err(Error::NotEven);
            }
            let (s, o) = (to_float(sigma), to_float(omega));
            let comm = s.supercommutator(&o)?;
            let q1s = build_charge(&Charge::Q { sigma: s.clone(), order: 1 }, &formal, &gc)?;
            let lhs = bracket_at(&q1s, &formal, &point, |c| build_charge(&Charge::Q { sigma: o.clone(), order: 1 }, c, &gc))?;
            let q2 = build_charge(&Charge::Q { sigma: comm, order: 2 }, &point, &gc)?;
            let extra = q1q1_extra(&s, &o, &point, &gc)?;
            lhs.sub(&q2.scale(&Complex64::new(0.0, 1.0))).sub(&extra)
        }
    };
    Ok(res.max_norm())
}

/// Refinement study: residuals at `spacing / 2^k`, `k < levels`.
pub fn check_conservation(
    id: &str,
    which: &Conservation,
    grading: Grading,
    spacing: f64,
    levels: usize,
    g: f64,
    amps: &[Complex64],
) -> Result<CheckReport> {
    let mut residuals = Vec::with_capacity(levels);
    let mut h = spacing;
    for _ in 0..levels {
        residuals.push(conservation_residual(which, grading, h, g, amps)?);
        h /= 2.0;
    }
    Ok(CheckReport::convergence(id, &residuals, 1.0, &format!("gl({}|{})", grading.m, grading.n))
        .with_param("spacing", spacing)
        .with_param("g", g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::c64;

    type S = SuperScalar<GaussQ>;

    fn q(p: i64, r: i64) -> GaussQ {
        GaussQ::frac(p, r)
    }

    #[test]
    fn canonical_bracket() {
        let g = Grading::new(1, 1);
        let dx = q(1, 3);
        for j in 0..2 {
            for a in 0..3 {
                let phi = S::gen(field_gen(g, a, j, false));
                for k in 0..2 {
                    for b in 0..3 {
                        let phid = S::gen(field_gen(g, b, k, true));
                        let pb = poisson_bracket(&phi, &phid, &dx).unwrap();
                        let expect = if j == k && a == b { S::scalar(GaussQ::new(Rational::zero(), Rational::from_int(3))) } else { S::zero() };
                        assert_eq!(pb, expect, "j={j} a={a} k={k} b={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn single_site_number() {
        let g = Grading::new(1, 0);
        let c = GaussQ::frac(2, 3).add(&GaussQ::i());
        let f = FieldConfiguration::from_values(g, q(1, 5), 1, vec![vec![S::zero()], vec![S::scalar(c.clone())], vec![S::zero()]]).unwrap();
        let n = build_charge(&Charge::N, &f, &GaussQ::one()).unwrap();
        assert_eq!(n, S::scalar(c.mul(&c.conj()).mul(&q(1, 5))));
    }

    #[test]
    fn identity_charges() {
        let g = Grading::new(1, 1);
        let f = FieldConfiguration::formal(g, 6, 2, q(1, 2)).unwrap();
        let gg = q(3, 7);
        let id = SuperMatrix::identity(g);
        assert_eq!(build_charge(&Charge::Q { sigma: id.clone(), order: 0 }, &f, &gg).unwrap(), build_charge(&Charge::N, &f, &gg).unwrap());
        assert_eq!(build_charge(&Charge::Q { sigma: id, order: 1 }, &f, &gg).unwrap(), build_charge(&Charge::P, &f, &gg).unwrap());
    }

    #[test]
    fn free_hamiltonian() {
        let g = Grading::new(1, 1);
        let f = FieldConfiguration::formal(g, 5, 1, q(1, 2)).unwrap();
        let h = build_charge(&Charge::H, &f, &GaussQ::zero()).unwrap();
        // −Δ Σ φ† D²φ equals Δ Σ (Dφ†)(Dφ) by summation by parts
        let dd = f.diff(&f.diff(&f.phi));
        let mut alt = S::zero();
        for a in 0..5 {
            alt = alt.add(&contract(&f.phidag[a], None, &dd[a]));
        }
        assert_eq!(h, alt.scale(&q(-1, 2)));
    }

    #[test]
    fn margin_enforced() {
        let g = Grading::new(1, 0);
        let f = FieldConfiguration::formal(g, 6, 1, q(1, 2)).unwrap();
        let sigma = basis_matrix(g, 0, 0);
        assert_eq!(
            build_charge(&Charge::Q { sigma, order: 2 }, &f, &GaussQ::one()),
            Err(Error::SupportMargin { needed: 2, got: 1 })
        );
    }

    #[test]
    fn number_and_momentum_commute() {
        let g = Grading::new(1, 1);
        let f = FieldConfiguration::formal(g, 6, 2, q(1, 2)).unwrap();
        let n = build_charge(&Charge::N, &f, &GaussQ::one()).unwrap();
        let p = build_charge(&Charge::P, &f, &GaussQ::one()).unwrap();
        assert!(poisson_bracket(&n, &p, &q(1, 2)).unwrap().is_zero());
    }

    #[test]
    fn supersymmetry_gl11() {
        let g = Grading::new(1, 1);
        let sigma = basis_matrix(g, 0, 1).add(&basis_matrix(g, 1, 0));
        let r = check_supersymmetry(g, 6, &sigma, &Rational::new(1, 2)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn q0_closure_all_basis_pairs_gl11() {
        let g = Grading::new(1, 1);
        let mut pairs = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        pairs.push((basis_matrix(g, a, b), basis_matrix(g, c, d)));
                    }
                }
            }
        }
        let r = check_q0_closure(g, 6, &Rational::new(1, 2), &Rational::new(2, 3), &pairs, 2).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn conservation_of_q0_is_exact() {
        let g = Grading::new(1, 1);
        let which = Conservation::HQ { sigma: basis_matrix(g, 0, 0), order: 0 };
        let r = conservation_residual(&which, g, 0.5, 0.3, &[c64(0.4, 0.0), c64(0.5, 0.1)]).unwrap();
        assert!(r < 1e-13, "{r}");
    }

    #[test]
    fn vector_field_of_number_rotates_phase() {
        let g = Grading::new(1, 1);
        let f = FieldConfiguration::formal(g, 4, 1, q(1, 2)).unwrap();
        let n = build_charge(&Charge::N, &f, &GaussQ::one()).unwrap();
        let vf = vector_field(&n, &f).unwrap();
        for a in 1..3 {
            for j in 0..2 {
                let x = field_gen(g, a, j, false);
                let expect = S::gen(x).scale(&GaussQ::i().neg());
                assert_eq!(vf[&x], expect);
            }
        }
    }

    use proptest::prelude::*;

    fn arb_functional(g: Grading, sites: usize, parity: u8) -> impl Strategy<Value = S> {
        // sums of monomials of degree ≤ 4 in the formal generators of a
        // `sites`-site grid, filtered to the requested parity
        let ngen = sites * g.k() * 2;
        prop::collection::vec((prop::collection::vec(0..ngen, 1..5), -3i64..4, -3i64..4), 1..5).prop_map(move |ts| {
            let mut acc = S::zero();
            for (ids, re, im) in ts {
                let gens: Vec<Gen> = ids.iter().map(|i| field_gen(g, i / (2 * g.k()), (i / 2) % g.k(), i % 2 == 1)).collect();
                let t = S::term(&gens, GaussQ::new(Rational::from_int(re), Rational::from_int(im)));
                acc = acc.add(&t);
            }
            let (even, odd) = acc.split_parity();
            if parity == 0 { even } else { odd }
        })
    }

    fn pb(a: &S, b: &S) -> S {
        poisson_bracket(a, b, &q(1, 2)).unwrap()
    }

    fn sign(p: u8) -> GaussQ {
        if p % 2 == 1 { GaussQ::from_int(-1) } else { GaussQ::one() }
    }

    fn arb_triple(g: Grading) -> impl Strategy<Value = ((u8, S), (u8, S), (u8, S))> {
        let one = move || (0u8..2).prop_flat_map(move |p| (Just(p), arb_functional(g, 2, p)));
        (one(), one(), one())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bracket_antisymmetry(((pf, f), (pg, h), _) in arb_triple(Grading::new(1, 1))) {
            let lhs = pb(&f, &h);
            let rhs = pb(&h, &f).scale(&sign(pf * pg)).neg();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn bracket_leibniz_and_jacobi(((pf, f), (pa, a), (_, b)) in arb_triple(Grading::new(1, 1))) {
            // {F, AB} = {F, A}B + (−1)^{[F][A]} A{F, B}
            let lhs = pb(&f, &a.mul(&b));
            let rhs = pb(&f, &a).mul(&b).add(&a.mul(&pb(&f, &b)).scale(&sign(pf * pa)));
            prop_assert_eq!(lhs, rhs);
            // {F,{A,B}} = {{F,A},B} + (−1)^{[F][A]} {A,{F,B}}
            let j1 = pb(&f, &pb(&a, &b));
            let j2 = pb(&pb(&f, &a), &b).add(&pb(&a, &pb(&f, &b)).scale(&sign(pf * pa)));
            prop_assert_eq!(j1, j2);
        }

        #[test]
        fn bracket_bilinear(((_, f), (pa, a), _) in arb_triple(Grading::new(2, 1)), b in (0u8..2).prop_flat_map(|p| arb_functional(Grading::new(2, 1), 2, p)), c in -5i64..6) {
            let b = if b.parity() == Some(pa) { b } else { S::zero() };
            let lhs = pb(&f, &a.add(&b.scale(&GaussQ::from_int(c))));
            prop_assert_eq!(lhs, pb(&f, &a).add(&pb(&f, &b).scale(&GaussQ::from_int(c))));
        }
    }
}
