//! Classical Lax matrix, transition and monodromy matrices, and the
//! hierarchy read off from `D(λ) = T_{K+1,K+1}(λ)`.
//!
//! Site `a` of a configuration sits at `x_a = a·Δ`. Between sites the
//! fields are interpolated by the local six-point Lagrange polynomial.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::classical::{poisson_bracket, FieldConfiguration};
use crate::error::{Error, Result};
use crate::grading::Grading;
use crate::grassmann::{Mono, SuperScalar};
use crate::matrix::SuperMatrix;
use crate::rational::Rational;
use crate::ratfn::RatFn;
use crate::report::CheckReport;
use crate::ring::Ring;
use crate::rmatrix::r_classical;
use crate::tensor::GradedTensor;

type C = Complex64;
type SC = SuperScalar<C>;
type MC = SuperMatrix<C>;

pub const VAR_LAMBDA: usize = 0;
pub const VAR_MU: usize = 1;
pub const VAR_SQRT_G: usize = 2;

/// Highest series order the nested quadrature will build.
pub const MAX_SERIES_ORDER: usize = 8;

/// `L(λ) = (iλ/2)Σ + Ω` with `Ω = i√g Σ_j (φ_j E_{j,K+1} − φ†_j E_{K+1,j})`
/// read as an ordinary matrix of Grassmann entries `m_ij`. Stored
/// coefficient-left that is `(−1)^{[i]+[i][j]} m_ij E_ij`, which flips the
/// fermionic `(j, K+1)` entries.
pub fn lax_matrix<R: Ring>(lambda: &R, sqrt_g: &R, grading: Grading, phi: &[SuperScalar<R>], phidag: &[SuperScalar<R>]) -> SuperMatrix<R> {
    let e = grading.extend();
    let last = e.last();
    let half = R::i().mul(lambda).mul(&R::from_frac(1, 2));
    let is = R::i().mul(sqrt_g);
    SuperMatrix::from_fn(e, |i, j| {
        if i == j {
            SuperScalar::scalar(if i == last { half.neg() } else { half.clone() })
        } else if j == last {
            phi[i].scale(&is.mul(&R::from_int(grading.sign(i))))
        } else if i == last {
            phidag[j].scale(&is.neg())
        } else {
            SuperScalar::zero()
        }
    })
}

/// `Ω` alone.
pub fn omega<R: Ring>(sqrt_g: &R, grading: Grading, phi: &[SuperScalar<R>], phidag: &[SuperScalar<R>]) -> SuperMatrix<R> {
    lax_matrix(&R::zero(), sqrt_g, grading, phi, phidag)
}

/// `E(λ;x) = exp(ixλΣ/2)`.
pub fn e_matrix(lambda: f64, x: f64, grading: Grading) -> MC {
    let e = grading.extend();
    let ph = C::new(0.0, lambda * x / 2.0).exp();
    SuperMatrix::from_fn(e, |i, j| {
        if i != j {
            SC::zero()
        } else if i == e.last() {
            SC::scalar(ph.inv())
        } else {
            SC::scalar(ph)
        }
    })
}

/// Global bracket `{F₁, G₂} = Σ (−1)^{[α][β]} {F_α, G_β} E_α ⊗ E_β` for
/// `α = (i,j)`, `β = (k,l)`. The sign is what moving `E_α` past `G_β` costs
/// with coefficients stored on the left, and keeps the bracket a
/// derivation of `F₁G₂`.
pub fn global_bracket<R: Ring>(f: &SuperMatrix<R>, g: &SuperMatrix<R>, spacing: &R) -> Result<GradedTensor<R>> {
    let e = f.grading();
    let mut out = GradedTensor::zero(&[e, e]);
    for i in 0..e.dim() {
        for j in 0..e.dim() {
            let fij = f.get(i, j);
            if fij.is_zero() {
                continue;
            }
            for k in 0..e.dim() {
                for l in 0..e.dim() {
                    let gkl = g.get(k, l);
                    if gkl.is_zero() {
                        continue;
                    }
                    let mut pb = poisson_bracket(fij, gkl, spacing)?;
                    if (e.parity(i) + e.parity(j)) % 2 == 1 && (e.parity(k) + e.parity(l)) % 2 == 1 {
                        pb = pb.neg();
                    }
                    if !pb.is_zero() {
                        out = out.add(&GradedTensor::basis(&[e, e], &[(i, j), (k, l)], pb));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Residual of `{L₁(λ;x_a), L₂(μ;x_b)} = c (δ_ab/Δ) [r(λ−μ), L₁ + L₂]`
/// over all site pairs, with formal `λ`, `μ`, `√g` and formal fields.
/// Returns `(exactly zero, largest coefficient)`.
pub fn lax_bracket_residual(grading: Grading, sites: usize, spacing: &Rational, c: &RatFn) -> Result<(bool, f64)> {
    let lam = RatFn::var(VAR_LAMBDA);
    let mu = RatFn::var(VAR_MU);
    let s = RatFn::var(VAR_SQRT_G);
    let dx = RatFn::from_rational(spacing);
    let f = FieldConfiguration::formal(grading, sites, 0, dx.clone())?;
    let e = grading.extend();
    let r = r_classical(&lam.sub(&mu), &s.mul(&s), grading)?;
    let k = grading.k();
    let row = |a: usize| -> (Vec<SuperScalar<RatFn>>, Vec<SuperScalar<RatFn>>) {
        ((0..k).map(|j| f.phi(a, j).clone()).collect(), (0..k).map(|j| f.phidag(a, j).clone()).collect())
    };
    let scale = c.mul(&dx.inv().ok_or_else(|| Error::InvalidConfig("zero spacing".into()))?);
    let mut zero = true;
    let mut worst = 0.0f64;
    for a in 0..sites {
        let (pa, da) = row(a);
        let la = lax_matrix(&lam, &s, grading, &pa, &da);
        for b in 0..sites {
            let (pb, db) = row(b);
            let lb = lax_matrix(&mu, &s, grading, &pb, &db);
            let lhs = global_bracket(&la, &lb, &dx)?;
            let rhs = if a == b {
                let sum = GradedTensor::embed(&la, 0, &[e, e]).add(&GradedTensor::embed(&lb, 1, &[e, e]));
                r.mul(&sum).sub(&sum.mul(&r)).scale(&scale)
            } else {
                GradedTensor::zero(&[e, e])
            };
            let res = lhs.sub(&rhs);
            zero &= res.is_zero();
            worst = worst.max(res.max_norm());
        }
    }
    Ok((zero, worst))
}

/// Ultralocal identity `{L₁, L₂} = −(δ_ab/Δ)[r, L₁ + L₂]`. With the
/// canonical bracket `{φ, φ†} = i` this is the prefactor that holds; the
/// residual for prefactor `i` is attached as `residual_prefactor_i`.
pub fn check_lax_bracket(grading: Grading, sites: usize, spacing: &Rational) -> Result<CheckReport> {
    let (zero, worst) = lax_bracket_residual(grading, sites, spacing, &RatFn::from_int(-1))?;
    let (_, alt) = lax_bracket_residual(grading, sites, spacing, &RatFn::i())?;
    Ok(CheckReport::exact("classical.lax_bracket", zero, worst, &format!("gl({}+1|{})", grading.m, grading.n))
        .with_param("sites", sites)
        .with_param("prefactor", "-1")
        .with_param("residual_prefactor_i", alt))
}

/// Field values at fractional site position `u` (in units of Δ) from the
/// six-point Lagrange stencil around it. Outside the grid the fields are
/// zero.
fn interpolate(f: &FieldConfiguration<C>, u: f64) -> (Vec<SC>, Vec<SC>) {
    let k = f.grading().k();
    let n = f.sites() as i64;
    let base = libm::floor(u) as i64;
    let mut phi = vec![SC::zero(); k];
    let mut phidag = vec![SC::zero(); k];
    if (u - libm::round(u)).abs() < 1e-12 {
        let a = libm::round(u) as i64;
        if (0..n).contains(&a) {
            for j in 0..k {
                phi[j] = f.phi(a as usize, j).clone();
                phidag[j] = f.phidag(a as usize, j).clone();
            }
        }
        return (phi, phidag);
    }
    let nodes: Vec<i64> = (base - 2..=base + 3).collect();
    for &m in &nodes {
        if !(0..n).contains(&m) {
            continue;
        }
        let mut w = 1.0;
        for &o in &nodes {
            if o != m {
                w *= (u - o as f64) / (m - o) as f64;
            }
        }
        let wc = C::new(w, 0.0);
        for j in 0..k {
            phi[j].add_assign(&f.phi(m as usize, j).scale(&wc));
            phidag[j].add_assign(&f.phidag(m as usize, j).scale(&wc));
        }
    }
    (phi, phidag)
}

fn sqrt_g(g: f64) -> C {
    C::new(libm::sqrt(g), 0.0)
}

fn dx(f: &FieldConfiguration<C>) -> f64 {
    f.spacing().re
}

/// `T(λ; x_{L−1}, x_0)` by classical RK4 on `∂_x T = L T` with
/// `substeps` steps per lattice cell.
pub fn transition_ode(lambda: f64, f: &FieldConfiguration<C>, g: f64, substeps: usize) -> MC {
    let grading = f.grading();
    let s = sqrt_g(g);
    let lam = C::new(lambda, 0.0);
    let h = 1.0 / substeps as f64;
    let hx = C::new(h * dx(f), 0.0);
    let lax_at = |u: f64| {
        let (p, d) = interpolate(f, u);
        lax_matrix(&lam, &s, grading, &p, &d)
    };
    let mut t = MC::identity(grading.extend());
    let steps = (f.sites() - 1) * substeps;
    let half = C::new(0.5, 0.0);
    let sixth = C::new(1.0 / 6.0, 0.0);
    for n in 0..steps {
        let u = n as f64 * h;
        let l0 = lax_at(u);
        let lm = lax_at(u + h / 2.0);
        let l1 = lax_at(u + h);
        let k1 = l0.mul(&t).scale(&hx);
        let k2 = lm.mul(&t.add(&k1.scale(&half))).scale(&hx);
        let k3 = lm.mul(&t.add(&k2.scale(&half))).scale(&hx);
        let k4 = l1.mul(&t.add(&k3)).scale(&hx);
        let inc = k1.add(&k2.scale(&C::new(2.0, 0.0))).add(&k3.scale(&C::new(2.0, 0.0))).add(&k4);
        t = t.add(&inc.scale(&sixth));
    }
    t
}

/// `Ω̃(x) = E(−x) Ω(x) E(x)`.
fn omega_tilde(lambda: f64, x: f64, s: &C, grading: Grading, phi: &[SC], phidag: &[SC]) -> MC {
    let e = grading.extend();
    let last = e.last();
    let down = C::new(0.0, -lambda * x).exp();
    let up = down.inv();
    let is = C::new(0.0, 1.0) * s;
    SuperMatrix::from_fn(e, |i, j| {
        if j == last && i != last {
            phi[i].scale(&(is * down * grading.sign(i) as f64))
        } else if i == last && j != last {
            phidag[j].scale(&(-is * up))
        } else {
            SC::zero()
        }
    })
}

/// Series terms `T^(n)(λ; x_{L−1}, x_0)`, `n ≤ n_max`, from nested
/// cumulative quadrature in the interaction picture
/// `U^(n)(x) = ∫_{x_0}^x Ω̃(z) U^(n−1)(z) dz`, each cell integrated with the
/// four-point cubic rule.
pub fn transition_series(lambda: f64, f: &FieldConfiguration<C>, g: f64, n_max: usize) -> Result<Vec<MC>> {
    if n_max > MAX_SERIES_ORDER {
        return Err(Error::Budget(format!("series order {n_max} exceeds {MAX_SERIES_ORDER}")));
    }
    let grading = f.grading();
    let e = grading.extend();
    let s = sqrt_g(g);
    let h = dx(f);
    let n = f.sites();
    let om: Vec<MC> = (0..n)
        .map(|a| {
            let (p, d) = interpolate(f, a as f64);
            omega_tilde(lambda, a as f64 * h, &s, grading, &p, &d)
        })
        .collect();
    let mut prev: Vec<MC> = vec![MC::identity(e); n];
    let x_max = (n - 1) as f64 * h;
    let outer_l = e_matrix(lambda, x_max, grading);
    let mut out = vec![outer_l.clone()];
    let w_out = C::new(-h / 24.0, 0.0);
    let w_in = C::new(13.0 * h / 24.0, 0.0);
    for _ in 1..=n_max {
        let integrand: Vec<MC> = (0..n).map(|a| om[a].mul(&prev[a])).collect();
        let at = |i: i64| -> Option<&MC> {
            if i < 0 || i >= n as i64 {
                None
            } else {
                Some(&integrand[i as usize])
            }
        };
        let mut cur = vec![MC::zero(e); n];
        for i in 1..n {
            let ii = i as i64;
            let mut cell = MC::zero(e);
            for (idx, w) in [(ii - 2, w_out), (ii - 1, w_in), (ii, w_in), (ii + 1, w_out)] {
                if let Some(m) = at(idx) {
                    cell = cell.add(&m.scale(&w));
                }
            }
            cur[i] = cur[i - 1].add(&cell);
        }
        out.push(outer_l.mul(&cur[n - 1]));
        prev = cur;
    }
    Ok(out)
}

/// Monodromy `E(−x_max) T(x_max, x_min) E(x_min)` by RK4 in the interaction
/// picture `∂_x U = Ω̃ U`, with `substeps` steps per cell.
pub fn monodromy(lambda: f64, f: &FieldConfiguration<C>, g: f64, substeps: usize) -> MC {
    let grading = f.grading();
    let s = sqrt_g(g);
    let h = 1.0 / substeps as f64;
    let step = C::new(h * dx(f), 0.0);
    let om_at = |u: f64| {
        let (p, d) = interpolate(f, u);
        omega_tilde(lambda, u * dx(f), &s, grading, &p, &d)
    };
    let mut t = MC::identity(grading.extend());
    let half = C::new(0.5, 0.0);
    let mut l0 = om_at(0.0);
    for n in 0..(f.sites() - 1) * substeps {
        let u = n as f64 * h;
        let lm = om_at(u + h / 2.0);
        let l1 = om_at(u + h);
        let k1 = l0.mul(&t).scale(&step);
        let k2 = lm.mul(&t.add(&k1.scale(&half))).scale(&step);
        let k3 = lm.mul(&t.add(&k2.scale(&half))).scale(&step);
        let k4 = l1.mul(&t.add(&k3)).scale(&step);
        let inc = k1.add(&k2.scale(&C::new(2.0, 0.0))).add(&k3.scale(&C::new(2.0, 0.0))).add(&k4);
        t = t.add(&inc.scale(&C::new(1.0 / 6.0, 0.0)));
        l0 = l1;
    }
    t
}

/// Least-squares fit `D(λ) ≈ 1 + Σ_{k=1}^{terms} d_k λ^{−k}`, done per
/// Grassmann monomial. Returns `d_1 … d_terms`.
pub fn fit_inverse_powers(lambdas: &[f64], values: &[SC], terms: usize) -> Result<Vec<SC>> {
    if lambdas.len() != values.len() {
        return Err(Error::LengthMismatch { expected: lambdas.len(), got: values.len() });
    }
    if lambdas.len() < terms {
        return Err(Error::InvalidConfig(format!("{} samples cannot fit {terms} coefficients", lambdas.len())));
    }
    let rows = lambdas.len();
    let a = DMatrix::<f64>::from_fn(rows, terms, |i, k| libm::pow(lambdas[i], -((k + 1) as f64)));
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > 1e13 {
        return Err(Error::IllConditioned(cond));
    }
    let mut monos: Vec<Mono> = values.iter().flat_map(|v| v.terms().map(|(m, _)| m.clone())).collect();
    monos.sort();
    monos.dedup();
    let mut out = vec![SC::zero(); terms];
    for m in monos {
        let one = if m.is_empty() { 1.0 } else { 0.0 };
        for part in 0..2 {
            let b = DVector::<f64>::from_fn(rows, |i, _| {
                let c = values[i].coeff(&m);
                if part == 0 { c.re - one } else { c.im }
            });
            let x = svd.solve(&b, 1e-300).map_err(|_| Error::IllConditioned(cond))?;
            for k in 0..terms {
                let c = if part == 0 { C::new(x[k], 0.0) } else { C::new(0.0, x[k]) };
                out[k].add_term(m.clone(), c);
            }
        }
    }
    Ok(out)
}

/// `N`, `P`, `H` by direct quadrature with five-point derivatives, used as
/// the reference for the hierarchy coefficients.
pub fn quadrature_charges(f: &FieldConfiguration<C>, g: f64) -> (SC, SC, SC) {
    let n = f.sites();
    let k = f.grading().k();
    let h = dx(f);
    let get = |a: i64, j: usize, dag: bool| -> SC {
        if a < 0 || a >= n as i64 {
            SC::zero()
        } else if dag {
            f.phidag(a as usize, j).clone()
        } else {
            f.phi(a as usize, j).clone()
        }
    };
    let deriv = |a: usize, j: usize, dag: bool| -> SC {
        let a = a as i64;
        let c1 = C::new(8.0 / (12.0 * h), 0.0);
        let c2 = C::new(-1.0 / (12.0 * h), 0.0);
        get(a + 1, j, dag).sub(&get(a - 1, j, dag)).scale(&c1).add(&get(a + 2, j, dag).sub(&get(a - 2, j, dag)).scale(&c2))
    };
    let (mut nn, mut pp, mut kin) = (SC::zero(), SC::zero(), SC::zero());
    let mut quart = SC::zero();
    for a in 0..n {
        let mut dens = SC::zero();
        for j in 0..k {
            let pd = f.phidag(a, j);
            dens.add_assign(&pd.mul(f.phi(a, j)));
            pp.add_assign(&pd.mul(&deriv(a, j, false)));
            kin.add_assign(&deriv(a, j, true).mul(&deriv(a, j, false)));
        }
        quart.add_assign(&dens.mul(&dens));
        nn.add_assign(&dens);
    }
    let w = C::new(h, 0.0);
    (nn.scale(&w), pp.scale(&w), kin.add(&quart.scale(&C::new(g, 0.0))).scale(&w))
}

/// `igN`, `−g²N²/2 + gP`, `−ig³N³/6 + ig²NP + igH`.
pub fn hierarchy_targets(f: &FieldConfiguration<C>, g: f64) -> [SC; 3] {
    let (n, p, h) = quadrature_charges(f, g);
    let i = C::new(0.0, 1.0);
    let gc = C::new(g, 0.0);
    let d1 = n.scale(&(i * gc));
    let d2 = n.mul(&n).scale(&(-gc * gc / 2.0)).add(&p.scale(&gc));
    let d3 = n
        .mul(&n)
        .mul(&n)
        .scale(&(-i * gc * gc * gc / 6.0))
        .add(&n.mul(&p).scale(&(i * gc * gc)))
        .add(&h.scale(&(i * gc)));
    [d1, d2, d3]
}

/// `D(λ)` from two RK4 runs (`substeps`, `2·substeps`) combined by
/// Richardson extrapolation.
pub fn monodromy_d(lambda: f64, f: &FieldConfiguration<C>, g: f64, substeps: usize) -> SC {
    let last = f.grading().extend().last();
    let coarse = monodromy(lambda, f, g, substeps).get(last, last).clone();
    let fine = monodromy(lambda, f, g, 2 * substeps).get(last, last).clone();
    fine.scale(&C::new(16.0 / 15.0, 0.0)).sub(&coarse.scale(&C::new(1.0 / 15.0, 0.0)))
}

/// `d_1, d_2, d_3` from samples of `D(λ)`.
pub fn fit_hierarchy(lambdas: &[f64], values: &[SC], fit_terms: usize) -> Result<[SC; 3]> {
    let d = fit_inverse_powers(lambdas, values, fit_terms.max(3))?;
    Ok([d[0].clone(), d[1].clone(), d[2].clone()])
}

/// Fitted `d_1, d_2, d_3` from `D(λ)` at the given samples.
pub fn monodromy_hierarchy(f: &FieldConfiguration<C>, g: f64, lambdas: &[f64], substeps: usize, fit_terms: usize) -> Result<[SC; 3]> {
    f.require_margin(5)?;
    let values: Vec<SC> = lambdas.iter().map(|l| monodromy_d(*l, f, g, substeps)).collect();
    fit_hierarchy(lambdas, &values, fit_terms)
}

/// Compares fitted coefficients with [`hierarchy_targets`]. The
/// Grassmann-bilinear parts are also compared on their own scale.
pub fn hierarchy_report(id: &str, f: &FieldConfiguration<C>, g: f64, fit: &[SC; 3], tolerance: f64) -> CheckReport {
    let targets = hierarchy_targets(f, g);
    let soul = |s: &SC| s.filter(|m| !m.is_empty());
    let mut worst = 0.0f64;
    let mut params = Vec::new();
    for k in 0..3 {
        let all = relative_mismatch(&fit[k], &targets[k]);
        worst = worst.max(all);
        params.push((format!("d{}", k + 1), all));
        let t = soul(&targets[k]);
        if !t.is_zero() {
            let bil = relative_mismatch(&soul(&fit[k]), &t);
            worst = worst.max(bil);
            params.push((format!("d{}_grassmann", k + 1), bil));
        }
    }
    let mut r = CheckReport::tolerance(id, worst, tolerance, &format!("gl({}+1|{})", f.grading().m, f.grading().n)).with_param("g", g);
    for (k, v) in params {
        r = r.with_param(&k, v);
    }
    r
}

/// Largest relative deviation between fitted and reference coefficients,
/// measured monomial by monomial against the reference's largest entry.
pub fn relative_mismatch(fit: &SC, target: &SC) -> f64 {
    let scale = target.max_norm().max(1e-300);
    fit.sub(target).max_norm() / scale
}

/// ODE stepping against the series summed to `n_max`.
pub fn check_transition(f: &FieldConfiguration<C>, g: f64, lambda: f64, n_max: usize, substeps: usize, tolerance: f64) -> Result<CheckReport> {
    let e = f.grading().extend();
    let ode = transition_ode(lambda, f, g, substeps);
    let sum = transition_series(lambda, f, g, n_max)?.iter().fold(MC::zero(e), |acc, t| acc.add(t));
    Ok(CheckReport::tolerance("classical.transition", ode.sub(&sum).max_norm(), tolerance, &format!("gl({}+1|{})", f.grading().m, f.grading().n))
        .with_param("lambda", lambda)
        .with_param("n_max", n_max)
        .with_param("spacing", dx(f)))
}

/// Odd series orders are block off-diagonal: their `K×K` corner and
/// `(K+1, K+1)` entry vanish identically, so only even orders feed `t(λ)`
/// and `D(λ)`.
pub fn check_series_parity(f: &FieldConfiguration<C>, g: f64, lambda: f64, n_max: usize) -> Result<CheckReport> {
    let series = transition_series(lambda, f, g, n_max)?;
    let e = f.grading().extend();
    let last = e.last();
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut even_corner = 0.0f64;
    for (n, t) in series.iter().enumerate() {
        let diag_blocks = (0..e.dim()).flat_map(|i| (0..e.dim()).map(move |j| (i, j))).filter(|&(i, j)| (i == last) == (j == last));
        for (i, j) in diag_blocks {
            let v = t.get(i, j);
            if n % 2 == 1 {
                ok &= v.is_zero();
                worst = worst.max(v.max_norm());
            } else if n > 0 {
                even_corner = even_corner.max(v.max_norm());
            }
        }
    }
    Ok(CheckReport::exact("classical.series_parity", ok, worst, &format!("gl({}+1|{})", f.grading().m, f.grading().n))
        .with_param("n_max", n_max)
        .with_param("even_order_diagonal_blocks", even_corner))
}

/// `E(LΔ)U^(n)`, `n ≤ 2`, over `[0, LΔ]` for a grid of `L` formal sites
/// read as cell centres `x_a = (a + ½)Δ`: midpoint weights, ordered double
/// sum with half-weighted diagonal.
pub fn formal_series(lambda: f64, f: &FieldConfiguration<C>, g: f64) -> [MC; 3] {
    let grading = f.grading();
    let e = grading.extend();
    let k = grading.k();
    let s = sqrt_g(g);
    let h = dx(f);
    let n = f.sites();
    let mut u1 = MC::zero(e);
    let mut u2 = MC::zero(e);
    for a in 0..n {
        let phi: Vec<SC> = (0..k).map(|j| f.phi(a, j).clone()).collect();
        let dag: Vec<SC> = (0..k).map(|j| f.phidag(a, j).clone()).collect();
        let om = omega_tilde(lambda, (a as f64 + 0.5) * h, &s, grading, &phi, &dag).scale(&C::new(h, 0.0));
        u2 = u2.add(&om.mul(&u1.add(&om.scale(&C::new(0.5, 0.0)))));
        u1 = u1.add(&om);
    }
    let outer = e_matrix(lambda, n as f64 * h, grading);
    [outer.clone(), outer.mul(&u1), outer.mul(&u2)]
}

fn degree_part(t: &GradedTensor<C>, d: usize) -> GradedTensor<C> {
    t.map_coeffs(|s| s.filter(|m| m.len() == d))
}

/// Degree-0 and degree-1 parts of `{T₁(λ), T₂(μ)} − c[r(λ−μ), T(λ) ⊗ T(μ)]`
/// with `T` truncated at second order, evaluated on `profile`. Those are the
/// parts the truncation leaves complete.
pub fn truncated_rtt_residual(lambda: f64, mu: f64, g: f64, formal: &FieldConfiguration<C>, profile: &FieldConfiguration<C>, c: C) -> Result<(f64, f64)> {
    let grading = formal.grading();
    let e = grading.extend();
    let sp = *formal.spacing();
    let [tl0, tl1, tl2] = formal_series(lambda, formal, g);
    let [tm0, tm1, tm2] = formal_series(mu, formal, g);
    let lhs0 = global_bracket(&tl1, &tm1, &sp)?;
    let lhs1 = global_bracket(&tl1, &tm2, &sp)?.add(&global_bracket(&tl2, &tm1, &sp)?);
    let r = r_classical(&C::new(lambda - mu, 0.0), &C::new(g, 0.0), grading)?;
    let kron = |a: &MC, b: &MC| GradedTensor::embed(a, 0, &[e, e]).mul(&GradedTensor::embed(b, 1, &[e, e]));
    let tt = kron(&tl0, &tm0).add(&kron(&tl1, &tm0)).add(&kron(&tl0, &tm1));
    let rhs = r.mul(&tt).sub(&tt.mul(&r)).scale(&c);
    let eval = |t: &GradedTensor<C>| t.map_coeffs(|s| profile.evaluate(s)).max_norm();
    let res0 = eval(&lhs0.sub(&degree_part(&rhs, 0)));
    let res1 = eval(&lhs1.sub(&degree_part(&rhs, 1)));
    Ok((res0, res1))
}

/// Truncated `{T₁, T₂} = c[r, T ⊗ T]` on `[0, length]` over the given site
/// counts with `c = −1`; the complete low-degree parts must converge. The
/// last-level residual for the unsigned form `c = 1` is attached.
pub fn check_rtt_truncated(grading: Grading, lambda: f64, mu: f64, g: f64, length: f64, levels: &[usize], amps: &[C]) -> Result<CheckReport> {
    if lambda == mu {
        return Err(Error::CoincidentSpectral);
    }
    let mut residuals = Vec::new();
    let mut plus = 0.0;
    let mut linear = 0.0;
    for &sites in levels {
        let h = length / sites as f64;
        let formal = FieldConfiguration::formal(grading, sites, 0, C::new(h, 0.0))?;
        let profile = crate::classical::gaussian_profile(grading, h, (sites - 1) as f64 * h / 2.0, 1.0, 0, amps)?;
        let (r0, r1) = truncated_rtt_residual(lambda, mu, g, &formal, &profile, C::new(-1.0, 0.0))?;
        residuals.push(r0.max(r1));
        linear = r1;
        let (p0, p1) = truncated_rtt_residual(lambda, mu, g, &formal, &profile, C::new(1.0, 0.0))?;
        plus = p0.max(p1);
    }
    Ok(CheckReport::convergence("classical.rtt_truncated", &residuals, 1.0, &format!("gl({}+1|{})", grading.m, grading.n))
        .with_param("lambda", lambda)
        .with_param("mu", mu)
        .with_param("prefactor", "-1")
        .with_param("linear_part_finest", linear)
        .with_param("residual_prefactor_1", plus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{gaussian_configuration, gaussian_profile};
    use crate::ring::c64;

    #[test]
    fn lax_bracket_gl11() {
        let r = check_lax_bracket(Grading::new(1, 1), 3, &Rational::new(1, 2)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn lax_bracket_gl21() {
        let r = check_lax_bracket(Grading::new(2, 1), 2, &Rational::new(1, 3)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn printed_prefactor_fails() {
        let (zero, worst) = lax_bracket_residual(Grading::new(1, 0), 1, &Rational::one(), &RatFn::i()).unwrap();
        assert!(!zero && worst > 0.5);
    }

    #[test]
    fn lax_is_even() {
        let g = Grading::new(1, 2);
        let f = FieldConfiguration::formal(g, 3, 1, crate::rational::GaussQ::one()).unwrap();
        let phi: Vec<_> = (0..3).map(|j| f.phi(1, j).clone()).collect();
        let dag: Vec<_> = (0..3).map(|j| f.phidag(1, j).clone()).collect();
        let l = lax_matrix(&crate::rational::GaussQ::from_int(2), &crate::rational::GaussQ::one(), g, &phi, &dag);
        assert!(l.is_even());
    }

    #[test]
    fn zero_fields_give_free_propagation() {
        let g = Grading::new(1, 1);
        let f = gaussian_configuration(g, 0.1, 1.0, 5, &[c64(0.0, 0.0), c64(0.0, 0.0)]).unwrap();
        let t = transition_ode(1.3, &f, 0.2, 4);
        let len = (f.sites() - 1) as f64 * 0.1;
        let d = t.sub(&e_matrix(1.3, len, g)).max_norm();
        assert!(d < 1e-8, "{d}");
        let m = monodromy(3.0, &f, 0.2, 1);
        assert!(m.sub(&MC::identity(g.extend())).max_norm() < 1e-15);
    }

    #[test]
    fn ode_matches_series() {
        let g = Grading::new(1, 0);
        let f = gaussian_configuration(g, 0.025, 4.0, 5, &[c64(0.05, 0.0)]).unwrap();
        let r = check_transition(&f, 0.3, 2.0, 4, 2, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn series_budget_enforced() {
        let g = Grading::new(1, 0);
        let f = gaussian_configuration(g, 0.5, 2.0, 1, &[c64(0.5, 0.0)]).unwrap();
        assert!(matches!(transition_series(1.0, &f, 0.3, MAX_SERIES_ORDER + 1), Err(Error::Budget(_))));
    }

    #[test]
    fn odd_orders_are_off_diagonal() {
        let g = Grading::new(1, 1);
        let f = gaussian_configuration(g, 0.1, 3.0, 2, &[c64(0.5, 0.2), c64(0.4, -0.1)]).unwrap();
        let r = check_series_parity(&f, 0.3, 1.5, 4).unwrap();
        assert!(r.pass, "{r:?}");
        let series = transition_series(1.5, &f, 0.3, 3).unwrap();
        assert!(series[1].get(2, 2).is_zero());
        assert!(series[3].get(0, 1).is_zero() && series[3].get(1, 1).is_zero());
        assert!(!series[2].get(2, 2).is_zero());
    }

    #[test]
    fn truncated_rtt_converges_with_fermion() {
        let r = check_rtt_truncated(Grading::new(1, 1), 1.3, 0.4, 0.3, 6.0, &[8, 16, 32], &[c64(0.7, 0.2), c64(0.5, -0.1)]).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.order_estimate.unwrap() > 1.8);
    }

    #[test]
    fn rtt_needs_distinct_spectral_parameters() {
        let r = check_rtt_truncated(Grading::new(1, 0), 1.0, 1.0, 0.3, 6.0, &[8], &[c64(0.7, 0.2)]);
        assert!(matches!(r, Err(Error::CoincidentSpectral)));
    }

    #[test]
    fn zero_fields_give_trivial_hierarchy() {
        let g = Grading::new(1, 0);
        let f = gaussian_configuration(g, 0.2, 2.0, 5, &[c64(0.0, 0.0)]).unwrap();
        let lams: Vec<f64> = (0..8).map(|i| 5.0 + 2.0 * i as f64).collect();
        let d = monodromy_hierarchy(&f, 0.2, &lams, 1, 4).unwrap();
        assert!(d.iter().all(|x| x.max_norm() < 1e-14));
    }

    #[test]
    fn hierarchy_needs_margin() {
        let g = Grading::new(1, 0);
        let f = gaussian_configuration(g, 0.2, 2.0, 2, &[c64(0.5, 0.0)]).unwrap();
        assert!(monodromy_hierarchy(&f, 0.2, &[5.0, 6.0, 7.0], 1, 3).is_err());
    }

    #[test]
    fn first_hamiltonian_is_number() {
        let g = Grading::new(1, 0);
        let f = gaussian_profile(g, 0.05, 13.5, 3.0, 5, &[c64(0.6, 0.0)]).unwrap();
        let lams: Vec<f64> = (0..12).map(|i| 6.0 + 2.0 * i as f64).collect();
        let d = monodromy_hierarchy(&f, 0.2, &lams, 4, 7).unwrap();
        let t = hierarchy_targets(&f, 0.2);
        assert!(relative_mismatch(&d[0], &t[0]) < 1e-4);
    }

    #[test]
    fn fit_recovers_polynomial() {
        let lams: Vec<f64> = (0..10).map(|i| 3.0 + i as f64).collect();
        let vals: Vec<SC> = lams.iter().map(|l| SC::scalar(C::new(1.0 + 0.5 / l - 2.0 / (l * l) + 0.25 / (l * l * l), 1.0 / l))).collect();
        let d = fit_inverse_powers(&lams, &vals, 3).unwrap();
        assert!((d[0].coeff(&[]) - C::new(0.5, 1.0)).norm() < 1e-10);
        assert!((d[1].coeff(&[]) - C::new(-2.0, 0.0)).norm() < 1e-10);
        assert!((d[2].coeff(&[]) - C::new(0.25, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn fit_reports_conditioning() {
        let lams = [100.0, 100.0 + 1e-9, 100.0 + 2e-9];
        let vals = [SC::one(), SC::one(), SC::one()];
        assert!(matches!(fit_inverse_powers(&lams, &vals, 3), Err(Error::IllConditioned(_))));
    }
}
