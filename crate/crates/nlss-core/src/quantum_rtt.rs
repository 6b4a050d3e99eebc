//! Pointwise matrix identities behind the quantum monodromy relations, in
//! the rational-function ring with one site of formal field symbols.
//!
//! Every `λ − μ + iε` is taken at `ε = 0` and every `δ(λ − μ)` term is
//! dropped; the reports say so in their `regime` parameter.

use alloc::format;
use alloc::vec::Vec;

use crate::classical::FieldConfiguration;
use crate::error::{Error, Result};
use crate::grading::Grading;
use crate::grassmann::SuperScalar;
use crate::lax::lax_matrix;
use crate::matrix::SuperMatrix;
use crate::ratfn::RatFn;
use crate::report::CheckReport;
use crate::ring::Ring;
use crate::rmatrix::{pi12, pi21, r_classical};
use crate::tensor::{super_permutation, GradedTensor};

type T = GradedTensor<RatFn>;
type M = SuperMatrix<RatFn>;
type S = SuperScalar<RatFn>;

pub const VAR_LAMBDA: usize = 0;
pub const VAR_MU: usize = 1;
pub const VAR_SQRT_G: usize = 2;
/// `a = e^{iλy/2}`.
pub const VAR_EXP_LAMBDA: usize = 3;
/// `b = e^{iμy/2}`.
pub const VAR_EXP_MU: usize = 4;

const REGIME: &str = "lambda!=mu, eps=0, delta terms dropped";

fn lam() -> RatFn {
    RatFn::var(VAR_LAMBDA)
}
fn mu() -> RatFn {
    RatFn::var(VAR_MU)
}
fn sqrt_g() -> RatFn {
    RatFn::var(VAR_SQRT_G)
}
fn coupling() -> RatFn {
    sqrt_g().mul(&sqrt_g())
}
fn domain(g: Grading) -> alloc::string::String {
    format!("gl({}+1|{})", g.m, g.n)
}

/// Formal field symbols `φ_j`, `φ†_j` at one point.
pub fn point_fields(grading: Grading) -> (Vec<S>, Vec<S>) {
    let f = FieldConfiguration::formal(grading, 1, 0, RatFn::one()).expect("one formal site");
    let k = grading.k();
    ((0..k).map(|j| f.phi(0, j).clone()).collect(), (0..k).map(|j| f.phidag(0, j).clone()).collect())
}

/// `L(λ)` at the formal point.
pub fn point_lax(grading: Grading, spectral: &RatFn) -> M {
    let (phi, dag) = point_fields(grading);
    lax_matrix(spectral, &sqrt_g(), grading, &phi, &dag)
}

fn pair(a: &M, b: &M) -> T {
    let e = a.grading();
    GradedTensor::embed(a, 0, &[e, e]).add(&GradedTensor::embed(b, 1, &[e, e]))
}

/// `X₂₁ = Π X₁₂ Π`.
pub fn relabel(t: &T, grading: Grading) -> T {
    let p = super_permutation::<RatFn>(grading.extend());
    p.mul(t).mul(&p)
}

/// `𝓛₁₂(λ, μ) = L₁(λ) + L₂(μ) + g π₁₂`.
pub fn build_cal_l(grading: Grading, lambda: &RatFn, mu: &RatFn) -> T {
    pair(&point_lax(grading, lambda), &point_lax(grading, mu)).add(&pi12::<RatFn>(grading).scale(&coupling()))
}

/// `ℛ₁₂(λ−μ) = I − i r(λ−μ)`.
pub fn cal_r(grading: Grading) -> Result<T> {
    let e = grading.extend();
    let r = r_classical(&lam().sub(&mu()), &coupling(), grading)?;
    Ok(GradedTensor::identity(&[e, e]).sub(&r.scale(&RatFn::i())))
}

/// `[Π₁₂, L₁(λ) + L₂(μ)] − c·i(λ−μ)(π₁₂ − π₂₁)`.
pub fn hinge_residual(grading: Grading, c: i64) -> T {
    let p = super_permutation::<RatFn>(grading.extend());
    let s = pair(&point_lax(grading, &lam()), &point_lax(grading, &mu()));
    let lhs = p.mul(&s).sub(&s.mul(&p));
    let rhs = pi12::<RatFn>(grading).sub(&pi21(grading)).scale(&RatFn::i().mul(&lam().sub(&mu())).mul(&RatFn::from_int(c)));
    lhs.sub(&rhs)
}

/// `ℛ₁₂(λ−μ) 𝓛₁₂(λ,μ) = 𝓛₂₁(μ,λ) ℛ₁₂(λ−μ)`, plus the sign of the
/// commutator it rests on: `[Π₁₂, L₁+L₂] = c·i(λ−μ)(π₁₂−π₂₁)` holds for
/// `c = −1` (attached with the residual for `c = +1`).
pub fn check_rl_intertwine(grading: Grading) -> Result<CheckReport> {
    let r = cal_r(grading)?;
    let l12 = build_cal_l(grading, &lam(), &mu());
    let l21 = relabel(&build_cal_l(grading, &mu(), &lam()), grading);
    let res = r.mul(&l12).sub(&l21.mul(&r));
    let hinge = hinge_residual(grading, -1);
    let printed = hinge_residual(grading, 1);
    let ok = res.is_zero() && hinge.is_zero();
    Ok(CheckReport::exact("rtt.rl_intertwine", ok, res.max_norm().max(hinge.max_norm()), &domain(grading))
        .with_param("regime", REGIME)
        .with_param("hinge_sign", "-1")
        .with_param("hinge_residual_plus", printed.max_norm()))
}

/// `E(λ; y)` with `e^{iλy/2}` given as a ring element.
fn e_symbolic<R: Ring>(grading: Grading, a: &R) -> SuperMatrix<R> {
    let e = grading.extend();
    let inv = a.inv().expect("exponential is nonzero");
    SuperMatrix::from_fn(e, |i, j| {
        if i != j {
            SuperScalar::zero()
        } else if i == e.last() {
            SuperScalar::scalar(inv.clone())
        } else {
            SuperScalar::scalar(a.clone())
        }
    })
}

/// `ξ₁₂(λ, μ; y) = E₁(λ;y)E₂(μ;y) + 2g sin((λ−μ)y/2)/(λ−μ) π₁₂` in terms of
/// `a = e^{iλy/2}`, `b = e^{iμy/2}`.
pub fn build_xi<R: Ring>(grading: Grading, lambda: &R, mu: &R, a: &R, b: &R, g: &R) -> Result<GradedTensor<R>> {
    let x = lambda.sub(mu);
    let xinv = x.inv().ok_or(Error::CoincidentSpectral)?;
    let ratio = a.mul(&b.inv().expect("nonzero exponential"));
    let sine_over = ratio.sub(&ratio.inv().expect("nonzero exponential")).mul(&R::i().neg()).mul(&xinv);
    let e = grading.extend();
    let ee = GradedTensor::embed(&e_symbolic(grading, a), 0, &[e, e])
        .mul(&GradedTensor::embed(&e_symbolic(grading, b), 1, &[e, e]));
    Ok(ee.add(&pi12::<R>(grading).scale(&g.mul(&sine_over))))
}

/// `C₁₂(λ, μ) = I − ig/(λ−μ) π₁₂` and its inverse `I + ig/(λ−μ) π₁₂`.
pub fn build_c(grading: Grading, lambda: &RatFn, mu: &RatFn) -> Result<(T, T)> {
    let e = grading.extend();
    let xinv = lambda.sub(mu).inv().ok_or(Error::CoincidentSpectral)?;
    let id = GradedTensor::identity(&[e, e]);
    let p = pi12::<RatFn>(grading).scale(&RatFn::i().mul(&coupling()).mul(&xinv));
    Ok((id.sub(&p), id.add(&p)))
}

/// `ξ₁₂` and `C₁₂` at `(λ, μ)` with the exponential symbols.
pub fn build_xi_c(grading: Grading, lambda: &RatFn, mu: &RatFn) -> Result<(T, T)> {
    let xi = build_xi(grading, lambda, mu, &RatFn::var(VAR_EXP_LAMBDA), &RatFn::var(VAR_EXP_MU), &coupling())?;
    let (c, _) = build_c(grading, lambda, mu)?;
    Ok((xi, c))
}

/// The `δ`-free part of the displayed `ℛ^±₁₂(λ−μ)`.
pub fn displayed_r_pm(grading: Grading) -> Result<T> {
    let e = grading.extend();
    let k = grading.k();
    let x = lam().sub(&mu());
    let xinv = x.inv().ok_or(Error::CoincidentSpectral)?;
    let g = coupling();
    let ig = RatFn::i().mul(&g);
    let mut t = GradedTensor::zero(&[e, e]);
    for i in 0..k {
        for j in 0..k {
            t.add_term([(i as u8, i as u8), (j as u8, j as u8)].into_iter().collect(), S::scalar(ig.neg().mul(&xinv)));
            t.add_term([(i as u8, j as u8), (j as u8, i as u8)].into_iter().collect(), S::from_int(grading.sign(j)));
        }
    }
    t = t.add(&pi21(grading));
    t = t.add(&pi12::<RatFn>(grading).scale(&x.mul(&x).add(&g.mul(&g)).mul(&xinv).mul(&xinv)));
    let last = e.last() as u8;
    t.add_term([(last, last), (last, last)].into_iter().collect(), S::scalar(x.sub(&ig).mul(&xinv)));
    Ok(t)
}

/// `ℛ⁺ = C₁₂⁻¹(λ,μ) Π₁₂ ℛ₁₂ C₁₂(μ,λ)` and `ℛ⁻ = C₁₂(μ,λ) Π₁₂ ℛ₁₂ C₁₂⁻¹(λ,μ)`.
pub fn conjugated_r_pm(grading: Grading) -> Result<(T, T)> {
    let p = super_permutation::<RatFn>(grading.extend());
    let r = cal_r(grading)?;
    let (_, c_inv_lm) = build_c(grading, &lam(), &mu())?;
    let (c_ml, _) = build_c(grading, &mu(), &lam())?;
    let core = p.mul(&r);
    Ok((c_inv_lm.mul(&core).mul(&c_ml), c_ml.mul(&core).mul(&c_inv_lm)))
}

/// (a) `ℛ₁₂ ξ₁₂(λ,μ;y) = ξ₂₁(μ,λ;y) ℛ₁₂` for symbolic `e^{iλy/2}`, `e^{iμy/2}`;
/// (b) the `C`-conjugations reproduce the displayed `ℛ^±` without `δ`.
pub fn derive_r_pm(grading: Grading) -> Result<CheckReport> {
    let r = cal_r(grading)?;
    let a = RatFn::var(VAR_EXP_LAMBDA);
    let b = RatFn::var(VAR_EXP_MU);
    let xi12 = build_xi(grading, &lam(), &mu(), &a, &b, &coupling())?;
    let xi21 = relabel(&build_xi(grading, &mu(), &lam(), &b, &a, &coupling())?, grading);
    let inter = r.mul(&xi12).sub(&xi21.mul(&r));
    let (plus, minus) = conjugated_r_pm(grading)?;
    let shown = displayed_r_pm(grading)?;
    let dp = plus.sub(&shown);
    let dm = minus.sub(&shown);
    let ok = inter.is_zero() && dp.is_zero() && dm.is_zero();
    let worst = inter.max_norm().max(dp.max_norm()).max(dm.max_norm());
    Ok(CheckReport::exact("rtt.r_pm", ok, worst, &domain(grading))
        .with_param("regime", REGIME)
        .with_param("xi_intertwine_zero", inter.is_zero())
        .with_param("r_plus_matches", dp.is_zero())
        .with_param("r_minus_matches", dm.is_zero()))
}

/// Printed matrix with entries `m_ij` in coefficient-left storage.
fn stored(grading: Grading, f: impl Fn(usize, usize) -> S) -> M {
    let e = grading.extend();
    SuperMatrix::from_fn(e, |i, j| {
        let v = f(i, j);
        let pi = e.parity(i);
        if (pi + pi * e.parity(j)) % 2 == 1 {
            v.neg()
        } else {
            v
        }
    })
}

/// `L̄(λ) = −(iλ/2)Σ − i√g φ†_j E_{K+1,j} + i√g φ_j E_{j,K+1}`.
pub fn lax_bar(grading: Grading, spectral: &RatFn) -> M {
    let (phi, dag) = point_fields(grading);
    let e = grading.extend();
    let last = e.last();
    let half = RatFn::i().mul(spectral).mul(&RatFn::from_frac(1, 2));
    let is = RatFn::i().mul(&sqrt_g());
    stored(grading, |i, j| {
        if i == j {
            S::scalar(if i == last { half.clone() } else { half.neg() })
        } else if j == last {
            phi[i].scale(&is)
        } else if i == last {
            dag[j].scale(&is.neg())
        } else {
            S::zero()
        }
    })
}

/// `L^t(λ) = (iλ/2)Σ + i√g (−1)^{[j]} φ_j E_{K+1,j} − i√g φ†_j E_{j,K+1}` as
/// printed.
pub fn lax_t_printed(grading: Grading, spectral: &RatFn) -> M {
    let (phi, dag) = point_fields(grading);
    let e = grading.extend();
    let last = e.last();
    let half = RatFn::i().mul(spectral).mul(&RatFn::from_frac(1, 2));
    let is = RatFn::i().mul(&sqrt_g());
    stored(grading, |i, j| {
        if i == j {
            S::scalar(if i == last { half.neg() } else { half.clone() })
        } else if i == last {
            phi[j].scale(&is.mul(&RatFn::from_int(grading.sign(j))))
        } else if j == last {
            dag[i].scale(&is.neg())
        } else {
            S::zero()
        }
    })
}

/// `Γ₁₂(λ,μ) = L̄₁(λ) + L^t₂(μ) + g π₁₂^{t₂}`.
pub fn gamma(grading: Grading, lt: &M) -> T {
    let e = grading.extend();
    let bar = lax_bar(grading, &lam());
    GradedTensor::embed(&bar, 0, &[e, e])
        .add(&GradedTensor::embed(lt, 1, &[e, e]))
        .add(&pi12::<RatFn>(grading).partial_supertranspose(1).scale(&coupling()))
}

/// `Γ′₁₂(λ,μ) = L^t₁(μ) + L̄₂(λ) + g π₁₂^{t₁}`.
pub fn gamma_prime(grading: Grading, lt: &M) -> T {
    let e = grading.extend();
    let bar = lax_bar(grading, &lam());
    GradedTensor::embed(lt, 0, &[e, e])
        .add(&GradedTensor::embed(&bar, 1, &[e, e]))
        .add(&pi12::<RatFn>(grading).partial_supertranspose(0).scale(&coupling()))
}

/// `Q = Σ_ab σ_a σ_b (−1)^{[a][b]+[b]} E_ab ⊗ E_ab` with `Σ = diag(σ)`;
/// it plays the part of `Π^{t₁}`.
pub fn twisted_pt(grading: Grading) -> T {
    let e = grading.extend();
    let sigma = |a: usize| if a == e.last() { -1 } else { 1 };
    let mut t = GradedTensor::zero(&[e, e]);
    for a in 0..e.dim() {
        for b in 0..e.dim() {
            let pa = e.parity(a) as i64;
            let pb = e.parity(b) as i64;
            let sign = sigma(a) * sigma(b) * if (pa * pb + pb) % 2 == 1 { -1 } else { 1 };
            t.add_term([(a as u8, b as u8), (a as u8, b as u8)].into_iter().collect(), S::from_int(sign));
        }
    }
    t
}

/// `ℛ′₁₂ = −ig/(λ−μ) Q + (λ−μ+ig·n)/(λ−μ) Π`.
pub fn r_prime(grading: Grading, n: i64) -> Result<T> {
    let x = lam().sub(&mu());
    let xinv = x.inv().ok_or(Error::CoincidentSpectral)?;
    let ig = RatFn::i().mul(&coupling());
    let p = super_permutation::<RatFn>(grading.extend());
    Ok(twisted_pt(grading).scale(&ig.neg().mul(&xinv)).add(&p.scale(&x.add(&ig.mul(&RatFn::from_int(n))).mul(&xinv))))
}

/// The printed form `ig/(λ−μ) Π^{t₁} + (λ−μ−ig·n)/(λ−μ) Π`.
pub fn r_prime_printed(grading: Grading, n: i64) -> Result<T> {
    let x = lam().sub(&mu());
    let xinv = x.inv().ok_or(Error::CoincidentSpectral)?;
    let ig = RatFn::i().mul(&coupling());
    let p = super_permutation::<RatFn>(grading.extend());
    Ok(p.partial_supertranspose(0).scale(&ig.mul(&xinv)).add(&p.scale(&x.sub(&ig.mul(&RatFn::from_int(n))).mul(&xinv))))
}

/// `ℛ′Γ₁₂ − Γ₂₁ℛ′` for the given `L^t` and diagonal integer.
pub fn r_prime_residual(grading: Grading, lt: &M, n: i64) -> Result<T> {
    let rp = r_prime(grading, n)?;
    let g12 = gamma(grading, lt);
    let g21 = gamma_prime(grading, lt);
    Ok(rp.mul(&g12).sub(&g21.mul(&rp)))
}

/// `L^t` as the supertranspose of the stored Lax matrix.
pub fn lax_t_computed(grading: Grading, spectral: &RatFn) -> Result<M> {
    point_lax(grading, spectral).supertranspose()
}

/// `ℛ′₁₂Γ₁₂ = Γ′₁₂ℛ′₁₂` with the `(M−N)` coefficient; the `(M+N)` variant is
/// the negative control and must fail when `N > 0`.
pub fn check_r_prime_ybe(grading: Grading) -> Result<CheckReport> {
    let lt = lax_t_printed(grading, &mu());
    let n_good = grading.m as i64 - grading.n as i64;
    let n_bad = grading.m as i64 + grading.n as i64;
    let res = r_prime_residual(grading, &lt, n_good)?;
    let control = r_prime_residual(grading, &lt, n_bad)?;
    let control_fails = !control.is_zero();
    let st_matches = lax_t_computed(grading, &mu())?.sub(&lt).is_zero();
    let printed = {
        let rp = r_prime_printed(grading, n_good)?;
        rp.mul(&gamma(grading, &lt)).sub(&gamma_prime(grading, &lt).mul(&rp))
    };
    let ok = res.is_zero() && (grading.n == 0 || control_fails);
    Ok(CheckReport::exact("rtt.r_prime_ybe", ok, res.max_norm(), &domain(grading))
        .with_param("regime", REGIME)
        .with_param("coefficient", n_good)
        .with_param("control_coefficient", n_bad)
        .with_param("control_fails", control_fails)
        .with_param("supertranspose_matches_lt", st_matches)
        .with_param("printed_r_prime_residual", printed.max_norm()))
}

/// `π₁₂² = π₂₁² = 0`.
pub fn check_pi_nilpotent(grading: Grading) -> CheckReport {
    let a = pi12::<RatFn>(grading);
    let b = pi21::<RatFn>(grading);
    let sq = a.mul(&a).max_norm().max(b.mul(&b).max_norm());
    CheckReport::exact("rtt.pi_nilpotent", sq == 0.0, sq, &domain(grading))
}

/// `exp[(iλ/2 Σ₁ + iμ/2 Σ₂ + gπ₁₂) y]` by Taylor series, for checking the
/// closed form of `ξ₁₂` in floating point.
pub fn xi_taylor(grading: Grading, lambda: f64, mu: f64, g: f64, y: f64, terms: usize) -> nalgebra::DMatrix<num_complex::Complex64> {
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C;
    let e = grading.extend();
    let d = e.dim();
    let mut gen = DMatrix::<C>::zeros(d * d, d * d);
    let sig = |a: usize| if a == e.last() { -1.0 } else { 1.0 };
    for a in 0..d {
        for b in 0..d {
            gen[(a * d + b, a * d + b)] = C::new(0.0, 0.5 * (lambda * sig(a) + mu * sig(b)) * y);
        }
    }
    for (k, c) in pi12::<C>(grading).terms() {
        let (a, b) = k[0];
        let (c2, d2) = k[1];
        let v = c.body() * g * y;
        gen[(a as usize * d + c2 as usize, b as usize * d + d2 as usize)] += v;
    }
    let mut out = DMatrix::<C>::identity(d * d, d * d);
    let mut term = out.clone();
    for n in 1..terms {
        term = &term * &gen / C::new(n as f64, 0.0);
        out += &term;
    }
    out
}
