//! Rational R-matrix `R12(k) = (k I⊗I − i g P12)/(k + i g)` and the
//! classical r-matrix `r(λ−μ) = g/(λ−μ) Π12`.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grading::Grading;
use crate::grassmann::SuperScalar;
use crate::rational::{GaussQ, Rational};
use crate::ratfn::{Poly, RatFn};
use crate::report::CheckReport;
use crate::ring::Ring;
use crate::tensor::{super_permutation, GradedTensor};

pub fn r_quantum<R: Ring>(k: &R, g: &R, grading: Grading) -> Result<GradedTensor<R>> {
    let ig = R::i().mul(g);
    let den = k.add(&ig).inv().ok_or_else(|| Error::Pole(format!("k + ig = 0 at k = {k:?}")))?;
    let id = GradedTensor::identity(&[grading, grading]);
    let p = super_permutation::<R>(grading);
    Ok(id.scale(&k.mul(&den)).sub(&p.scale(&ig.mul(&den))))
}

/// `r(x) = g/x · Π12` on the extended space.
pub fn r_classical<R: Ring>(x: &R, g: &R, grading: Grading) -> Result<GradedTensor<R>> {
    let inv = x.inv().ok_or(Error::CoincidentSpectral)?;
    Ok(super_permutation::<R>(grading.extend()).scale(&g.mul(&inv)))
}

/// `r±` at `λ ≠ μ` (principal-value part only): `g/x (P12 + E∞∞⊗E∞∞)`,
/// with `P12` the K-block permutation embedded in the extended space.
pub fn r_classical_pm<R: Ring>(x: &R, g: &R, grading: Grading) -> Result<GradedTensor<R>> {
    let inv = x.inv().ok_or(Error::CoincidentSpectral)?;
    let e = grading.extend();
    let mut t = GradedTensor::zero(&[e, e]);
    for i in 0..grading.k() {
        for j in 0..grading.k() {
            t = t.add(&GradedTensor::basis(&[e, e], &[(i, j), (j, i)], SuperScalar::from_int(grading.sign(j))));
        }
    }
    let last = e.last();
    t = t.add(&GradedTensor::basis(&[e, e], &[(last, last), (last, last)], SuperScalar::one()));
    Ok(t.scale(&g.mul(&inv)))
}

/// `π12 = Σ_j E_{j,K+1} ⊗ E_{K+1,j}` on the extended space.
pub fn pi12<R: Ring>(grading: Grading) -> GradedTensor<R> {
    let e = grading.extend();
    let last = e.last();
    let mut t = GradedTensor::zero(&[e, e]);
    for j in 0..grading.k() {
        t = t.add(&GradedTensor::basis(&[e, e], &[(j, last), (last, j)], SuperScalar::one()));
    }
    t
}

/// `π21 = Π π12 Π = Σ_j (−1)^{[j]} E_{K+1,j} ⊗ E_{j,K+1}`.
pub fn pi21<R: Ring>(grading: Grading) -> GradedTensor<R> {
    pi12::<R>(grading).permute(&[1, 0])
}

/// Random rational with denominator at most `max_den`.
pub fn sample_rational(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rational {
    let q = rng.gen_range(1..=max_den);
    let p = rng.gen_range(-max_num..=max_num);
    Rational::new(p, q)
}

pub fn sample_positive(rng: &mut ChaCha8Rng, max_num: i64, max_den: i64) -> Rational {
    let q = rng.gen_range(1..=max_den);
    let p = rng.gen_range(1..=max_num);
    Rational::new(p, q)
}

fn residual_report(id: &str, res: &[GradedTensor<GaussQ>], domain: &str) -> CheckReport {
    let worst = res.iter().map(|t| t.max_norm()).fold(0.0, f64::max);
    CheckReport::exact(id, res.iter().all(|t| t.is_zero()), worst, domain)
}

/// Symmetry `R21 = R12`, unitarity `R12(k)R21(−k) = I⊗I` and hermiticity
/// `R12(k1−k2)† = R21(k2−k1)` at seeded rational samples.
pub fn check_r_properties(grading: Grading, g: &Rational, samples: usize, seed: u64) -> Result<CheckReport> {
    if g.signum() <= 0 {
        return Err(Error::InvalidConfig(format!("coupling must be positive, got {g}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gq = GaussQ::real(g.clone());
    let id = GradedTensor::<GaussQ>::identity(&[grading, grading]);
    let mut res = Vec::new();
    for _ in 0..samples {
        let k1 = GaussQ::real(sample_rational(&mut rng, 300, 100));
        let k2 = GaussQ::real(sample_rational(&mut rng, 300, 100));
        let k = k1.sub(&k2);
        let r = r_quantum(&k, &gq, grading)?;
        let r21 = r.permute(&[1, 0]);
        res.push(r21.sub(&r));
        let rm = r_quantum(&k.neg(), &gq, grading)?.permute(&[1, 0]);
        res.push(r.mul(&rm).sub(&id));
        res.push(r.dagger().sub(&rm));
    }
    Ok(residual_report("rmatrix.properties", &res, &format!("{samples} samples"))
        .with_param("m", grading.m)
        .with_param("n", grading.n)
        .with_param("g", g))
}

/// Graded Yang–Baxter equation `R12(u−v)R13(u)R23(v) = R23(v)R13(u)R12(u−v)`.
pub fn yang_baxter_residual(u: &GaussQ, v: &GaussQ, g: &GaussQ, grading: Grading) -> Result<GradedTensor<GaussQ>> {
    let f = [grading, grading, grading];
    let r12 = r_quantum(&u.sub(v), g, grading)?.place(&[0, 1], &f);
    let r13 = r_quantum(u, g, grading)?.place(&[0, 2], &f);
    let r23 = r_quantum(v, g, grading)?.place(&[1, 2], &f);
    Ok(r12.mul(&r13).mul(&r23).sub(&r23.mul(&r13).mul(&r12)))
}

pub fn check_yang_baxter(grading: Grading, g: &Rational, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gq = GaussQ::real(g.clone());
    let mut res = Vec::new();
    let mut done = 0;
    while done < samples {
        let u = GaussQ::real(sample_rational(&mut rng, 300, 100));
        let v = GaussQ::real(sample_rational(&mut rng, 300, 100));
        // distinct parameters, resample otherwise
        if u == v || u.is_zero() || v.is_zero() {
            continue;
        }
        res.push(yang_baxter_residual(&u, &v, &gq, grading)?);
        done += 1;
    }
    Ok(residual_report("rmatrix.yang_baxter", &res, &format!("{samples} samples"))
        .with_param("m", grading.m)
        .with_param("n", grading.n)
        .with_param("g", g))
}

/// Evenness of `R(k)` at one rational point.
pub fn check_evenness(grading: Grading) -> Result<CheckReport> {
    let r = r_quantum(&GaussQ::frac(3, 7), &GaussQ::frac(2, 5), grading)?;
    Ok(CheckReport::exact("rmatrix.even", r.is_even(), 1.0, "k=3/7,g=2/5"))
}

pub const VAR_K: usize = 5;
pub const VAR_HBAR: usize = 6;

/// With `ħ` restored, the normalization-free R-matrix
/// `(k I⊗I − iħ g P12)/k` has first-order ħ-coefficient `−i r(k)`
/// restricted to the K-block.
pub fn check_classical_limit(grading: Grading, g: &Rational) -> Result<CheckReport> {
    let k = RatFn::var(VAR_K);
    let gr = RatFn::from_rational(g);
    let hbar = RatFn::var(VAR_HBAR);
    let id = GradedTensor::<RatFn>::identity(&[grading, grading]);
    let p = super_permutation::<RatFn>(grading);
    let unnorm = id.scale(&k).sub(&p.scale(&RatFn::i().mul(&hbar).mul(&gr)));
    let kinv = k.inv().unwrap();
    let rt = unnorm.scale(&kinv);
    // ħ¹ coefficient: denominators are free of ħ
    let first = rt.map_coeffs(|c| c.map_coeffs(|f| series_coeff(f, VAR_HBAR, 1)));
    let r = r_classical(&k, &gr, grading)?;
    let restricted = restrict_to_block(&r, grading);
    let res = first.sub(&restricted.scale(&RatFn::i().neg()));
    Ok(CheckReport::exact("rmatrix.classical_limit", res.is_zero(), res.max_norm(), "formal k, hbar")
        .with_param("m", grading.m)
        .with_param("n", grading.n))
}

/// Coefficient of `x_var^order` in a rational function whose denominator
/// does not involve `x_var`.
pub fn series_coeff(f: &RatFn, var: usize, order: u8) -> RatFn {
    let den = f.denominator();
    assert!(den.terms().all(|(e, _)| e[var] == 0), "denominator depends on the series variable");
    let mut num = Poly::zero();
    for (e, c) in f.numerator().terms() {
        if e[var] == order {
            let mut e2 = *e;
            e2[var] = 0;
            num.add_term(e2, c.clone());
        }
    }
    RatFn::from_poly(num).div_poly(&den).expect("nonzero denominator")
}

/// Keeps terms whose indices all lie in the K-block, re-expressed over the
/// unextended grading.
pub fn restrict_to_block<R: Ring>(t: &GradedTensor<R>, grading: Grading) -> GradedTensor<R> {
    let k = grading.k() as u8;
    let f: Vec<Grading> = (0..t.rank()).map(|_| grading).collect();
    let mut out = GradedTensor::zero(&f);
    for (x, c) in t.terms() {
        if x.iter().all(|(i, j)| *i < k && *j < k) {
            out.add_term(x.clone(), c.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> GaussQ {
        GaussQ::frac(p, d)
    }

    #[test]
    fn zero_spectral_gives_minus_p() {
        let g = Grading::new(2, 1);
        let r = r_quantum(&GaussQ::zero(), &q(1, 3), g).unwrap();
        assert_eq!(r, super_permutation::<GaussQ>(g).neg());
    }

    #[test]
    fn coefficient_split_at_unit_point() {
        // k=g=1: I⊗I coefficient 1/(1+i), P12 coefficient −i/(1+i)
        let g = Grading::new(1, 1);
        let r = r_quantum(&GaussQ::one(), &GaussQ::one(), g).unwrap();
        let one_plus_i = GaussQ::one().add(&GaussQ::i());
        let a = one_plus_i.inv().unwrap();
        let b = GaussQ::i().neg().mul(&a);
        // (0,0)⊗(0,0): identity plus P term with sign +1
        assert_eq!(r.coeff(&[(0, 0), (0, 0)]).body(), a.add(&b));
        // (0,1)⊗(1,0): only P, sign (−1)^{[1]} = −1
        assert_eq!(r.coeff(&[(0, 1), (1, 0)]).body(), b.neg());
        // (0,0)⊗(1,1): only identity
        assert_eq!(r.coeff(&[(0, 0), (1, 1)]).body(), a);
    }

    #[test]
    fn pole_is_reported() {
        let g = Grading::new(1, 0);
        let gc = q(1, 2);
        let k = GaussQ::i().mul(&gc).neg();
        assert!(matches!(r_quantum(&k, &gc, g), Err(Error::Pole(_))));
    }

    #[test]
    fn unitarity_at_fixed_point() {
        let g = Grading::new(2, 1);
        let k = q(3, 7);
        let gc = q(2, 5);
        let r = r_quantum(&k, &gc, g).unwrap();
        let rm = r_quantum(&k.neg(), &gc, g).unwrap().permute(&[1, 0]);
        assert_eq!(r.mul(&rm), GradedTensor::identity(&[g, g]));
    }

    #[test]
    fn ybe_small_cases() {
        for (m, n) in [(1, 0), (1, 1), (0, 2), (2, 1)] {
            let res = yang_baxter_residual(&q(2, 1), &GaussQ::one(), &GaussQ::one(), Grading::new(m, n)).unwrap();
            assert!(res.is_zero(), "M={m} N={n}");
        }
    }

    #[test]
    fn ybe_fails_with_ungraded_permutation() {
        // negative control: dropping the (−1)^{[j]} sign breaks YBE for N>0
        let g = Grading::new(1, 1);
        let f = [g, g, g];
        let mk = |k: &GaussQ| {
            let gc = GaussQ::one();
            let ig = GaussQ::i();
            let den = k.add(&ig).inv().unwrap();
            let mut p = GradedTensor::<GaussQ>::zero(&[g, g]);
            for i in 0..2 {
                for j in 0..2 {
                    p = p.add(&GradedTensor::basis(&[g, g], &[(i, j), (j, i)], SuperScalar::one()));
                }
            }
            let _ = gc;
            GradedTensor::identity(&[g, g]).scale(&k.mul(&den)).sub(&p.scale(&ig.mul(&den)))
        };
        let (u, v) = (q(2, 1), GaussQ::one());
        let r12 = mk(&u.sub(&v)).place(&[0, 1], &f);
        let r13 = mk(&u).place(&[0, 2], &f);
        let r23 = mk(&v).place(&[1, 2], &f);
        assert!(!r12.mul(&r13).mul(&r23).sub(&r23.mul(&r13).mul(&r12)).is_zero());
    }

    #[test]
    fn classical_r_is_odd() {
        let g = Grading::new(1, 1);
        let x = q(5, 3);
        let gc = q(1, 2);
        let a = r_classical(&x, &gc, g).unwrap();
        let b = r_classical(&x.neg(), &gc, g).unwrap();
        assert!(a.add(&b).is_zero());
        assert_eq!(a.coeff(&[(0, 0), (0, 0)]).body(), gc.div(&x).unwrap());
        assert!(matches!(r_classical(&GaussQ::zero(), &gc, g), Err(Error::CoincidentSpectral)));
    }

    #[test]
    fn r_pm_differs_from_r_by_mixed_block() {
        // r − r± = g/x (π12 + π21): Π12 splits into the K-block, the corner
        // and the two mixed pieces
        let g = Grading::new(2, 1);
        let x = q(7, 4);
        let gc = q(1, 3);
        let r = r_classical(&x, &gc, g).unwrap();
        let rpm = r_classical_pm(&x, &gc, g).unwrap();
        let mixed = pi12::<GaussQ>(g).add(&pi21::<GaussQ>(g)).scale(&gc.div(&x).unwrap());
        assert_eq!(r.sub(&rpm), mixed);
    }

    #[test]
    fn nilpotent_pi() {
        for (m, n) in [(1, 0), (1, 1), (2, 1), (2, 2)] {
            let g = Grading::new(m, n);
            assert!(pi12::<GaussQ>(g).mul(&pi12(g)).is_zero());
            assert!(pi21::<GaussQ>(g).mul(&pi21(g)).is_zero());
        }
    }

    #[test]
    fn property_and_limit_checks_pass() {
        for (m, n) in [(1, 0), (1, 1), (2, 1)] {
            let g = Grading::new(m, n);
            assert!(check_r_properties(g, &Rational::new(2, 5), 5, 7).unwrap().pass, "props {m} {n}");
            assert!(check_classical_limit(g, &Rational::new(2, 5)).unwrap().pass, "limit {m} {n}");
            assert!(check_evenness(g).unwrap().pass, "even {m} {n}");
        }
    }
}
