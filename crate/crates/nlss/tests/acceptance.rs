//! One test per acceptance criterion; each prints a single PASS/FAIL line
//! (written straight to stderr so it survives output capture).

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use nlss::suites::{self, odd_involution, HIERARCHY_FIT_TERMS, HIERARCHY_HALF_WIDTH, HIERARCHY_SPACING, HIERARCHY_SUBSTEPS, HIERARCHY_WIDTH};
use nlss_core::classical::{self, basis_matrix, gaussian_configuration, gaussian_profile, Conservation};
use nlss_core::fock::{self, FockSpace, MomentumGrid, Normalization, Profile};
use nlss_core::grading::Grading;
use nlss_core::lax;
use nlss_core::quantum_rtt;
use nlss_core::rational::{GaussQ, Rational};
use nlss_core::report::CheckReport;
use nlss_core::rmatrix;
use nlss_core::rosales;
use nlss_core::yangian::{self, WellBred};
use num_complex::Complex64;

fn line(n: u32, what: &str, pass: bool, detail: &str) {
    let _ = writeln!(std::io::stderr(), "criterion {n} [{}] {what}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn gl(m: usize, n: usize) -> Grading {
    Grading::new(m, n)
}

/// Every grading with `1 ≤ M+N ≤ k`.
fn gradings_up_to(k: usize) -> Vec<Grading> {
    (1..=k).flat_map(|t| (0..=t).map(move |n| gl(t - n, n))).collect()
}

fn summarize(reports: &[CheckReport]) -> (bool, String) {
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| format!("{} {} res={:?}", r.check_id, r.domain, r.residual)).collect();
    (failed.is_empty(), if failed.is_empty() { format!("{} checks", reports.len()) } else { failed.join("; ") })
}

#[test]
fn criterion_1_r_matrix() {
    let t = Instant::now();
    let g = Rational::new(2, 5);
    let mut reps = Vec::new();
    for gr in gradings_up_to(3) {
        reps.push(rmatrix::check_r_properties(gr, &g, 50, 11).unwrap());
        reps.push(rmatrix::check_yang_baxter(gr, &g, 50, 12).unwrap());
    }
    let el = t.elapsed();
    let (ok, detail) = summarize(&reps);
    let pass = ok && el < Duration::from_secs(10);
    line(1, "R-matrix YBE/unitarity/symmetry/hermiticity, 50 sets, M+N<=3, exact", pass, &format!("{detail}, {:.2}s (limit 10s)", el.as_secs_f64()));
    assert!(pass);
}

#[test]
fn criterion_2_rosales() {
    let t = Instant::now();
    let mut reps = Vec::new();
    for gr in [gl(1, 0), gl(1, 1), gl(2, 1)] {
        reps.push(rosales::check_rosales(gr, 3, 5, 21).unwrap());
    }
    let el = t.elapsed();
    let (ok, detail) = summarize(&reps);
    let pass = ok && el < Duration::from_secs(60);
    line(2, "Rosales NLSS residual g^0..g^3, 5 mode sets, (1,0),(1,1),(2,1)", pass, &format!("{detail}, {:.2}s (limit 60s)", el.as_secs_f64()));
    let probe = rosales::probe_quadratic_identity(4, 20, 22).unwrap();
    let get = |k: &str| probe.params.iter().find(|(a, _)| a == k).map(|(_, v)| v.clone()).unwrap_or_default();
    let _ = writeln!(
        std::io::stderr(),
        "criterion 2 [INFO] quadratic identity probe: working convention {}, literal reading fails on {} of {} tuples",
        get("convention"),
        get("literal_reading_failures"),
        get("samples")
    );
    assert!(pass);
}

#[test]
fn criterion_3_charge_algebra() {
    let mut reps = Vec::new();
    for gr in [gl(1, 1), gl(2, 1)] {
        let k = gr.k();
        let mut pairs = Vec::new();
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for d in 0..k {
                        pairs.push((basis_matrix(gr, a, b), basis_matrix(gr, c, d)));
                    }
                }
            }
        }
        reps.push(classical::check_q0_closure(gr, 6, &Rational::new(1, 2), &Rational::new(2, 3), &pairs, 2).unwrap());
        if let Some(sigma) = odd_involution(gr) {
            reps.push(classical::check_supersymmetry(gr, 6, &sigma, &Rational::new(2, 3)).unwrap());
        }
    }
    let amps = [Complex64::new(0.4, 0.0), Complex64::new(0.5, 0.1), Complex64::new(0.3, -0.2)];
    let gr = gl(1, 1);
    for order in 0..=2u8 {
        let which = Conservation::HQ { sigma: basis_matrix(gr, 0, 0), order };
        reps.push(classical::check_conservation(&format!("hq{order}"), &which, gr, 0.25, 3, 0.3, &amps[..2]).unwrap());
    }
    let odd = Conservation::HQ { sigma: basis_matrix(gr, 0, 1), order: 1 };
    reps.push(classical::check_conservation("hq1_odd", &odd, gr, 0.25, 3, 0.3, &amps[..2]).unwrap());
    let g21 = gl(2, 1);
    let q1q1 = Conservation::Q1Q1 { sigma: basis_matrix(g21, 0, 1), omega: basis_matrix(g21, 1, 0) };
    reps.push(classical::check_conservation("q1q1", &q1q1, g21, 0.25, 3, 0.3, &amps).unwrap());
    let orders: Vec<String> = reps
        .iter()
        .filter_map(|r| {
            let floor = r.residual.as_f64() <= nlss_core::report::CONVERGED_FLOOR;
            r.order_estimate.map(|o| if floor { format!("{}:floor", r.check_id) } else { format!("{}:{o:.2}", r.check_id) })
        })
        .collect();
    let (ok, detail) = summarize(&reps);
    line(3, "charge algebra exact on 6 sites; conservation order >= 1 over 3 levels", ok, &format!("{detail}; orders {}", orders.join(" ")));
    assert!(ok);
}

#[test]
fn criterion_4_classical_lax() {
    let t = Instant::now();
    let mut reps = Vec::new();
    for gr in gradings_up_to(3) {
        reps.push(lax::check_lax_bracket(gr, 2, &Rational::new(1, 3)).unwrap());
    }
    for gr in [gl(1, 0), gl(1, 1), gl(2, 1)] {
        let amps: Vec<Complex64> = [Complex64::new(0.5, 0.2), Complex64::new(0.4, -0.1), Complex64::new(0.3, 0.3)][..gr.k()].to_vec();
        let f = gaussian_configuration(gr, 0.1, 3.0, 2, &amps).unwrap();
        reps.push(lax::check_series_parity(&f, 0.3, 1.5, 4).unwrap());
    }
    let gr = gl(1, 1);
    let g = 0.2;
    let f = gaussian_profile(gr, HIERARCHY_SPACING, HIERARCHY_HALF_WIDTH, HIERARCHY_WIDTH, 5, &[Complex64::new(0.6, 0.0), Complex64::new(0.5, 0.1)]).unwrap();
    let d = lax::monodromy_hierarchy(&f, g, &suites::hierarchy_lambdas(), HIERARCHY_SUBSTEPS, HIERARCHY_FIT_TERMS).unwrap();
    let fit = lax::hierarchy_report("classical.hierarchy", &f, g, &d, 1e-4);
    let fit_detail: Vec<String> = fit.params.iter().filter(|(k, _)| k.starts_with('d')).map(|(k, v)| format!("{k}={:.1e}", v.parse::<f64>().unwrap_or(f64::NAN))).collect();
    reps.push(fit);
    let el = t.elapsed();
    let (ok, detail) = summarize(&reps);
    let pass = ok && el < Duration::from_secs(300);
    line(4, "{L1,L2} exact K<=3; odd series orders structural; D1-D3 fit within 1e-4", pass, &format!("{detail}; {}; {:.1}s (limit 300s)", fit_detail.join(" "), el.as_secs_f64()));
    assert!(pass);
}

#[test]
fn criterion_5_quantum_rtt() {
    let mut reps = Vec::new();
    for gr in gradings_up_to(3) {
        reps.push(quantum_rtt::check_rl_intertwine(gr).unwrap());
        reps.push(quantum_rtt::derive_r_pm(gr).unwrap());
        reps.push(quantum_rtt::check_r_prime_ybe(gr).unwrap());
        reps.push(quantum_rtt::check_pi_nilpotent(gr));
    }
    let controls = reps.iter().filter(|r| r.check_id == "rtt.r_prime_ybe" && r.params.iter().any(|(k, v)| k == "control_fails" && v == "true")).count();
    let with_fermions = gradings_up_to(3).iter().filter(|g| g.n > 0).count();
    let (ok, detail) = summarize(&reps);
    let pass = ok && controls >= with_fermions;
    line(5, "RL intertwining, xi/C, R-pm, R' with (M-N), M+N<=3, exact", pass, &format!("{detail}; M+N control fails in {controls} gradings"));
    assert!(pass);
}

fn float_space(gr: Grading, n_max: usize, g: f64) -> FockSpace<Complex64> {
    let grid = MomentumGrid::new(vec![Rational::new(-1, 2), Rational::new(1, 3), Rational::from_int(2)]).unwrap();
    FockSpace::build(gr, grid, n_max, Complex64::new(g, 0.0), Normalization::Unit).unwrap()
}

fn exact_space(gr: Grading, n_max: usize, g: GaussQ) -> FockSpace<GaussQ> {
    FockSpace::build(gr, MomentumGrid::from_ints(&[-1, 1, 2]).unwrap(), n_max, g, Normalization::Factorial).unwrap()
}

#[test]
fn criterion_6_fock_zf() {
    let mut reps = Vec::new();
    for gr in gradings_up_to(3) {
        let f = float_space(gr, 3, 0.4);
        reps.push(f.check_zf().unwrap());
        reps.push(f.check_zf_contact().unwrap());
        let x = exact_space(gr, 2, GaussQ::frac(2, 5));
        reps.push(x.check_zf().unwrap());
        reps.push(x.check_zf_contact().unwrap());
        reps.push(x.check_projector_and_pbw());
        reps.push(x.check_hamiltonians(3));
    }
    let q = |c: usize, p: usize, a: i64, b: i64| (c, p, GaussQ::new(Rational::from_int(a), Rational::from_int(b)));
    for gr in [gl(1, 1), gl(2, 1)] {
        let free = exact_space(gr, 2, GaussQ::zero());
        let ph = vec![GaussQ::one(); 3];
        let odd = gr.m;
        let cases: [(Vec<Profile<GaussQ>>, Vec<Profile<GaussQ>>); 4] = [
            (vec![vec![q(0, 1, 2, 1)]], vec![vec![q(0, 1, 1, 0), q(0, 2, 0, 1)]]),
            (vec![vec![q(odd, 0, 1, 2), q(odd, 2, -1, 0)], vec![q(0, 1, 2, 1)]], vec![vec![q(odd, 0, 3, 0), q(odd, 1, 1, 1)], vec![q(odd, 2, 0, 1)]]),
            (vec![vec![q(odd, 0, 1, 0)], vec![q(odd, 1, 1, 0)]], vec![vec![q(odd, 1, 1, 0)], vec![q(odd, 0, 1, 0)]]),
            (vec![vec![q(0, 0, 1, 0)]], vec![vec![q(odd, 0, 1, 0)], vec![q(0, 0, 1, 0)]]),
        ];
        for (gs, fs) in &cases {
            reps.push(fock::check_correlations(&free, gs, fs, &ph).unwrap());
        }
    }
    let (ok, detail) = summarize(&reps);
    line(6, "ZF relations (float 1e-12 at n_max=3, exact at n_max=2), H eigenvalues and commutativity, g^0 correlators", ok, &detail);
    assert!(ok);
}

#[test]
fn criterion_7_wellbred() {
    let t = Instant::now();
    let mut reps = vec![yangian::check_alpha_identity(8)];
    for (gr, n_max) in [(gl(1, 1), 3), (gl(2, 1), 2)] {
        let sp = FockSpace::build(gr, MomentumGrid::from_ints(&[-1, 1, 2]).unwrap(), n_max, GaussQ::frac(1, 3), Normalization::Factorial).unwrap();
        let w = WellBred::new(&sp);
        reps.push(w.check_wellbred_orders());
        reps.push(w.check_frt_symmetry(3));
        reps.push(w.check_gl_closure());
        reps.push(w.check_structure());
    }
    let el = t.elapsed();
    let (ok, detail) = summarize(&reps);
    let pass = ok && el < Duration::from_secs(300);
    line(7, "alpha identity N<=8; well-bred commutators, level-0 closure, T1T0 FRT mod identity, [T,H]=0; exact", pass, &format!("{detail}, {:.1}s (limit 300s)", el.as_secs_f64()));
    assert!(pass);
}

fn run_all_once(dir: &std::path::Path, name: &str) -> Vec<u8> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_nlss"))
        .args(["run", "all", "--seed", "7", "--no-timing", "--output"])
        .arg(&out)
        .stderr(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    assert!(status.success(), "run all reported a failing check");
    std::fs::read(out).unwrap()
}

#[test]
fn criterion_8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_all_once(dir.path(), "a.json");
    let b = run_all_once(dir.path(), "b.json");
    let pass = a == b && !a.is_empty();
    line(8, "run all twice with the same seed gives identical reports", pass, &format!("{} bytes each", a.len()));
    assert!(pass);
}
