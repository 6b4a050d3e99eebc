//! Check suites and the parallel runner.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use nlss_core::classical::{self, basis_matrix, gaussian_configuration, gaussian_profile, Conservation, FieldConfiguration};
use nlss_core::error::Error;
use nlss_core::fock::{self, FockRing, FockSpace, MomentumGrid, Normalization, Profile};
use nlss_core::grading::Grading;
use nlss_core::lax;
use nlss_core::matrix::SuperMatrix;
use nlss_core::quantum_rtt;
use nlss_core::rational::{GaussQ, Rational};
use nlss_core::report::CheckReport;
use nlss_core::rmatrix;
use nlss_core::rosales;
use nlss_core::yangian::{self, WellBred};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Mode, RunConfig};
use crate::profile::{load_profile, ProfileError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum Suite {
    Rmatrix,
    Rosales,
    Classical,
    Rtt,
    Fock,
    Yangian,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Rmatrix, Suite::Rosales, Suite::Classical, Suite::Rtt, Suite::Fock, Suite::Yangian];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Rmatrix => "rmatrix",
            Suite::Rosales => "rosales",
            Suite::Classical => "classical",
            Suite::Rtt => "rtt",
            Suite::Fock => "fock",
            Suite::Yangian => "yangian",
        }
    }

    /// A suite name or `all`.
    pub fn expand(name: &str) -> Option<Vec<Suite>> {
        if name == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().copied().find(|s| s.name() == name).map(|s| vec![s])
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug)]
pub enum RunError {
    NoSuites,
    Profile(ProfileError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::NoSuites => write!(f, "no suites selected"),
            RunError::Profile(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

type CheckFn = Box<dyn Fn() -> Result<CheckReport, Error> + Send + Sync>;

/// One named check of a suite.
pub struct Job {
    pub suite: Suite,
    pub id: String,
    run: CheckFn,
}

impl Job {
    fn new(suite: Suite, id: &str, run: impl Fn() -> Result<CheckReport, Error> + Send + Sync + 'static) -> Self {
        Job { suite, id: id.to_string(), run: Box::new(run) }
    }

    /// Runs the check; an error becomes a failed report carrying the message.
    pub fn execute(&self) -> CheckReport {
        let t = Instant::now();
        let mut r = match (self.run)() {
            Ok(r) => r,
            Err(e) => CheckReport::tolerance(&self.id, f64::NAN, 0.0, "not run").with_param("error", e),
        };
        r.runtime_ms = t.elapsed().as_millis() as u64;
        r
    }
}

/// Starting spacing of the convergence studies.
pub const CONSERVATION_SPACING: f64 = 0.25;
/// Monodromy fit: Gaussian width, grid spacing, half width, spectral
/// samples in `[5, 40]`, inverse powers fitted, RK4 substeps.
pub const HIERARCHY_WIDTH: f64 = 3.0;
pub const HIERARCHY_SPACING: f64 = 0.025;
pub const HIERARCHY_HALF_WIDTH: f64 = 13.5;
pub const HIERARCHY_SAMPLES: usize = 16;
pub const HIERARCHY_FIT_TERMS: usize = 9;
pub const HIERARCHY_SUBSTEPS: usize = 16;
pub const HIERARCHY_TOL: f64 = 1e-4;
/// Zero sites padded around loaded or generated profiles.
pub const PROFILE_MARGIN: usize = 5;

pub fn jobs(cfg: &RunConfig, suites: &[Suite]) -> Result<Vec<Job>, RunError> {
    if suites.is_empty() {
        return Err(RunError::NoSuites);
    }
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for &s in suites {
        if seen.contains(&s) {
            continue;
        }
        seen.push(s);
        match s {
            Suite::Rmatrix => rmatrix_jobs(cfg, &mut out),
            Suite::Rosales => rosales_jobs(cfg, &mut out),
            Suite::Classical => classical_jobs(cfg, &mut out)?,
            Suite::Rtt => rtt_jobs(cfg, &mut out),
            Suite::Fock => fock_jobs(cfg, &mut out),
            Suite::Yangian => yangian_jobs(cfg, &mut out),
        }
    }
    Ok(out)
}

/// Runs the selected suites on a rayon pool; reports come back in job
/// order regardless of scheduling.
pub fn run(cfg: &RunConfig, suites: &[Suite]) -> Result<Vec<CheckReport>, RunError> {
    let jobs = jobs(cfg, suites)?;
    Ok(jobs.par_iter().map(Job::execute).collect())
}

fn rmatrix_jobs(cfg: &RunConfig, out: &mut Vec<Job>) {
    let s = Suite::Rmatrix;
    let (gr, g, n, seed) = (cfg.grading(), cfg.g.clone(), cfg.samples, cfg.seed);
    let g2 = g.clone();
    out.push(Job::new(s, "rmatrix.properties", move || rmatrix::check_r_properties(gr, &g, n, seed)));
    out.push(Job::new(s, "rmatrix.yang_baxter", move || rmatrix::check_yang_baxter(gr, &g2, n, seed)));
    out.push(Job::new(s, "rmatrix.even", move || rmatrix::check_evenness(gr)));
    let g3 = cfg.g.clone();
    out.push(Job::new(s, "rmatrix.classical_limit", move || rmatrix::check_classical_limit(gr, &g3)));
}

fn rosales_jobs(cfg: &RunConfig, out: &mut Vec<Job>) {
    let s = Suite::Rosales;
    let (gr, order, sets, seed) = (cfg.grading(), cfg.order, cfg.mode_sets, cfg.seed);
    out.push(Job::new(s, "rosales.residual", move || rosales::check_rosales(gr, order, sets, seed)));
    let samples = cfg.samples.min(20);
    out.push(Job::new(s, "rosales.quadratic_identity", move || {
        Ok(rosales::probe_quadratic_identity(order + 1, samples, seed)?.with_param("role", "probe"))
    }));
}

/// All `K⁴` ordered pairs of basis matrices.
fn basis_pairs(gr: Grading) -> Vec<(SuperMatrix<GaussQ>, SuperMatrix<GaussQ>)> {
    let k = gr.k();
    let mut v = Vec::with_capacity(k.pow(4));
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for d in 0..k {
                    v.push((basis_matrix(gr, a, b), basis_matrix(gr, c, d)));
                }
            }
        }
    }
    v
}

/// `Σ_a (E_{a,M+a} + E_{M+a,a})`: the odd involution, which exists only
/// when `M = N`.
pub fn odd_involution(gr: Grading) -> Option<SuperMatrix<GaussQ>> {
    if gr.m != gr.n {
        return None;
    }
    let mut s = SuperMatrix::zero(gr);
    for a in 0..gr.m {
        s = s.add(&basis_matrix(gr, a, gr.m + a)).add(&basis_matrix(gr, gr.m + a, a));
    }
    Some(s)
}

/// Two even matrices with a nonzero supercommutator when the grading
/// allows it.
fn even_pair(gr: Grading) -> (SuperMatrix<GaussQ>, SuperMatrix<GaussQ>) {
    if gr.m >= 2 {
        (basis_matrix(gr, 0, 1), basis_matrix(gr, 1, 0))
    } else if gr.n >= 2 {
        (basis_matrix(gr, gr.m, gr.m + 1), basis_matrix(gr, gr.m + 1, gr.m))
    } else {
        (basis_matrix(gr, 0, 0), basis_matrix(gr, gr.k() - 1, gr.k() - 1))
    }
}

fn classical_jobs(cfg: &RunConfig, out: &mut Vec<Job>) -> Result<(), RunError> {
    let s = Suite::Classical;
    let gr = cfg.grading();
    let (sites, dx, g) = (cfg.sites, cfg.spacing.clone(), cfg.g.clone());
    {
        let dx = dx.clone();
        out.push(Job::new(s, "classical.lax_bracket", move || lax::check_lax_bracket(gr, 3, &dx)));
    }
    {
        let (dx, g) = (dx.clone(), g.clone());
        out.push(Job::new(s, "classical.q0_closure", move || classical::check_q0_closure(gr, sites, &dx, &g, &basis_pairs(gr), 2)));
    }
    {
        let g = g.clone();
        out.push(Job::new(s, "classical.supersymmetry", move || match odd_involution(gr) {
            Some(sigma) => classical::check_supersymmetry(gr, sites, &sigma, &g),
            None => Ok(CheckReport::exact("classical.supersymmetry", true, 0.0, &format!("gl({}|{})", gr.m, gr.n))
                .with_param("odd_involutions", 0)
                .with_param("note", "no odd sigma with sigma^2 = I unless M = N")),
        }));
    }

    let gf = cfg.g_f64();
    let amps = cfg.amplitudes_for(gr.k());
    let levels = cfg.levels;
    for order in 0..=2u8 {
        let amps = amps.clone();
        let id = format!("classical.conservation_hq{order}");
        let id2 = id.clone();
        out.push(Job::new(s, &id, move || {
            let which = Conservation::HQ { sigma: basis_matrix(gr, 0, 0), order };
            Ok(classical::check_conservation(&id2, &which, gr, CONSERVATION_SPACING, levels, gf, &amps)?.with_param("sigma", "E_11"))
        }));
    }
    {
        let amps = amps.clone();
        out.push(Job::new(s, "classical.q1q1", move || {
            let (sigma, omega) = even_pair(gr);
            classical::check_conservation("classical.q1q1", &Conservation::Q1Q1 { sigma, omega }, gr, CONSERVATION_SPACING, levels, gf, &amps)
        }));
    }

    let (lambda, mu) = (cfg.lambda, cfg.mu);
    {
        let amps = amps.clone();
        out.push(Job::new(s, "classical.rtt_truncated", move || lax::check_rtt_truncated(gr, lambda, mu, gf, 6.0, &[8, 16, 32], &amps)));
    }
    // the Ω-series converges fast only for weak fields
    let weak: Vec<Complex64> = amps.iter().map(|a| a * 0.1).collect();
    let n_series = cfg.order.max(2);
    let tol = cfg.tolerance.max(1e-8);
    {
        let weak = weak.clone();
        out.push(Job::new(s, "classical.transition", move || {
            let f = gaussian_configuration(gr, 0.025, 4.0, PROFILE_MARGIN, &weak)?;
            lax::check_transition(&f, gf, lambda, 4.max(n_series), 2, tol)
        }));
    }
    {
        let amps = amps.clone();
        out.push(Job::new(s, "classical.series_parity", move || {
            let f = gaussian_configuration(gr, 0.1, 3.0, 2, &amps)?;
            lax::check_series_parity(&f, gf, lambda, 4)
        }));
    }
    let profile: Arc<FieldConfiguration<Complex64>> = Arc::new(match &cfg.profile {
        Some(p) => load_profile(p, gr, HIERARCHY_SPACING, PROFILE_MARGIN).map_err(RunError::Profile)?,
        None => gaussian_profile(gr, HIERARCHY_SPACING, HIERARCHY_HALF_WIDTH, HIERARCHY_WIDTH, PROFILE_MARGIN, &amps)
            .map_err(|e| RunError::Profile(ProfileError::Core(e)))?,
    });
    let source = if cfg.profile.is_some() { "file" } else { "gaussian" };
    out.push(Job::new(s, "classical.hierarchy", move || {
        let lams = hierarchy_lambdas();
        let d = lax::monodromy_hierarchy(&profile, gf, &lams, HIERARCHY_SUBSTEPS, HIERARCHY_FIT_TERMS)?;
        Ok(lax::hierarchy_report("classical.hierarchy", &profile, gf, &d, HIERARCHY_TOL).with_param("profile", source))
    }));
    Ok(())
}

pub fn hierarchy_lambdas() -> Vec<f64> {
    let n = HIERARCHY_SAMPLES;
    (0..n).map(|i| 5.0 + 35.0 * i as f64 / (n - 1) as f64).collect()
}

fn rtt_jobs(cfg: &RunConfig, out: &mut Vec<Job>) {
    let s = Suite::Rtt;
    let gr = cfg.grading();
    out.push(Job::new(s, "rtt.rl_intertwine", move || quantum_rtt::check_rl_intertwine(gr)));
    out.push(Job::new(s, "rtt.r_pm", move || quantum_rtt::derive_r_pm(gr)));
    out.push(Job::new(s, "rtt.r_prime", move || quantum_rtt::check_r_prime_ybe(gr)));
    out.push(Job::new(s, "rtt.pi_nilpotent", move || Ok(quantum_rtt::check_pi_nilpotent(gr))));
}

/// Ring-specific construction of Fock spaces and sample coefficients.
trait FockMode: FockRing {
    const NORM: Normalization;
    fn coupling(g: &Rational) -> Self;
    fn sample(rng: &mut ChaCha8Rng) -> Self;
}

impl FockMode for GaussQ {
    const NORM: Normalization = Normalization::Factorial;
    fn coupling(g: &Rational) -> Self {
        GaussQ::real(g.clone())
    }
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        GaussQ::new(Rational::new(rng.gen_range(-4..=4), rng.gen_range(1..=3)), Rational::new(rng.gen_range(-4..=4), rng.gen_range(1..=3)))
    }
}

impl FockMode for Complex64 {
    const NORM: Normalization = Normalization::Unit;
    fn coupling(g: &Rational) -> Self {
        Complex64::new(g.to_f64(), 0.0)
    }
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }
}

fn space<R: FockMode>(gr: Grading, momenta: &[Rational], n_max: usize, g: &Rational) -> Result<FockSpace<R>, Error> {
    FockSpace::build(gr, MomentumGrid::new(momenta.to_vec())?, n_max, R::coupling(g), R::NORM)
}

/// One or two terms, all colors of one parity so the field is homogeneous.
fn random_profile<R: FockMode>(rng: &mut ChaCha8Rng, gr: Grading, p: usize) -> Profile<R> {
    let odd = if gr.m == 0 { true } else if gr.n == 0 { false } else { rng.gen_bool(0.5) };
    let colors = if odd { gr.m..gr.k() } else { 0..gr.m };
    let terms = rng.gen_range(1..=2);
    (0..terms).map(|_| (rng.gen_range(colors.clone()), rng.gen_range(0..p), R::sample(rng))).collect()
}

/// Order-`g⁰` correlators for every `(m, n)` with `m, n ≤ n_max`, random
/// test functions from the seed.
fn correlations<R: FockMode>(gr: Grading, momenta: &[Rational], n_max: usize, seed: u64) -> Result<CheckReport, Error> {
    let free = space::<R>(gr, momenta, n_max, &Rational::zero())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = momenta.len();
    let phase: Vec<R> = (0..p).map(|_| R::one()).collect();
    let mut parts = Vec::new();
    for m in 0..=n_max {
        for n in 0..=n_max {
            let gs: Vec<Profile<R>> = (0..m).map(|_| random_profile(&mut rng, gr, p)).collect();
            let fs: Vec<Profile<R>> = (0..n).map(|_| random_profile(&mut rng, gr, p)).collect();
            parts.push(fock::check_correlations(&free, &gs, &fs, &phase)?);
        }
    }
    Ok(CheckReport::combine("fock.correlator", &format!("gl({}|{}), m,n ≤ {n_max}", gr.m, gr.n), &parts).with_param("cases", parts.len()))
}

fn push_fock<R: FockMode>(cfg: &RunConfig, out: &mut Vec<Job>) {
    let s = Suite::Fock;
    let gr = cfg.grading();
    let (mom, n_max, g, seed) = (Arc::new(cfg.momenta.clone()), cfg.n_max, cfg.g.clone(), cfg.seed);
    let mk = move |id: &str, f: fn(&FockSpace<R>) -> Result<CheckReport, Error>| {
        let (mom, g) = (mom.clone(), g.clone());
        Job::new(s, id, move || f(&space::<R>(gr, &mom, n_max, &g)?))
    };
    out.push(mk("fock.zf", |sp| sp.check_zf()));
    out.push(mk("fock.zf_contact", |sp| sp.check_zf_contact()));
    out.push(mk("fock.projector_pbw", |sp| Ok(sp.check_projector_and_pbw())));
    out.push(mk("fock.hamiltonians", |sp| Ok(sp.check_hamiltonians(3))));
    let mom = cfg.momenta.clone();
    out.push(Job::new(s, "fock.correlator", move || correlations::<R>(gr, &mom, n_max, seed)));
}

fn fock_jobs(cfg: &RunConfig, out: &mut Vec<Job>) {
    match cfg.mode {
        Mode::Exact => push_fock::<GaussQ>(cfg, out),
        Mode::Float => push_fock::<Complex64>(cfg, out),
    }
    let gr = cfg.grading();
    let (mom, n_max, g) = (cfg.momenta.clone(), cfg.n_max, cfg.g.clone());
    out.push(Job::new(Suite::Fock, "fock.flow", move || {
        let sp = space::<Complex64>(gr, &mom, n_max, &g)?;
        let parts: Vec<CheckReport> = (0..=3).map(|r| fock::check_flow(&sp, r, 1.0)).collect();
        Ok(CheckReport::combine("fock.flow", "H^(0..=3), t=1", &parts))
    }));
}

fn push_yangian<R: FockMode>(cfg: &RunConfig, out: &mut Vec<Job>) {
    let s = Suite::Yangian;
    let gr = cfg.grading();
    let (mom, n_max, g) = (Arc::new(cfg.momenta.clone()), cfg.n_max, cfg.g.clone());
    let mk = move |id: &str, f: fn(&WellBred<R>) -> CheckReport| {
        let (mom, g) = (mom.clone(), g.clone());
        Job::new(s, id, move || {
            let sp = space::<R>(gr, &mom, n_max, &g)?;
            Ok(f(&WellBred::new(&sp)))
        })
    };
    out.push(mk("yangian.wellbred_orders", |w| w.check_wellbred_orders()));
    out.push(mk("yangian.frt_symmetry", |w| w.check_frt_symmetry(3)));
    out.push(mk("yangian.gl_closure", |w| w.check_gl_closure()));
    out.push(mk("yangian.structure", |w| w.check_structure()));
}

fn yangian_jobs(cfg: &RunConfig, out: &mut Vec<Job>) {
    out.push(Job::new(Suite::Yangian, "yangian.alpha_identity", || Ok(yangian::check_alpha_identity(8))));
    match cfg.mode {
        Mode::Exact => push_yangian::<GaussQ>(cfg, out),
        Mode::Float => push_yangian::<Complex64>(cfg, out),
    }
}
