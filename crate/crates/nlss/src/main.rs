use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nlss::config::RunConfig;
use nlss::report::{emit_report, to_json};
use nlss::suites::{self, Suite};

#[derive(Parser)]
#[command(name = "nlss", version, about = "Identity checks for the graded nonlinear Schroedinger model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more suites (`all` selects every suite).
    Check {
        suites: Vec<String>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run every suite.
    Run {
        /// Must be `all`.
        what: String,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    /// key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Coupling as p/q or a decimal.
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    sites: Option<String>,
    #[arg(long)]
    spacing: Option<String>,
    /// Comma-separated momenta, e.g. -1,1/2,2.
    #[arg(long, allow_hyphen_values = true)]
    momenta: Option<String>,
    #[arg(long = "n-max")]
    n_max: Option<String>,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// exact or float.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long = "mode-sets")]
    mode_sets: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// Comma-separated complex amplitudes per color, e.g. 0.6,0.5+0.1i.
    #[arg(long, allow_hyphen_values = true)]
    amplitudes: Option<String>,
    /// Field-profile table for the monodromy fit.
    #[arg(long)]
    profile: Option<String>,
    /// Report path; stdout when absent.
    #[arg(long)]
    output: Option<String>,
    /// Write runtime_ms as 0 so repeated runs compare byte for byte.
    #[arg(long)]
    no_timing: bool,
}

impl Opts {
    fn overrides(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("m", &self.m),
            ("n", &self.n),
            ("g", &self.g),
            ("sites", &self.sites),
            ("spacing", &self.spacing),
            ("momenta", &self.momenta),
            ("n_max", &self.n_max),
            ("order", &self.order),
            ("seed", &self.seed),
            ("mode", &self.mode),
            ("tolerance", &self.tolerance),
            ("samples", &self.samples),
            ("mode_sets", &self.mode_sets),
            ("levels", &self.levels),
            ("lambda", &self.lambda),
            ("mu", &self.mu),
            ("amplitudes", &self.amplitudes),
            ("profile", &self.profile),
            ("output", &self.output),
        ];
        pairs.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (names, opts) = match cli.command {
        Command::Check { suites, opts } => (suites, opts),
        Command::Run { what, opts } => {
            if what != "all" {
                return usage(format!("`run` takes `all`, got {what:?}"));
            }
            (vec![what], opts)
        }
    };
    let mut selected = Vec::new();
    for name in &names {
        match Suite::expand(name) {
            Some(s) => selected.extend(s),
            None => return usage(format!("unknown suite {name:?}; expected one of rmatrix, rosales, classical, rtt, fock, yangian, all")),
        }
    }
    if selected.is_empty() {
        return usage("empty suite list");
    }
    let file = match &opts.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(text) => match RunConfig::parse_file(&text) {
                Ok(m) => m,
                Err(e) => return usage(format!("{}: {e}", p.display())),
            },
            Err(e) => return usage(format!("{}: {e}", p.display())),
        },
        None => BTreeMap::new(),
    };
    let cfg = match RunConfig::from_sources(&file, &opts.overrides()) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let reports = match suites::run(&cfg, &selected) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    let timing = !opts.no_timing;
    match &cfg.output {
        Some(p) => {
            if let Err(e) = emit_report(&reports, p, timing) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
        None => println!("{}", to_json(&reports, timing)),
    }
    for r in &reports {
        eprintln!("{} {} ({} ms)", if r.pass { "PASS" } else { "FAIL" }, r.check_id, r.runtime_ms);
    }
    if reports.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
