//! Run configuration: an optional `key=value` file overlaid by flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use nlss_core::grading::Grading;
use nlss_core::rational::Rational;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError { field: field.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub m: usize,
    pub n: usize,
    pub g: Rational,
    /// Sites of the formal grid used by the exact classical checks.
    pub sites: usize,
    pub spacing: Rational,
    pub momenta: Vec<Rational>,
    pub n_max: usize,
    /// Highest Rosales / transition series order.
    pub order: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Tolerance for float identities that are exact in principle.
    pub tolerance: f64,
    /// Random parameter sets per check.
    pub samples: usize,
    /// Mode sets per Rosales configuration.
    pub mode_sets: usize,
    /// Refinement levels for convergence checks.
    pub levels: usize,
    pub lambda: f64,
    pub mu: f64,
    /// Per-color amplitudes of the built-in Gaussian profile.
    pub amplitudes: Vec<Complex64>,
    pub profile: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

pub const KEYS: &[&str] = &[
    "m", "n", "g", "sites", "spacing", "momenta", "n_max", "order", "seed", "mode", "tolerance", "samples", "mode_sets", "levels",
    "lambda", "mu", "amplitudes", "profile", "output",
];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: 1,
            n: 1,
            g: Rational::new(1, 4),
            sites: 6,
            spacing: Rational::new(1, 2),
            momenta: vec![Rational::from_int(-1), Rational::new(1, 2), Rational::from_int(2)],
            n_max: 2,
            order: 3,
            seed: 1,
            mode: Mode::Exact,
            tolerance: 1e-12,
            samples: 50,
            mode_sets: 5,
            levels: 3,
            lambda: 1.3,
            mu: 0.4,
            amplitudes: Vec::new(),
            profile: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn grading(&self) -> Grading {
        Grading::new(self.m, self.n)
    }

    pub fn g_f64(&self) -> f64 {
        self.g.to_f64()
    }

    /// Amplitudes for `k` colors: the configured ones, or a fixed default
    /// pattern, cycled as needed.
    pub fn amplitudes_for(&self, k: usize) -> Vec<Complex64> {
        let base = if self.amplitudes.is_empty() {
            vec![Complex64::new(0.6, 0.0), Complex64::new(0.5, 0.1), Complex64::new(0.4, -0.2)]
        } else {
            self.amplitudes.clone()
        };
        (0..k).map(|j| base[j % base.len()]).collect()
    }

    /// Parses a `key=value` file body; `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(&format!("line {}", no + 1), "expected key=value"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(map)
    }

    /// Builds and validates a configuration from raw values; `overrides`
    /// win over `file`.
    pub fn from_sources(file: &BTreeMap<String, String>, overrides: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut merged = file.clone();
        merged.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
        let mut c = RunConfig::default();
        for (k, v) in &merged {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let uint = |v: &str| v.trim().parse::<usize>().map_err(|e| ConfigError::new(key, e.to_string()));
        let float = |v: &str| v.trim().parse::<f64>().map_err(|e| ConfigError::new(key, e.to_string()));
        match key {
            "m" => self.m = uint(v)?,
            "n" => self.n = uint(v)?,
            "g" => self.g = parse_rational(v).map_err(|e| ConfigError::new(key, e))?,
            "sites" => self.sites = uint(v)?,
            "spacing" => self.spacing = parse_rational(v).map_err(|e| ConfigError::new(key, e))?,
            "momenta" => {
                self.momenta = split_list(v).map(parse_rational).collect::<Result<_, _>>().map_err(|e| ConfigError::new(key, e))?
            }
            "n_max" => self.n_max = uint(v)?,
            "order" => self.order = uint(v)?,
            "seed" => self.seed = v.trim().parse().map_err(|e: std::num::ParseIntError| ConfigError::new(key, e.to_string()))?,
            "mode" => {
                self.mode = match v.trim() {
                    "exact" => Mode::Exact,
                    "float" => Mode::Float,
                    other => return Err(ConfigError::new(key, format!("expected exact or float, got {other:?}"))),
                }
            }
            "tolerance" => self.tolerance = float(v)?,
            "samples" => self.samples = uint(v)?,
            "mode_sets" => self.mode_sets = uint(v)?,
            "levels" => self.levels = uint(v)?,
            "lambda" => self.lambda = float(v)?,
            "mu" => self.mu = float(v)?,
            "amplitudes" => {
                self.amplitudes = split_list(v).map(parse_complex).collect::<Result<_, _>>().map_err(|e| ConfigError::new(key, e))?
            }
            "profile" => self.profile = Some(PathBuf::from(v.trim())),
            "output" => self.output = Some(PathBuf::from(v.trim())),
            other => return Err(ConfigError::new(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let k = self.m + self.n;
        if k == 0 || k > 4 {
            return Err(ConfigError::new("m", format!("need 1 ≤ m+n ≤ 4, got m+n = {k}")));
        }
        if !(5..=12).contains(&self.sites) {
            return Err(ConfigError::new("sites", "must lie in 5..=12"));
        }
        if self.spacing.signum() <= 0 {
            return Err(ConfigError::new("spacing", "must be positive"));
        }
        if self.momenta.is_empty() || self.momenta.len() > 6 {
            return Err(ConfigError::new("momenta", "need between 1 and 6 momenta"));
        }
        if self.momenta.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::new("momenta", "must be strictly increasing"));
        }
        if self.n_max > 4 {
            return Err(ConfigError::new("n_max", "must be at most 4"));
        }
        if self.order > 4 {
            return Err(ConfigError::new("order", "must be at most 4"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(ConfigError::new("tolerance", "must be a positive number"));
        }
        if self.samples == 0 {
            return Err(ConfigError::new("samples", "must be positive"));
        }
        if self.mode_sets == 0 {
            return Err(ConfigError::new("mode_sets", "must be positive"));
        }
        if self.levels < 2 {
            return Err(ConfigError::new("levels", "need at least 2 refinement levels"));
        }
        if !(self.lambda.is_finite() && self.mu.is_finite()) {
            return Err(ConfigError::new("lambda", "spectral parameters must be finite"));
        }
        if self.lambda == self.mu {
            return Err(ConfigError::new("mu", "must differ from lambda"));
        }
        Ok(())
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `p`, `p/q` or a finite decimal such as `-0.125`, read exactly.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if let Some(r) = Rational::parse(s) {
        return Ok(r);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(b) => (-1, b),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').ok_or_else(|| format!("not a rational: {s:?}"))?;
    let digits = format!("{int}{frac}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
        return Err(format!("not a rational: {s:?}"));
    }
    let num = Rational::parse(&format!("{}{digits}", if sign < 0 { "-" } else { "" }))
        .ok_or_else(|| format!("not a rational: {s:?}"))?;
    let den = Rational::parse(&format!("1{}", "0".repeat(frac.len()))).expect("power of ten");
    Ok(num.div(&den).expect("nonzero"))
}

/// `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`).
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("not a complex number: {s:?}");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let cut = (1..bytes.len()).rev().find(|&p| (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    let (re, im) = match cut {
        Some(p) => (&body[..p], &body[p..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("2/5").unwrap(), Rational::new(2, 5));
        assert_eq!(parse_rational("-3").unwrap(), Rational::from_int(-3));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn complexes() {
        assert_eq!(parse_complex("1+2i").unwrap(), Complex64::new(1.0, 2.0));
        assert_eq!(parse_complex("0.5-0.25i").unwrap(), Complex64::new(0.5, -0.25));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), Complex64::new(1e-3, 20.0));
        assert!(parse_complex("1+2j").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::parse_file("m = 2\n# comment\ng = 1/3\n").unwrap();
        let flags = BTreeMap::from([("g".to_string(), "2/7".to_string())]);
        let c = RunConfig::from_sources(&file, &flags).unwrap();
        assert_eq!((c.m, c.g.clone()), (2, Rational::new(2, 7)));
    }

    #[test]
    fn errors_name_the_field() {
        let bad = BTreeMap::from([("momenta".to_string(), "2, 1".to_string())]);
        assert_eq!(RunConfig::from_sources(&BTreeMap::new(), &bad).unwrap_err().field, "momenta");
        let unknown = BTreeMap::from([("colour".to_string(), "1".to_string())]);
        assert_eq!(RunConfig::from_sources(&BTreeMap::new(), &unknown).unwrap_err().field, "colour");
        let zero = BTreeMap::from([("m".to_string(), "0".to_string()), ("n".to_string(), "0".to_string())]);
        assert_eq!(RunConfig::from_sources(&BTreeMap::new(), &zero).unwrap_err().field, "m");
    }
}
