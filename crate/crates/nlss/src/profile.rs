//! Field-profile tables.
//!
//! One row per nonzero value: `site color re im gen`, whitespace
//! separated, `#` comments. `gen` is 0 for a bosonic color; a fermionic
//! value is `(re + i·im)·θ_gen`. Sites are interior sites starting at 0; the
//! loader pads `margin` zero sites on each side.

use std::fmt;
use std::path::{Path, PathBuf};

use nlss_core::classical::FieldConfiguration;
use nlss_core::grading::Grading;
use nlss_core::grassmann::{make_gen, SuperScalar};
use num_complex::Complex64;

/// Generator indices from profile files start here so they never meet the
/// formal field generators.
const PROFILE_GEN_BASE: u32 = 0x3000_0000;

#[derive(Debug)]
pub enum ProfileError {
    Io(PathBuf, std::io::Error),
    Parse { line: usize, message: String },
    Core(nlss_core::error::Error),
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            ProfileError::Parse { line, message } => write!(f, "profile line {line}: {message}"),
            ProfileError::Core(e) => write!(f, "profile: {e}"),
        }
    }
}

impl std::error::Error for ProfileError {}

pub fn parse_profile(text: &str, grading: Grading, spacing: f64, margin: usize) -> Result<FieldConfiguration<Complex64>, ProfileError> {
    let k = grading.k();
    let mut rows: Vec<(usize, usize, Complex64, u32)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ProfileError::Parse { line: no + 1, message };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(err(format!("expected 5 columns, got {}", cols.len())));
        }
        let site: usize = cols[0].parse().map_err(|_| err(format!("bad site {:?}", cols[0])))?;
        let color: usize = cols[1].parse().map_err(|_| err(format!("bad color {:?}", cols[1])))?;
        let re: f64 = cols[2].parse().map_err(|_| err(format!("bad real part {:?}", cols[2])))?;
        let im: f64 = cols[3].parse().map_err(|_| err(format!("bad imaginary part {:?}", cols[3])))?;
        let gen: u32 = cols[4].parse().map_err(|_| err(format!("bad generator id {:?}", cols[4])))?;
        if color >= k {
            return Err(err(format!("color {color} out of range for K = {k}")));
        }
        if grading.is_odd(color) != (gen != 0) {
            return Err(err(format!("color {color} needs {} generator id", if grading.is_odd(color) { "a nonzero" } else { "a zero" })));
        }
        if gen >= (1 << 28) {
            return Err(err(format!("generator id {gen} too large")));
        }
        rows.push((site, color, Complex64::new(re, im), gen));
    }
    let interior = rows.iter().map(|r| r.0 + 1).max().unwrap_or(1);
    let mut phi = vec![vec![SuperScalar::zero(); k]; interior + 2 * margin];
    for (site, color, v, gen) in rows {
        let term = if gen == 0 { SuperScalar::scalar(v) } else { SuperScalar::term(&[make_gen(PROFILE_GEN_BASE + gen, true, false)], v) };
        phi[site + margin][color].add_assign(&term);
    }
    FieldConfiguration::from_values(grading, Complex64::new(spacing, 0.0), margin, phi).map_err(ProfileError::Core)
}

pub fn load_profile(path: &Path, grading: Grading, spacing: f64, margin: usize) -> Result<FieldConfiguration<Complex64>, ProfileError> {
    let text = std::fs::read_to_string(path).map_err(|e| ProfileError::Io(path.to_path_buf(), e))?;
    parse_profile(&text, grading, spacing, margin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pads_and_tags_fermions() {
        let g = Grading::new(1, 1);
        let f = parse_profile("0 0 0.5 0 0\n2 1 0.1 -0.2 7  # fermion\n", g, 0.1, 5).unwrap();
        assert_eq!(f.sites(), 13);
        assert_eq!(f.phi(5, 0).body(), Complex64::new(0.5, 0.0));
        assert!(f.phi(7, 1).is_odd());
    }

    #[test]
    fn rejects_bad_rows() {
        let g = Grading::new(1, 1);
        assert!(matches!(parse_profile("0 1 1 0 0", g, 0.1, 5), Err(ProfileError::Parse { line: 1, .. })));
        assert!(matches!(parse_profile("0 0 1 0", g, 0.1, 5), Err(ProfileError::Parse { .. })));
        assert!(matches!(parse_profile("0 3 1 0 0", g, 0.1, 5), Err(ProfileError::Parse { .. })));
    }
}
