//! Outcome of a single identity check.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub enum Residual {
    /// Exact-ring residual: `"0"` when it vanishes, otherwise the size of
    /// the largest surviving coefficient.
    Exact(String, f64),
    Float(f64),
}

impl Residual {
    pub fn as_f64(&self) -> f64 {
        match self {
            Residual::Exact(_, x) | Residual::Float(x) => *x,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check_id: String,
    pub params: Vec<(String, String)>,
    pub residual: Residual,
    pub tolerance: f64,
    pub order_estimate: Option<f64>,
    pub domain: String,
    pub pass: bool,
    pub runtime_ms: u64,
}

/// Residual magnitudes at or below this are treated as converged outright.
pub const CONVERGED_FLOOR: f64 = 1e-13;

impl CheckReport {
    fn base(id: &str, residual: Residual, tolerance: f64, domain: &str, pass: bool) -> Self {
        CheckReport {
            check_id: id.to_string(),
            params: Vec::new(),
            residual,
            tolerance,
            order_estimate: None,
            domain: domain.to_string(),
            pass,
            runtime_ms: 0,
        }
    }

    /// Exact identity: passes iff the residual is exactly zero. `magnitude`
    /// is only used for the printed value when it is not.
    pub fn exact(id: &str, is_zero: bool, magnitude: f64, domain: &str) -> Self {
        let r = if is_zero {
            Residual::Exact(String::from("0"), 0.0)
        } else {
            Residual::Exact(alloc::format!("{magnitude:e}"), magnitude)
        };
        Self::base(id, r, 0.0, domain, is_zero)
    }

    pub fn tolerance(id: &str, residual: f64, tolerance: f64, domain: &str) -> Self {
        let pass = residual.is_finite() && residual <= tolerance;
        Self::base(id, Residual::Float(residual), tolerance, domain, pass)
    }

    /// Convergence check from residuals at successively halved spacings.
    /// Passes when the residual decreases at every level and the smallest
    /// observed order is at least `declared_order`, or when every residual
    /// already sits below `CONVERGED_FLOOR`.
    pub fn convergence(id: &str, residuals: &[f64], declared_order: f64, domain: &str) -> Self {
        let est = order_estimate(residuals);
        let floor = residuals.iter().all(|r| *r <= CONVERGED_FLOOR);
        let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
        let pass = floor || (decreasing && est.map_or(false, |o| o >= declared_order));
        let last = residuals.last().copied().unwrap_or(f64::NAN);
        let mut r = Self::base(id, Residual::Float(last), CONVERGED_FLOOR, domain, pass);
        r.order_estimate = est;
        r.params.push(("declared_order".into(), alloc::format!("{declared_order}")));
        r.params.push((
            "level_residuals".into(),
            residuals.iter().map(|x| alloc::format!("{x:e}")).collect::<Vec<_>>().join(","),
        ));
        r
    }

    pub fn with_param(mut self, k: &str, v: impl ToString) -> Self {
        self.params.push((k.to_string(), v.to_string()));
        self
    }

    /// Merges several reports over the same identity into one: worst
    /// residual, conjunction of pass flags.
    pub fn combine(id: &str, domain: &str, parts: &[CheckReport]) -> Self {
        let pass = parts.iter().all(|p| p.pass);
        let exact = parts.iter().all(|p| matches!(p.residual, Residual::Exact(..)));
        let worst = parts.iter().map(|p| p.residual.as_f64()).fold(0.0, f64::max);
        let mut r = if exact {
            Self::exact(id, worst == 0.0 && pass, worst, domain)
        } else {
            let tol = parts.iter().map(|p| p.tolerance).fold(0.0, f64::max);
            Self::base(id, Residual::Float(worst), tol, domain, pass)
        };
        r.pass = pass;
        r.order_estimate = parts.iter().filter_map(|p| p.order_estimate).reduce(f64::min);
        r
    }
}

/// Smallest observed `log2(r_k / r_{k+1})` over consecutive levels.
pub fn order_estimate(residuals: &[f64]) -> Option<f64> {
    residuals
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| libm::log2(w[0] / w[1]))
        .reduce(f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_rules() {
        let r = CheckReport::convergence("x", &[1e-2, 2.5e-3, 6.25e-4], 1.0, "");
        assert!(r.pass);
        assert!((r.order_estimate.unwrap() - 2.0).abs() < 1e-12);
        let r = CheckReport::convergence("x", &[1e-2, 9e-3, 8e-3], 1.0, "");
        assert!(!r.pass);
        let r = CheckReport::convergence("x", &[1e-15, 2e-15, 1e-15], 1.0, "");
        assert!(r.pass);
    }

    #[test]
    fn exact_rules() {
        assert!(CheckReport::exact("x", true, 0.0, "").pass);
        let r = CheckReport::exact("x", false, 0.5, "");
        assert!(!r.pass);
        assert_eq!(r.residual, Residual::Exact("5e-1".into(), 0.5));
    }
}
