//! JSON report output. Field order is fixed; `params` keeps insertion order.

use std::io::Write;
use std::path::Path;

use nlss_core::report::{CheckReport, Residual};
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

struct Params<'a>(&'a [(String, String)]);

impl Serialize for Params<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

struct Wire<'a> {
    r: &'a CheckReport,
    timing: bool,
}

impl Serialize for Wire<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = self.r;
        let mut st = s.serialize_struct("CheckReport", 8)?;
        st.serialize_field("check_id", &r.check_id)?;
        st.serialize_field("params", &Params(&r.params))?;
        match &r.residual {
            Residual::Exact(text, _) => st.serialize_field("residual", text)?,
            Residual::Float(x) => st.serialize_field("residual", x)?,
        }
        st.serialize_field("tolerance", &r.tolerance)?;
        st.serialize_field("order_estimate", &r.order_estimate)?;
        st.serialize_field("domain", &r.domain)?;
        st.serialize_field("pass", &r.pass)?;
        st.serialize_field("runtime_ms", &if self.timing { r.runtime_ms } else { 0 })?;
        st.end()
    }
}

/// Pretty JSON array of reports. With `timing = false` every `runtime_ms`
/// is written as 0, so equal runs give byte-identical output.
pub fn to_json(reports: &[CheckReport], timing: bool) -> String {
    let wires: Vec<Wire> = reports.iter().map(|r| Wire { r, timing }).collect();
    serde_json::to_string_pretty(&wires).expect("reports serialize")
}

#[derive(Debug)]
pub struct EmitError {
    pub path: std::path::PathBuf,
    pub source: std::io::Error,
}

impl std::fmt::Display for EmitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cannot write report to {}: {}", self.path.display(), self.source)
    }
}

impl std::error::Error for EmitError {}

pub fn emit_report(reports: &[CheckReport], path: &Path, timing: bool) -> Result<(), EmitError> {
    let err = |source| EmitError { path: path.to_path_buf(), source };
    let mut f = std::fs::File::create(path).map_err(err)?;
    f.write_all(to_json(reports, timing).as_bytes()).map_err(err)?;
    f.write_all(b"\n").map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_bracket_pair() {
        assert_eq!(to_json(&[], true), "[]");
    }

    #[test]
    fn field_order_and_types() {
        let r = CheckReport::exact("x.y", true, 0.0, "d").with_param("b", 1).with_param("a", 2);
        let v: serde_json::Value = serde_json::from_str(&to_json(&[r], true)).unwrap();
        let o = v[0].as_object().unwrap();
        assert_eq!(o["residual"], "0");
        assert_eq!(o["pass"], true);
        assert!(o["order_estimate"].is_null());
        let text = to_json(&[CheckReport::tolerance("t", 1e-3, 1e-2, "d")], true);
        let keys = ["check_id", "params", "residual", "tolerance", "order_estimate", "domain", "pass", "runtime_ms"];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let r2 = CheckReport::exact("x", true, 0.0, "d").with_param("b", 1).with_param("a", 2);
        let t2 = to_json(&[r2], true);
        assert!(t2.find("\"b\"").unwrap() < t2.find("\"a\"").unwrap());
    }

    #[test]
    fn io_error_names_path() {
        let e = emit_report(&[], Path::new("/nonexistent-dir/r.json"), true).unwrap_err();
        assert!(e.to_string().contains("/nonexistent-dir/r.json"));
    }
}
