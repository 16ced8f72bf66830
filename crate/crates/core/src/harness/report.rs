use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Outcome of one check: `lhs ≤ C·rhs` for inequalities, `lhs = rhs` for identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// `C·rhs - lhs` for inequalities, `-|lhs - rhs|` for identities.
    pub margin: f64,
    pub pass: bool,
    pub tolerance: f64,
    /// SHA-256 of the JSON-serialized inputs.
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub instance: Option<u64>,
}

impl CheckReport {
    pub fn inequality(check: String, lhs: f64, rhs: f64, c: f64, tolerance: f64, inputs_digest: String) -> Self {
        let margin = rhs * c - lhs;
        CheckReport::build(check, lhs, rhs, c, margin, tolerance, inputs_digest)
    }

    pub fn identity(check: String, lhs: f64, rhs: f64, tolerance: f64, inputs_digest: String) -> Self {
        let margin = -(lhs - rhs).abs();
        CheckReport::build(check, lhs, rhs, 1.0, margin, tolerance, inputs_digest)
    }

    fn build(check: String, lhs: f64, rhs: f64, c: f64, margin: f64, tolerance: f64, inputs_digest: String) -> Self {
        // NaN margins fail
        let pass = margin >= -tolerance;
        CheckReport { check, lhs, rhs, c, margin, pass, tolerance, inputs_digest, seed: None, instance: None }
    }

    pub fn with_origin(mut self, seed: u64, instance: u64) -> Self {
        self.seed = Some(seed);
        self.instance = Some(instance);
        self
    }
}

pub fn digest<T: Serialize + ?Sized>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).expect("inputs serialize to JSON");
    hex::encode(Sha256::digest(bytes))
}

/// One JSON object per line.
pub fn render_json_lines(reports: &[CheckReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("reports serialize to JSON"));
        out.push('\n');
    }
    Ok(out)
}

pub fn csv_header() -> [&'static str; 7] {
    ["check", "lhs", "rhs", "C", "margin", "pass", "seed"]
}

/// Summary table; floats carry 17 significant digits.
pub fn render_csv(reports: &[CheckReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header()).expect("in-memory write");
    for r in reports {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([
            r.check.clone(),
            float(r.lhs),
            float(r.rhs),
            float(r.c),
            float(r.margin),
            r.pass.to_string(),
            seed,
        ])
        .expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub(crate) fn float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_pass() {
        let r = CheckReport::inequality("a".into(), 1.0, 0.5, 2.0, 1e-12, String::new());
        assert_eq!(r.margin, 0.0);
        assert!(r.pass);
        let r = CheckReport::inequality("a".into(), 1.0 + 1e-9, 0.5, 2.0, 1e-10, String::new());
        assert!(!r.pass);
        let r = CheckReport::identity("b".into(), 1.0, 1.0 + 1e-13, 1e-12, String::new());
        assert!(r.pass && r.margin < 0.0);
        let r = CheckReport::inequality("c".into(), f64::NAN, 1.0, 1.0, 1.0, String::new());
        assert!(!r.pass);
    }

    #[test]
    fn renderings() {
        let r = CheckReport::inequality("leinc[p=2,0<=1]".into(), 0.1, 0.3, 1.0, 1e-12, digest("x")).with_origin(7, 3);
        let lines = render_json_lines(&[r.clone(), r.clone()]).unwrap();
        assert_eq!(lines.lines().count(), 2);
        let back: CheckReport = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
        assert_eq!(back, r);
        let table = render_csv(&[r]).unwrap();
        let mut rows = table.lines();
        assert_eq!(rows.next(), Some("check,lhs,rhs,C,margin,pass,seed"));
        assert_eq!(
            rows.next(),
            Some("\"leinc[p=2,0<=1]\",1.0000000000000001e-1,2.9999999999999999e-1,1.0000000000000000e0,1.9999999999999998e-1,true,7")
        );
        assert_eq!(digest("x").len(), 64);
    }
}
