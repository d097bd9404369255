//! Experiment report schema and its serializations.
//!
//! The JSON layout is stable and versioned. Reports are deterministic
//! functions of (seed, params, version) except for `runtime_ms`; the
//! canonical serialization zeroes that field so byte comparison expresses
//! the reproducibility contract.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub n: usize,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub grid: GridMeta,
    pub params: BTreeMap<String, serde_json::Value>,
    pub ratios: Vec<RatioEntry>,
    pub envelope: f64,
    pub pass: bool,
    pub seed: u64,
    pub runtime_ms: u64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Serialization with the wall-clock field zeroed; identical inputs must
    /// produce byte-identical canonical output.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.runtime_ms = 0;
        clone.to_json()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Ratio table as `label,value` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,value\n");
        for r in &self.ratios {
            out.push_str(&format!("{},{}\n", r.label, r.value));
        }
        out.push_str(&format!("envelope,{}\n", self.envelope));
        out.push_str(&format!("pass,{}\n", if self.pass { 1 } else { 0 }));
        out
    }

    /// Human-readable rendering for `report render`.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "experiment: {} (schema v{})\n",
            self.experiment, self.schema_version
        ));
        out.push_str(&format!(
            "grid: n={} period={}\nseed: {}  runtime: {} ms\n",
            self.grid.n, self.grid.period, self.seed, self.runtime_ms
        ));
        if !self.params.is_empty() {
            out.push_str("params:\n");
            for (k, v) in &self.params {
                out.push_str(&format!("  {k} = {v}\n"));
            }
        }
        out.push_str("ratios:\n");
        let width = self
            .ratios
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(0);
        for r in &self.ratios {
            out.push_str(&format!("  {:width$}  {:.9e}\n", r.label, r.value));
        }
        out.push_str(&format!(
            "envelope: {:.9e}\nresult: {}\n",
            self.envelope,
            if self.pass { "PASS" } else { "FAIL" }
        ));
        out
    }

    pub fn find_ratio(&self, label: &str) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.label == label)
            .map(|r| r.value)
    }
}

/// Replace non-finite envelope values with a sentinel so the JSON stays
/// parseable; the pass flag is forced false alongside.
pub(crate) fn sanitize_envelope(envelope: f64, pass: bool) -> (f64, bool) {
    if envelope.is_finite() {
        (envelope, pass)
    } else {
        (f64::MAX, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ExperimentReport {
        let mut params = BTreeMap::new();
        params.insert("q".into(), serde_json::json!(1.5));
        params.insert("p".into(), serde_json::json!(3.0));
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            experiment: "sample".into(),
            grid: GridMeta {
                n: 256,
                period: 8.0,
            },
            params,
            ratios: vec![
                RatioEntry {
                    label: "a".into(),
                    value: 1.25,
                },
                RatioEntry {
                    label: "b".into(),
                    value: 0.5,
                },
            ],
            envelope: 1.25,
            pass: true,
            seed: 7,
            runtime_ms: 42,
        }
    }

    #[test]
    fn json_round_trips() {
        let r = sample_report();
        let parsed = ExperimentReport::from_json(&r.to_json()).unwrap();
        assert_eq!(parsed, r);
    }

    #[test]
    fn canonical_json_ignores_runtime() {
        let a = sample_report();
        let mut b = sample_report();
        b.runtime_ms = 99_999;
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert_ne!(a.to_json(), b.to_json());
    }

    #[test]
    fn csv_contains_every_ratio_and_the_flag() {
        let r = sample_report();
        let csv = r.to_csv();
        assert!(csv.contains("a,1.25"));
        assert!(csv.contains("b,0.5"));
        assert!(csv.contains("pass,1"));
    }

    #[test]
    fn render_mentions_pass_state() {
        let r = sample_report();
        assert!(r.render_table().contains("PASS"));
    }
}
