use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;

/// Version of the flat per-grid-point CSV layout.
pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 9] = [
    "grid_value",
    "quantity",
    "n",
    "predicted",
    "empirical_mean",
    "empirical_std",
    "metric_name",
    "metric",
    "verdict",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub grid_value: f64,
    pub quantity: String,
    pub n: usize,
    pub predicted: Option<f64>,
    pub empirical_mean: f64,
    pub empirical_std: f64,
    /// Trials that produced a value.
    pub trials: usize,
    pub failed_trials: usize,
    pub metric_name: String,
    pub metric: Option<f64>,
    pub verdict: Option<bool>,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

/// A named scalar with an optional pass/fail judgement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// The configuration as run, defaults filled.
    pub config: ExperimentConfig,
    pub library_version: String,
    pub notes: Vec<String>,
    pub records: Vec<GridRecord>,
    pub summary: Vec<Metric>,
    pub curves: Vec<Curve>,
    pub warnings: Vec<String>,
    /// Excluded from serialization so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub(crate) fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            notes: Vec::new(),
            records: Vec::new(),
            summary: Vec::new(),
            curves: Vec::new(),
            warnings: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.summary.iter().find(|m| m.name == name)
    }

    pub fn records_for<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a GridRecord> + 'a {
        self.records.iter().filter(move |r| r.quantity == quantity)
    }

    /// Every per-trial seed used, in grid then trial order.
    pub fn seeds(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        for r in &self.records {
            for s in &r.seeds {
                if !out.contains(s) {
                    out.push(*s);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                fmt_f64(r.grid_value),
                r.quantity.clone(),
                r.n.to_string(),
                r.predicted.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.empirical_mean),
                fmt_f64(r.empirical_std),
                r.metric_name.clone(),
                r.metric.map(fmt_f64).unwrap_or_default(),
                r.verdict.map(|v| if v { "pass" } else { "fail" }.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}
