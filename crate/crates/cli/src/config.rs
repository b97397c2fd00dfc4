//! The CLI configuration document.
//!
//! One JSON object with five optional sections. Every key has a default, the
//! filled document is echoed into the run manifest, and rerunning the echo
//! reproduces the outputs byte for byte.
//!
//! ```json
//! {
//!   "model": {"kind": "toeplitz", "rho": 0.5},
//!   "grid": {"dim": 200, "alphas": [0.5, 2.0], "lambdas": [1e-4]},
//!   "solver": {"bins": 100},
//!   "experiment": {"trials": 10, "master_seed": 7},
//!   "output": {"dir": "out", "format": "both"}
//! }
//! ```

use std::path::{Path, PathBuf};

use maskridge::experiment::{Comparison, ConfigIssue, ExperimentConfig, Extras};
use maskridge::{CovarianceSpec, EntryDist};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// AR(1) correlations for `phase-curve`.
    pub rhos: Vec<f64>,
    /// Spike strengths for `bbp`.
    pub thetas: Vec<f64>,
    /// PCA fractions for the large-sample `compare-pca` mode.
    pub gammas: Vec<f64>,
    /// Component counts for the `compare-pca` sweep over `alphas`.
    pub p_list: Vec<usize>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            dim: 200,
            alphas: vec![2.0],
            lambdas: vec![0.01],
            rhos: (1..=9).map(|k| k as f64 / 10.0).collect(),
            thetas: Vec::new(),
            gammas: Vec::new(),
            p_list: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Stieltjes offset; `null` uses 1e-3 of the grid span.
    pub eta: Option<f64>,
    pub bins: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let extras = Extras::default();
        Self {
            eta: extras.eta,
            bins: extras.bins,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// `null` uses 20 for risk and PCA runs, 5 for spectra and outlier sweeps.
    pub trials: Option<usize>,
    pub master_seed: u64,
    pub entry_dist: EntryDist,
    pub tolerance: f64,
    pub outlier_margin: f64,
    pub population_n: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let extras = Extras::default();
        Self {
            trials: None,
            master_seed: 0,
            entry_dist: EntryDist::Gaussian,
            tolerance: extras.tolerance,
            outlier_margin: extras.outlier_margin,
            population_n: extras.population_n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("maskridge-out"),
            format: Format::Both,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub model: CovarianceSpec,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            model: CovarianceSpec::Identity,
            grid: GridSection::default(),
            solver: SolverSection::default(),
            experiment: ExperimentSection::default(),
            output: OutputSection::default(),
        }
    }
}

const SECTIONS: [&str; 5] = ["model", "grid", "solver", "experiment", "output"];

fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "grid" => &["dim", "alphas", "lambdas", "rhos", "thetas", "gammas", "p_list"],
        "solver" => &["eta", "bins"],
        "experiment" => &["trials", "master_seed", "entry_dist", "tolerance", "outlier_margin", "population_n"],
        "output" => &["dir", "format"],
        _ => &[],
    }
}

fn issue(field: impl Into<String>, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue {
        field: field.into(),
        message: message.into(),
    }
}

/// Every unknown section or key, so that all of them are reported at once
/// rather than only the first one serde meets.
fn unknown_keys(doc: &Value) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    let Some(top) = doc.as_object() else {
        return vec![issue("$", "the configuration must be a JSON object")];
    };
    for (name, value) in top {
        if !SECTIONS.contains(&name.as_str()) {
            issues.push(issue(name.clone(), format!("unknown section; expected one of {}", SECTIONS.join(", "))));
            continue;
        }
        if name == "model" {
            continue;
        }
        match value.as_object() {
            Some(obj) => {
                for key in obj.keys() {
                    if !known_keys(name).contains(&key.as_str()) {
                        issues.push(issue(format!("{name}.{key}"), "unknown key"));
                    }
                }
            }
            None => issues.push(issue(name.clone(), "must be a JSON object")),
        }
    }
    issues
}

impl CliConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Config(vec![issue("$", e.to_string())]))?;
        let unknown = unknown_keys(&doc);
        if !unknown.is_empty() {
            return Err(CliError::Config(unknown));
        }
        let mut issues = Vec::new();
        let mut config = CliConfig::default();
        let top = doc.as_object().expect("checked above");
        // Sections are decoded one at a time so a type error in one does not
        // hide errors in another.
        for (name, value) in top {
            let result = match name.as_str() {
                "model" => serde_json::from_value(value.clone()).map(|v| config.model = v),
                "grid" => serde_json::from_value(value.clone()).map(|v| config.grid = v),
                "solver" => serde_json::from_value(value.clone()).map(|v| config.solver = v),
                "experiment" => serde_json::from_value(value.clone()).map(|v| config.experiment = v),
                "output" => serde_json::from_value(value.clone()).map(|v| config.output = v),
                _ => Ok(()),
            };
            if let Err(e) = result {
                issues.push(issue(name.clone(), e.to_string()));
            }
        }
        if issues.is_empty() {
            Ok(config)
        } else {
            Err(CliError::Config(issues))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![issue("--config", format!("cannot read {}: {e}", path.display()))]))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serialization cannot fail")
    }

    /// The experiment configuration for one comparison at `lambda`.
    pub fn experiment(&self, comparison: Comparison, lambda: f64) -> ExperimentConfig {
        ExperimentConfig {
            model: self.model.clone(),
            dim: self.grid.dim,
            alphas: self.grid.alphas.clone(),
            lambda,
            trials: self.experiment.trials,
            master_seed: self.experiment.master_seed,
            entry_dist: self.experiment.entry_dist,
            comparison,
            extras: Extras {
                thetas: self.grid.thetas.clone(),
                p_list: self.grid.p_list.clone(),
                gammas: self.grid.gammas.clone(),
                population_n: self.experiment.population_n,
                bins: self.solver.bins,
                eta: self.solver.eta,
                outlier_margin: self.experiment.outlier_margin,
                tolerance: self.experiment.tolerance,
            },
        }
    }
}

/// Maps field names of the experiment configuration onto the CLI document.
pub fn cli_field(field: &str) -> String {
    let mapped = match field {
        "dim" | "alphas" => format!("grid.{field}"),
        "lambda" => "grid.lambdas".to_string(),
        "trials" | "master_seed" => format!("experiment.{field}"),
        "model" => "model".to_string(),
        f if f.starts_with("extras.") => {
            let key = &f["extras.".len()..];
            match key {
                "thetas" | "gammas" | "p_list" => format!("grid.{key}"),
                "bins" | "eta" => format!("solver.{key}"),
                "extras" => "grid".to_string(),
                _ => format!("experiment.{key}"),
            }
        }
        "extras" => "grid".to_string(),
        other => other.to_string(),
    };
    mapped
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(CliConfig::from_json("{}").unwrap(), CliConfig::default());
    }

    #[test]
    fn all_unknown_keys_are_listed() {
        let err = CliConfig::from_json(r#"{"grid": {"dims": 3, "alpha": 2}, "extra": 1}"#).unwrap_err();
        let CliError::Config(issues) = err else { panic!("expected a config error") };
        let fields: Vec<&str> = issues.iter().map(|i| i.field.as_str()).collect();
        assert_eq!(fields.len(), 3);
        assert!(fields.contains(&"grid.dims") && fields.contains(&"grid.alpha") && fields.contains(&"extra"));
    }

    #[test]
    fn echo_round_trips() {
        let mut c = CliConfig::default();
        c.grid.alphas = vec![0.5, 1.5];
        c.model = CovarianceSpec::Toeplitz { rho: 0.3 };
        assert_eq!(CliConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
