use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceSpec;
use crate::error::{Error, Result};
use crate::estimator::EntryDist;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Risk,
    TrainRisk,
    Spectrum,
    Bbp,
    PcaCompare,
}

impl Comparison {
    pub fn default_trials(self) -> usize {
        match self {
            Comparison::Risk | Comparison::TrainRisk | Comparison::PcaCompare => 20,
            Comparison::Spectrum | Comparison::Bbp => 5,
        }
    }
}

/// Settings that only some comparisons read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Extras {
    /// Spike strengths for outlier sweeps.
    pub thetas: Vec<f64>,
    /// Numbers of principal components for PCA comparisons over `alphas`.
    pub p_list: Vec<usize>,
    /// PCA fractions `p/d` for the large-sample comparison.
    pub gammas: Vec<f64>,
    /// Sample size of the large-sample PCA comparison.
    pub population_n: usize,
    pub bins: usize,
    /// Stieltjes offset; defaults to 1e-3 of the grid span.
    pub eta: Option<f64>,
    /// Distance above the predicted bulk edge that counts as an outlier.
    pub outlier_margin: f64,
    /// Relative-error tolerance for risks, W1 tolerance for spectra.
    pub tolerance: f64,
}

impl Default for Extras {
    fn default() -> Self {
        Self {
            thetas: Vec::new(),
            p_list: Vec::new(),
            gammas: Vec::new(),
            population_n: 20_000,
            bins: 100,
            eta: None,
            outlier_margin: 0.02,
            tolerance: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: CovarianceSpec,
    pub dim: usize,
    /// Sample ratios; each grid point uses `n = round(α·d)`.
    pub alphas: Vec<f64>,
    pub lambda: f64,
    /// Defaults to 20 for risk and PCA comparisons and 5 for spectra.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    pub master_seed: u64,
    #[serde(default)]
    pub entry_dist: EntryDist,
    pub comparison: Comparison,
    #[serde(default)]
    pub extras: Extras,
}

/// One violated constraint of a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    pub fn trials(&self) -> usize {
        self.trials.unwrap_or_else(|| self.comparison.default_trials())
    }

    /// Copy with defaults filled in and an AR(1) model at `ρ = 0` replaced by
    /// the identity.
    pub fn normalized(&self) -> Self {
        let mut c = self.clone();
        c.trials = Some(self.trials());
        if let CovarianceSpec::Toeplitz { rho } = c.model {
            if rho == 0.0 {
                c.model = CovarianceSpec::Identity;
            }
        }
        c
    }

    pub fn sample_size(&self, alpha: f64) -> usize {
        (alpha * self.dim as f64).round() as usize
    }

    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut push = |field: &str, message: String| {
            issues.push(ConfigIssue {
                field: field.to_string(),
                message,
            })
        };
        if self.dim < 2 {
            push("dim", format!("must be at least 2, got {}", self.dim));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            push("lambda", format!("must be a positive real, got {}", self.lambda));
        }
        if self.trials() == 0 {
            push("trials", "must be at least 1".into());
        }
        let needs_alphas = !(self.comparison == Comparison::PcaCompare && !self.extras.gammas.is_empty());
        if needs_alphas && self.alphas.is_empty() {
            push("alphas", "must contain at least one value".into());
        }
        for (k, &a) in self.alphas.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                push("alphas", format!("entry {k} must be positive, got {a}"));
            } else if self.sample_size(a) == 0 {
                push("alphas", format!("entry {k} gives n = round({a}·{}) = 0", self.dim));
            }
        }
        match self.comparison {
            Comparison::Spectrum => {
                if self.extras.bins < 20 {
                    push("extras.bins", format!("spectrum runs need at least 20 bins, got {}", self.extras.bins));
                }
                if let Some(eta) = self.extras.eta {
                    if !(eta.is_finite() && eta > 0.0) {
                        push("extras.eta", format!("must be positive, got {eta}"));
                    }
                }
            }
            Comparison::Bbp => {
                if !matches!(self.model, CovarianceSpec::Spiked { .. }) {
                    push("model", "outlier sweeps need a spiked model".into());
                }
                if self.extras.thetas.is_empty() {
                    push("extras.thetas", "must contain at least one value".into());
                }
                if self.extras.thetas.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                    push("extras.thetas", "entries must be nonnegative".into());
                }
                if self.alphas.len() > 1 {
                    push("alphas", "outlier sweeps take a single alpha".into());
                }
                if self.alphas.iter().any(|&a| a <= 1.0) {
                    push("alphas", "outlier predictions need alpha > 1".into());
                }
                if !(self.extras.outlier_margin >= 0.0) {
                    push("extras.outlier_margin", "must be nonnegative".into());
                }
            }
            Comparison::PcaCompare => {
                if self.extras.p_list.is_empty() && self.extras.gammas.is_empty() {
                    push("extras", "PCA comparisons need p_list or gammas".into());
                }
                for &p in &self.extras.p_list {
                    if p > self.dim {
                        push("extras.p_list", format!("p = {p} exceeds dim = {}", self.dim));
                    }
                }
                for &g in &self.extras.gammas {
                    if !(0.0..=1.0).contains(&g) {
                        push("extras.gammas", format!("entries must lie in [0, 1], got {g}"));
                    }
                }
                if !self.extras.gammas.is_empty() && self.extras.population_n == 0 {
                    push("extras.population_n", "must be at least 1".into());
                }
            }
            Comparison::Risk | Comparison::TrainRisk => {}
        }
        if !(self.extras.tolerance.is_finite() && self.extras.tolerance > 0.0) {
            push("extras.tolerance", "must be positive".into());
        }
        issues
    }

    pub(crate) fn check(&self) -> Result<()> {
        let issues = self.validate();
        if issues.is_empty() {
            return Ok(());
        }
        Err(Error::InvalidParameter {
            name: "config",
            reason: issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
        })
    }
}
