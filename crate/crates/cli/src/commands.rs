//! One function per subcommand. Each validates its slice of the configuration
//! before computing and returns the artifacts to write.

use maskridge::asymptotics::{
    ar1_phase_boundary, ar1_phase_boundary_bisection, ar1_population_ssr_loss, predict_risk,
};
use maskridge::experiment::{
    fmt_f64, run_bbp_sweep, run_pca_comparison, run_risk_experiment, run_spectrum_experiment, Comparison,
    ConfigIssue, ExperimentReport,
};
use maskridge::{build_covariance, Error};
use serde::Serialize;

use crate::config::{cli_field, CliConfig, Format};
use crate::error::CliError;

/// Version of the per-subcommand CSV layouts written by this binary.
pub const CLI_CSV_SCHEMA_VERSION: u32 = 1;

pub const PREDICT_HEADER: [&str; 11] =
    ["alpha", "lambda", "n", "kappa", "df1", "df2", "l1", "gen_error", "train_error", "l_app", "status"];
pub const PHASE_HEADER: [&str; 4] = ["rho", "gamma_star", "gamma_star_bisection", "ssr_population_loss"];
pub const CURVE_HEADER: [&str; 4] = ["series", "alpha", "x", "y"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Predicted risks over the alpha x lambda grid.
    Predict,
    /// Monte Carlo risks against predictions over alphas.
    Simulate,
    /// Empirical spectrum histograms against the predicted density.
    Spectrum,
    /// Outlier eigenvalue sweep over spike strengths.
    Bbp,
    /// AR(1) phase boundary over a correlation grid.
    PhaseCurve,
    /// Masked ridge against PCA.
    ComparePca,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Predict => "predict",
            Command::Simulate => "simulate",
            Command::Spectrum => "spectrum",
            Command::Bbp => "bbp",
            Command::PhaseCurve => "phase-curve",
            Command::ComparePca => "compare-pca",
        }
    }

    fn comparison(self) -> Option<Comparison> {
        match self {
            Command::Simulate => Some(Comparison::Risk),
            Command::Spectrum => Some(Comparison::Spectrum),
            Command::Bbp => Some(Comparison::Bbp),
            Command::ComparePca => Some(Comparison::PcaCompare),
            Command::Predict | Command::PhaseCurve => None,
        }
    }
}

/// A file to write into the output directory.
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub seeds: Vec<u64>,
    pub warnings: Vec<String>,
    /// Some grid points or trials failed numerically; artifacts are still written.
    pub partial_failure: bool,
}

fn issue(field: impl Into<String>, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue {
        field: field.into(),
        message: message.into(),
    }
}

fn positive_list(issues: &mut Vec<ConfigIssue>, field: &str, values: &[f64]) {
    if values.is_empty() {
        issues.push(issue(field, "must contain at least one value"));
    }
    for (k, v) in values.iter().enumerate() {
        if !(v.is_finite() && *v > 0.0) {
            issues.push(issue(field, format!("entry {k} must be a positive real, got {v}")));
        }
    }
}

/// All configuration problems for `command`, checked before any compute.
pub fn validate(command: Command, config: &CliConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    match command {
        Command::PhaseCurve => {
            if config.grid.rhos.is_empty() {
                issues.push(issue("grid.rhos", "must contain at least one value"));
            }
            for (k, r) in config.grid.rhos.iter().enumerate() {
                if !(*r > 0.0 && *r < 1.0) {
                    issues.push(issue("grid.rhos", format!("entry {k} must lie in (0, 1), got {r}")));
                }
            }
            return issues;
        }
        Command::Predict => {
            if config.grid.dim < 2 {
                issues.push(issue("grid.dim", format!("must be at least 2, got {}", config.grid.dim)));
            }
            positive_list(&mut issues, "grid.alphas", &config.grid.alphas);
            positive_list(&mut issues, "grid.lambdas", &config.grid.lambdas);
        }
        _ => {
            if config.grid.lambdas.len() != 1 {
                issues.push(issue(
                    "grid.lambdas",
                    format!("{} takes exactly one lambda, got {}", command.name(), config.grid.lambdas.len()),
                ));
            }
            let lambda = config.grid.lambdas.first().copied().unwrap_or(f64::NAN);
            let exp = config.experiment(command.comparison().expect("experiment command"), lambda);
            for i in exp.validate() {
                if i.field == "lambda" && config.grid.lambdas.is_empty() {
                    continue;
                }
                issues.push(issue(cli_field(&i.field), i.message));
            }
        }
    }
    if config.grid.dim >= 2 {
        if let Err(e) = build_covariance(&config.model, config.grid.dim, Some(config.experiment.master_seed)) {
            issues.push(issue("model", e.to_string()));
        }
    }
    issues
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory cannot fail");
    for r in rows {
        w.write_record(r).expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

fn json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serialization cannot fail")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

#[derive(Serialize)]
struct PredictRow {
    alpha: f64,
    lambda: f64,
    n: usize,
    kappa: Option<f64>,
    df1: Option<f64>,
    df2: Option<f64>,
    l1: Option<f64>,
    gen_error: Option<f64>,
    train_error: Option<f64>,
    l_app: Option<f64>,
    status: String,
}

fn predict(config: &CliConfig, format: Format) -> Result<RunOutput, CliError> {
    let d = config.grid.dim;
    let model = build_covariance(&config.model, d, Some(config.experiment.master_seed))?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut partial_failure = false;
    for &lambda in &config.grid.lambdas {
        for &alpha in &config.grid.alphas {
            let n = ((alpha * d as f64).round() as usize).max(1);
            let mut row = PredictRow {
                alpha,
                lambda,
                n,
                kappa: None,
                df1: None,
                df2: None,
                l1: None,
                gen_error: None,
                train_error: None,
                l_app: None,
                status: "ok".into(),
            };
            match predict_risk(&model, n, lambda) {
                Ok(p) => {
                    row.kappa = Some(p.kappa);
                    row.df1 = Some(p.df1);
                    row.df2 = Some(p.df2);
                    row.l1 = Some(p.l1);
                    row.gen_error = Some(p.gen_error);
                    row.train_error = Some(p.train_error);
                    row.l_app = p.l_app;
                }
                Err(Error::Divergent { df2, .. }) => {
                    row.df2 = Some(df2);
                    row.status = "divergent".into();
                }
                Err(e) => {
                    partial_failure = true;
                    warnings.push(format!("alpha = {alpha}, lambda = {lambda}: {e}"));
                    row.status = "failed".into();
                }
            }
            rows.push(row);
        }
    }
    let mut artifacts = Vec::new();
    if format.csv() {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.alpha),
                    fmt_f64(r.lambda),
                    r.n.to_string(),
                    opt(r.kappa),
                    opt(r.df1),
                    opt(r.df2),
                    opt(r.l1),
                    opt(r.gen_error),
                    opt(r.train_error),
                    opt(r.l_app),
                    r.status.clone(),
                ]
            })
            .collect();
        artifacts.push(Artifact {
            name: "predict.csv".into(),
            contents: csv_string(&PREDICT_HEADER, &table),
        });
    }
    if format.json() {
        artifacts.push(Artifact {
            name: "predict.json".into(),
            contents: json_string(&rows),
        });
    }
    Ok(RunOutput {
        artifacts,
        seeds: Vec::new(),
        warnings,
        partial_failure,
    })
}

#[derive(Serialize)]
struct PhaseRow {
    rho: f64,
    gamma_star: f64,
    gamma_star_bisection: f64,
    ssr_population_loss: f64,
}

fn phase_curve(config: &CliConfig, format: Format) -> Result<RunOutput, CliError> {
    let mut rows = Vec::new();
    for &rho in &config.grid.rhos {
        rows.push(PhaseRow {
            rho,
            gamma_star: ar1_phase_boundary(rho)?,
            gamma_star_bisection: ar1_phase_boundary_bisection(rho)?,
            ssr_population_loss: ar1_population_ssr_loss(rho, 0.0)?,
        });
    }
    let mut artifacts = Vec::new();
    if format.csv() {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.rho),
                    fmt_f64(r.gamma_star),
                    fmt_f64(r.gamma_star_bisection),
                    fmt_f64(r.ssr_population_loss),
                ]
            })
            .collect();
        artifacts.push(Artifact {
            name: "phase_curve.csv".into(),
            contents: csv_string(&PHASE_HEADER, &table),
        });
    }
    if format.json() {
        artifacts.push(Artifact {
            name: "phase_curve.json".into(),
            contents: json_string(&rows),
        });
    }
    Ok(RunOutput {
        artifacts,
        seeds: Vec::new(),
        warnings: Vec::new(),
        partial_failure: false,
    })
}

/// Histogram and predicted-density curves in long format.
fn curves_csv(report: &ExperimentReport) -> String {
    let mut rows = Vec::new();
    for curve in &report.curves {
        // Curve names look like `histogram[alpha=3]`.
        let (series, alpha) = match curve.name.split_once("[alpha=") {
            Some((s, rest)) => (s.to_string(), rest.trim_end_matches(']').to_string()),
            None => (curve.name.clone(), String::new()),
        };
        for (x, y) in curve.x.iter().zip(&curve.y) {
            rows.push(vec![series.clone(), alpha.clone(), fmt_f64(*x), fmt_f64(*y)]);
        }
    }
    csv_string(&CURVE_HEADER, &rows)
}

fn experiment(command: Command, config: &CliConfig, format: Format) -> Result<RunOutput, CliError> {
    let comparison = command.comparison().expect("experiment command");
    let exp = config.experiment(comparison, config.grid.lambdas[0]);
    let report = match comparison {
        Comparison::Risk | Comparison::TrainRisk => run_risk_experiment(&exp)?,
        Comparison::Spectrum => run_spectrum_experiment(&exp)?,
        Comparison::Bbp => run_bbp_sweep(&exp)?,
        Comparison::PcaCompare => run_pca_comparison(&exp)?,
    };
    let stem = command.name().replace('-', "_");
    let mut artifacts = Vec::new();
    if format.csv() {
        artifacts.push(Artifact {
            name: format!("{stem}.csv"),
            contents: report.to_csv(),
        });
        if comparison == Comparison::Spectrum {
            artifacts.push(Artifact {
                name: "spectrum_curves.csv".into(),
                contents: curves_csv(&report),
            });
        }
    }
    if format.json() {
        artifacts.push(Artifact {
            name: format!("{stem}.json"),
            contents: report.to_json(),
        });
    }
    let partial_failure = report.records.iter().any(|r| r.failed_trials > 0);
    Ok(RunOutput {
        artifacts,
        seeds: report.seeds(),
        warnings: report.warnings.clone(),
        partial_failure,
    })
}

pub fn execute(command: Command, config: &CliConfig) -> Result<RunOutput, CliError> {
    let issues = validate(command, config);
    if !issues.is_empty() {
        return Err(CliError::Config(issues));
    }
    let format = config.output.format;
    match command {
        Command::Predict => predict(config, format),
        Command::PhaseCurve => phase_curve(config, format),
        _ => experiment(command, config, format),
    }
}
