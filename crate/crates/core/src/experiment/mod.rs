//! Seeded Monte Carlo harness comparing fitted estimators with the
//! deterministic-equivalent predictions.
//!
//! Every trial owns a seed derived from `(master_seed, grid_index,
//! trial_index)`. Trials run in parallel and results are gathered in a fixed
//! order, so reports do not depend on scheduling.

pub mod bbp;
pub mod config;
pub mod pca;
pub mod report;
pub mod risk;
pub mod sampling;
pub mod spectrum;

use rayon::prelude::*;

pub use bbp::run_bbp_sweep;
pub use config::{Comparison, ConfigIssue, ExperimentConfig, Extras};
pub use pca::run_pca_comparison;
pub use report::{fmt_f64, Curve, ExperimentReport, GridRecord, Metric, CSV_HEADER, CSV_SCHEMA_VERSION};
pub use risk::run_risk_experiment;
pub use sampling::{derive_seed, sample_dataset, sample_entries};
pub use spectrum::{empirical_spectra, run_spectrum_experiment};

use crate::error::Result;
use crate::stats;

/// Runs whichever experiment the configuration's comparison names.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.comparison {
        Comparison::Risk | Comparison::TrainRisk => run_risk_experiment(config),
        Comparison::Spectrum => run_spectrum_experiment(config),
        Comparison::Bbp => run_bbp_sweep(config),
        Comparison::PcaCompare => run_pca_comparison(config),
    }
}

/// Sizes the global worker pool (`0` picks one worker per core) and keeps the
/// dense kernels single-threaded so parallelism lives at the trial level.
/// Has no effect on the pool once it has been built.
pub fn configure_threads(threads: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    faer::set_global_parallelism(faer::Par::Seq);
}

pub(crate) fn trial_seeds(master_seed: u64, grid_index: usize, trials: usize) -> Vec<u64> {
    (0..trials).map(|t| derive_seed(master_seed, grid_index as u64, t as u64)).collect()
}

/// Evaluates `f(grid_index, trial_index, seed)` for every task in parallel,
/// returning results in task order.
pub(crate) fn run_trials<T: Send>(
    tasks: &[(usize, usize, u64)],
    f: impl Fn(usize, usize, u64) -> Result<T> + Sync,
) -> Vec<Result<T>> {
    tasks.par_iter().map(|&(g, t, s)| f(g, t, s)).collect()
}

pub(crate) fn summarize(
    grid_value: f64,
    quantity: &str,
    n: usize,
    predicted: Option<f64>,
    values: &[f64],
    failed: usize,
    seeds: Vec<u64>,
) -> GridRecord {
    let (mean, std) = stats::mean_std(values);
    let mut rec = GridRecord {
        grid_value,
        quantity: quantity.to_string(),
        n,
        predicted,
        empirical_mean: mean,
        empirical_std: std,
        trials: values.len(),
        failed_trials: failed,
        metric_name: String::new(),
        metric: None,
        verdict: None,
        seeds,
        flags: Vec::new(),
        details: Default::default(),
    };
    if failed > 0 {
        rec.flags.push(format!("{failed} failed trials excluded"));
    }
    if n < 2 || (rec.trials > 1 && std > 0.25 * mean.abs()) {
        rec.flags.push("high_variance".into());
    }
    rec
}
