use std::time::Instant;

use super::config::{Comparison, ExperimentConfig};
use super::report::{Curve, ExperimentReport, Metric};
use super::sampling::sample_dataset;
use super::{run_trials, summarize, trial_seeds};
use crate::asymptotics::spectrum::{default_spectral_grid, predicted_spectral_density, universal_density};
use crate::covariance::{build_covariance, CovarianceModel};
use crate::error::{invalid, Result};
use crate::estimator::{fit_ssr, ssr_spectrum_empirical, EntryDist};
use crate::stats;

/// Density above this multiple of the median marks an atom excluded from W1.
pub const ATOM_FACTOR: f64 = 50.0;

/// Eigenvalues of `Â` for each seed, nondecreasing.
pub fn empirical_spectra(
    model: &CovarianceModel,
    n: usize,
    lambda: f64,
    seeds: &[u64],
    entry_dist: EntryDist,
) -> Result<Vec<Vec<f64>>> {
    let tasks: Vec<(usize, usize, u64)> = seeds.iter().enumerate().map(|(t, &s)| (0, t, s)).collect();
    run_trials(&tasks, |_, _, seed| {
        let data = sample_dataset(model, n, seed, entry_dist)?;
        ssr_spectrum_empirical(&fit_ssr(&data, lambda)?)
    })
    .into_iter()
    .collect()
}

/// Pooled empirical spectra of `Â` against the predicted density, per `α`.
pub fn run_spectrum_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let config = config.normalized();
    config.check()?;
    if config.comparison != Comparison::Spectrum {
        return Err(invalid("comparison", "spectrum experiments take `spectrum`"));
    }
    let model = build_covariance(&config.model, config.dim, Some(config.master_seed))?;
    let trials = config.trials();
    let tol = config.extras.tolerance;
    let mut report = ExperimentReport::new(config.clone());
    report.notes.push(format!(
        "{trials} trials pooled per grid point; predicted density by Stieltjes inversion on the default grid"
    ));
    for (g, &alpha) in config.alphas.iter().enumerate() {
        let n = config.sample_size(alpha);
        let seeds = trial_seeds(config.master_seed, g, trials);
        let spectra = empirical_spectra(&model, n, config.lambda, &seeds, config.entry_dist)?;
        let pooled: Vec<f64> = spectra.iter().flatten().copied().collect();
        let (grid, default_eta) = default_spectral_grid(&model, n, config.lambda)?;
        let eta = config.extras.eta.unwrap_or(default_eta);
        let predicted = predicted_spectral_density(&model, n, config.lambda, &grid, eta)?;
        report.warnings.extend(predicted.warnings.iter().map(|w| format!("alpha = {alpha}: {w}")));

        let (samples, pgrid, pdens, atoms) = if alpha < 1.0 {
            stats::exclude_atoms(&pooled, &predicted.grid, &predicted.density, ATOM_FACTOR)
        } else {
            (pooled.clone(), predicted.grid.clone(), predicted.density.clone(), Vec::new())
        };
        for (a, b) in &atoms {
            report.notes.push(format!("alpha = {alpha}: atom region [{a:.4}, {b:.4}] excluded from W1"));
        }
        let w1 = stats::wasserstein1_sample_density(&samples, &pgrid, &pdens)?;

        let mass = predicted.mass();
        let predicted_mean = stats::trapezoid(
            &predicted.grid,
            &predicted.grid.iter().zip(&predicted.density).map(|(x, p)| x * p).collect::<Vec<_>>(),
        ) / mass;
        let mut rec = summarize(alpha, "spectrum", n, Some(predicted_mean), &pooled, 0, seeds);
        rec.trials = spectra.len();
        rec.metric_name = "w1".into();
        rec.metric = Some(w1);
        rec.verdict = Some(w1 <= tol);
        let lefts: Vec<f64> = spectra.iter().map(|s| s[0]).collect();
        let rights: Vec<f64> = spectra.iter().map(|s| s[s.len() - 1]).collect();
        rec.details.insert("empirical_left_edge".into(), stats::mean_std(&lefts).0);
        rec.details.insert("empirical_right_edge".into(), stats::mean_std(&rights).0);
        rec.details.insert("predicted_left_edge".into(), predicted.support_estimate.0);
        rec.details.insert("predicted_right_edge".into(), predicted.support_estimate.1);
        rec.details.insert("predicted_mass".into(), mass);
        rec.details.insert("eta".into(), eta);
        rec.details.insert("failed_grid_points".into(), predicted.failed_points.len() as f64);
        if alpha > 1.0 && model.is_diagonal() {
            let uni = universal_density(alpha, None)?;
            rec.details.insert("w1_universal".into(), stats::wasserstein1_sample_density(&pooled, &uni.grid, &uni.density)?);
            rec.details.insert("universal_left_edge".into(), uni.support_estimate.0);
            rec.details.insert("universal_right_edge".into(), uni.support_estimate.1);
        }
        report.summary.push(Metric {
            name: format!("w1[alpha={alpha}]"),
            value: w1,
            tolerance: Some(tol),
            passed: Some(w1 <= tol),
        });
        report.summary.push(Metric {
            name: format!("predicted_mass[alpha={alpha}]"),
            value: mass,
            tolerance: Some(0.02),
            passed: Some((mass - 1.0).abs() <= 0.02),
        });

        let lo = pooled[0].min(predicted.grid[0]);
        let hi = pooled.iter().copied().fold(f64::MIN, f64::max).max(predicted.grid[predicted.grid.len() - 1]);
        let (edges, hist) = stats::histogram(&pooled, config.extras.bins, lo, hi)?;
        let centers = edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect();
        report.curves.push(Curve {
            name: format!("histogram[alpha={alpha}]"),
            x: centers,
            y: hist,
        });
        report.curves.push(Curve {
            name: format!("predicted[alpha={alpha}]"),
            x: predicted.grid.clone(),
            y: predicted.density.clone(),
        });
        report.records.push(rec);
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
