use std::time::Instant;

use super::config::{Comparison, ExperimentConfig};
use super::report::{ExperimentReport, Metric};
use super::sampling::sample_dataset;
use super::{run_trials, summarize, trial_seeds};
use crate::asymptotics::spiked::bbp_prediction;
use crate::covariance::{build_covariance, CovarianceSpec};
use crate::error::{invalid, Result};
use crate::estimator::{fit_ssr, ssr_spectrum_empirical};
use crate::stats;

/// First grid value from which every later value is flagged, with the grid
/// sorted ascending.
pub fn first_sustained(grid: &[f64], flags: &[bool]) -> Option<f64> {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut found = None;
    for &k in order.iter().rev() {
        if flags[k] {
            found = Some(grid[k]);
        } else {
            break;
        }
    }
    found
}

/// Top two eigenvalues of `Â` across a grid of spike strengths. A trial shows
/// an outlier when its top eigenvalue exceeds the predicted bulk edge by the
/// configured margin; the transition estimate is the first `θ` from which a
/// majority of trials show one at every larger `θ`.
pub fn run_bbp_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let config = config.normalized();
    config.check()?;
    if config.comparison != Comparison::Bbp {
        return Err(invalid("comparison", "outlier sweeps take `bbp`"));
    }
    let CovarianceSpec::Spiked { spike, .. } = &config.model else {
        return Err(invalid("model", "outlier sweeps need a spiked model"));
    };
    let alpha = config.alphas[0];
    let n = config.sample_size(alpha);
    let trials = config.trials();
    let margin = config.extras.outlier_margin;
    let mut report = ExperimentReport::new(config.clone());
    report.notes.push(format!(
        "{trials} trials per theta; outlier when the top eigenvalue exceeds the predicted bulk edge by {margin}"
    ));
    report.notes.push("spike direction drawn once per dimension from its seed and shared across theta".into());

    let mut outliers = Vec::new();
    for (g, &theta) in config.extras.thetas.iter().enumerate() {
        let spec = CovarianceSpec::Spiked {
            theta,
            spike: spike.clone(),
        };
        let model = build_covariance(&spec, config.dim, Some(config.master_seed))?;
        let prediction = bbp_prediction(alpha, theta)?;
        let edge = prediction.s2;
        let seeds = trial_seeds(config.master_seed, g, trials);
        let tasks: Vec<(usize, usize, u64)> = seeds.iter().enumerate().map(|(t, &s)| (g, t, s)).collect();
        let outcomes = run_trials(&tasks, |_, _, seed| {
            let data = sample_dataset(&model, n, seed, config.entry_dist)?;
            let spec = ssr_spectrum_empirical(&fit_ssr(&data, config.lambda)?)?;
            let d = spec.len();
            Ok((spec[d - 1], spec[d - 2]))
        });
        let tops: Vec<f64> = outcomes.iter().filter_map(|o| o.as_ref().ok().map(|v| v.0)).collect();
        let seconds: Vec<f64> = outcomes.iter().filter_map(|o| o.as_ref().ok().map(|v| v.1)).collect();
        for (o, s) in outcomes.iter().zip(&seeds) {
            if let Err(e) = o {
                report.warnings.push(format!("theta = {theta}, seed {s}: trial failed: {e}"));
            }
        }
        let hits = tops.iter().filter(|&&t| t > edge + margin).count();
        let outlier = !tops.is_empty() && 2 * hits > tops.len();
        outliers.push(outlier);

        let mut rec = summarize(theta, "top_eigenvalue", n, Some(prediction.s1), &tops, trials - tops.len(), seeds);
        rec.metric_name = "excess_over_edge".into();
        rec.metric = Some(rec.empirical_mean - edge);
        rec.verdict = Some(outlier);
        let (second_mean, second_std) = stats::mean_std(&seconds);
        rec.details.insert("second_eigenvalue_mean".into(), second_mean);
        rec.details.insert("second_eigenvalue_std".into(), second_std);
        rec.details.insert("predicted_second".into(), prediction.s2);
        rec.details.insert("outlier_fraction".into(), hits as f64 / tops.len().max(1) as f64);
        report.records.push(rec);
    }
    let theta_c = 1.0 / alpha.sqrt();
    report.summary.push(Metric {
        name: "theta_c".into(),
        value: theta_c,
        tolerance: None,
        passed: None,
    });
    match first_sustained(&config.extras.thetas, &outliers) {
        Some(t) => report.summary.push(Metric {
            name: "transition_theta".into(),
            value: t,
            tolerance: None,
            passed: None,
        }),
        None => report.warnings.push("no sustained outlier on the theta grid".into()),
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sustained_run_is_found_from_the_top() {
        let grid = [0.1, 0.3, 0.2, 0.4, 0.5];
        let flags = [false, true, true, false, true];
        assert_eq!(first_sustained(&grid, &flags), Some(0.5));
        let flags = [false, true, true, true, true];
        assert_eq!(first_sustained(&grid, &flags), Some(0.2));
        assert_eq!(first_sustained(&grid, &[false; 5]), None);
    }
}
