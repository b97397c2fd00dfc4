use std::time::Instant;

use super::config::{Comparison, ExperimentConfig};
use super::report::{ExperimentReport, Metric};
use super::sampling::sample_dataset;
use super::{run_trials, summarize, trial_seeds};
use crate::asymptotics::predict_risk;
use crate::covariance::build_covariance;
use crate::error::{invalid, Error, Result};
use crate::estimator::{empirical_risk, fit_ssr, population_risk};
use crate::stats;

/// Monte Carlo generalization and training risk across an `α` grid, each
/// paired with its deterministic-equivalent prediction. The population risk of
/// every fit is exact, computed from `Σ`.
pub fn run_risk_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let config = config.normalized();
    config.check()?;
    if !matches!(config.comparison, Comparison::Risk | Comparison::TrainRisk) {
        return Err(invalid("comparison", "risk experiments take `risk` or `train_risk`"));
    }
    let model = build_covariance(&config.model, config.dim, Some(config.master_seed))?;
    let trials = config.trials();
    let tasks: Vec<(usize, usize, u64)> = (0..config.alphas.len())
        .flat_map(|g| trial_seeds(config.master_seed, g, trials).into_iter().enumerate().map(move |(t, s)| (g, t, s)))
        .collect();
    let outcomes = run_trials(&tasks, |g, _, seed| {
        let n = config.sample_size(config.alphas[g]);
        let data = sample_dataset(&model, n, seed, config.entry_dist)?;
        let est = fit_ssr(&data, config.lambda)?;
        Ok((population_risk(est.a_hat.as_ref(), &model)?, empirical_risk(est.a_hat.as_ref(), &data)?))
    });

    let mut report = ExperimentReport::new(config.clone());
    report.notes.push(format!(
        "{trials} trials per grid point; population risk evaluated exactly against the generating covariance"
    ));
    let tol = config.extras.tolerance;
    let mut gen_errors = Vec::new();
    let mut train_errors = Vec::new();
    for (g, &alpha) in config.alphas.iter().enumerate() {
        let n = config.sample_size(alpha);
        let chunk = &outcomes[g * trials..(g + 1) * trials];
        let seeds: Vec<u64> = tasks[g * trials..(g + 1) * trials].iter().map(|t| t.2).collect();
        let prediction = predict_risk(&model, n, config.lambda);
        let mut prediction_flag = None;
        let (pg, pt) = match &prediction {
            Ok(p) => (Some(p.gen_error), Some(p.train_error)),
            Err(Error::Divergent { df2, .. }) => {
                prediction_flag = Some(format!("divergent prediction (df2 = {df2:.4}, n = {n})"));
                (None, None)
            }
            Err(e) => {
                report.warnings.push(format!("alpha = {alpha}: prediction failed: {e}"));
                (None, None)
            }
        };
        for (qi, (quantity, predicted)) in [("gen", pg), ("train", pt)].into_iter().enumerate() {
            let values: Vec<f64> = chunk.iter().filter_map(|o| o.as_ref().ok().map(|v| if qi == 0 { v.0 } else { v.1 })).collect();
            let mut rec = summarize(alpha, quantity, n, predicted, &values, chunk.len() - values.len(), seeds.clone());
            rec.metric_name = "relative_error".into();
            if let Some(p) = predicted {
                if !values.is_empty() {
                    let rel = (rec.empirical_mean - p).abs() / p.abs().max(f64::MIN_POSITIVE);
                    rec.metric = Some(rel);
                    rec.verdict = Some(rel <= tol);
                    if qi == 0 { &mut gen_errors } else { &mut train_errors }.push(rel);
                }
            }
            if let Some(flag) = &prediction_flag {
                rec.flags.push(flag.clone());
            }
            if let Ok(p) = &prediction {
                rec.details.insert("kappa".into(), p.kappa);
                rec.details.insert("df2".into(), p.df2);
            }
            report.records.push(rec);
        }
        for (o, s) in chunk.iter().zip(&seeds) {
            if let Err(e) = o {
                report.warnings.push(format!("alpha = {alpha}, seed {s}: trial failed: {e}"));
            }
        }
    }
    for (name, errs) in [("median_relative_error_gen", &gen_errors), ("median_relative_error_train", &train_errors)] {
        if !errs.is_empty() {
            let m = stats::median(errs);
            report.summary.push(Metric {
                name: name.into(),
                value: m,
                tolerance: Some(tol),
                passed: Some(m <= tol),
            });
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
