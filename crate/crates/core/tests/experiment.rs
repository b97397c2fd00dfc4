use maskridge::experiment::{
    derive_seed, run_experiment, sample_dataset, sample_entries, Comparison, ExperimentConfig, Extras, CSV_HEADER,
};
use maskridge::{linalg, CovarianceModel, CovarianceSpec, EntryDist, SpikeMode};
use proptest::prelude::*;

fn config(model: CovarianceSpec, comparison: Comparison) -> ExperimentConfig {
    ExperimentConfig {
        model,
        dim: 40,
        alphas: vec![0.5, 2.0],
        lambda: 0.05,
        trials: Some(3),
        master_seed: 17,
        entry_dist: EntryDist::Gaussian,
        comparison,
        extras: Extras::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sample_covariance_concentrates(seed in any::<u64>(), rademacher in any::<bool>()) {
        let dist = if rademacher { EntryDist::Rademacher } else { EntryDist::Gaussian };
        let model = CovarianceModel::toeplitz(0.5, 5).unwrap();
        let data = sample_dataset(&model, 20_000, seed, dist).unwrap();
        let diff = data.sample_covariance() - model.dense();
        prop_assert!(linalg::max_abs(diff.as_ref()) < 0.06);
    }

    #[test]
    fn entries_are_standardized(seed in any::<u64>()) {
        let z = sample_entries(200, 50, seed, EntryDist::Gaussian);
        let (mut s1, mut s2) = (0.0, 0.0);
        for j in 0..50 {
            for i in 0..200 {
                s1 += z[(i, j)];
                s2 += z[(i, j)] * z[(i, j)];
            }
        }
        let m = 10_000.0;
        prop_assert!((s1 / m).abs() < 0.05);
        prop_assert!((s2 / m - 1.0).abs() < 0.06);
    }

    #[test]
    fn seeds_do_not_collide_across_the_grid(master in any::<u64>()) {
        let mut seen = std::collections::HashSet::new();
        for g in 0..20 {
            for t in 0..20 {
                prop_assert!(seen.insert(derive_seed(master, g, t)));
            }
        }
    }
}

#[test]
fn reports_are_reproducible() {
    let cfg = config(CovarianceSpec::Toeplitz { rho: 0.5 }, Comparison::Risk);
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.records_for("gen").count(), 2);
    assert_eq!(a.records_for("train").count(), 2);
    assert!(a.to_csv().starts_with(&CSV_HEADER.join(",")));
    let mut other = cfg.clone();
    other.master_seed = 18;
    assert_ne!(run_experiment(&other).unwrap().seeds(), a.seeds());
}

#[test]
fn config_round_trips_and_validates() {
    let cfg = config(CovarianceSpec::Identity, Comparison::Spectrum);
    let json = serde_json::to_string(&cfg).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(cfg, back);
    assert!(cfg.validate().is_empty());
    let mut bad = cfg.clone();
    bad.lambda = -1.0;
    bad.alphas.clear();
    let fields: Vec<String> = bad.validate().into_iter().map(|i| i.field).collect();
    assert!(fields.contains(&"lambda".to_string()) && fields.contains(&"alphas".to_string()));
    assert!(run_experiment(&bad).is_err());
    let unknown = json.replacen("\"dim\"", "\"dims\":3,\"dim\"", 1);
    assert!(serde_json::from_str::<ExperimentConfig>(&unknown).is_err());
}

#[test]
fn uncorrelated_toeplitz_runs_as_identity() {
    let cfg = config(CovarianceSpec::Toeplitz { rho: 0.0 }, Comparison::Risk);
    assert_eq!(cfg.normalized().model, CovarianceSpec::Identity);
    assert!(run_experiment(&cfg).is_ok());
}

#[test]
fn spectrum_experiment_reports_distances() {
    let mut cfg = config(CovarianceSpec::Toeplitz { rho: 0.5 }, Comparison::Spectrum);
    cfg.dim = 60;
    let report = run_experiment(&cfg).unwrap();
    for rec in &report.records {
        assert!(rec.metric.unwrap().is_finite());
        assert!((rec.details["predicted_mass"] - 1.0).abs() < 0.02);
    }
    assert_eq!(report.curves.len(), 4);
}

#[test]
fn outlier_sweep_finds_a_transition() {
    let mut cfg = config(
        CovarianceSpec::Spiked {
            theta: 0.0,
            spike: SpikeMode::UniformSphere { seed: Some(3) },
        },
        Comparison::Bbp,
    );
    cfg.dim = 200;
    cfg.alphas = vec![2.0];
    cfg.lambda = 1e-5;
    cfg.extras.thetas = vec![0.2, 3.0, 6.0];
    cfg.extras.outlier_margin = 0.05;
    let report = run_experiment(&cfg).unwrap();
    let verdicts: Vec<bool> = report.records.iter().map(|r| r.verdict.unwrap()).collect();
    assert_eq!(verdicts, vec![false, true, true]);
    assert_eq!(report.metric("transition_theta").unwrap().value, 3.0);
}

#[test]
fn pca_comparisons_cover_both_modes() {
    let mut cfg = config(CovarianceSpec::Toeplitz { rho: 0.8 }, Comparison::PcaCompare);
    cfg.extras.p_list = vec![1, 20];
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.records.len(), 6);

    cfg.extras.gammas = vec![0.05, 0.3, 0.6];
    cfg.extras.population_n = 2000;
    cfg.trials = Some(1);
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.records_for("pca").count(), 3);
    let g = report.metric("gamma_star").unwrap().value;
    assert!(g > 0.0 && g < 1.0);
}
