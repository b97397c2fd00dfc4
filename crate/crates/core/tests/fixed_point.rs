use faer::Mat;
use maskridge::asymptotics::resolvent_trace_equivalents;
use maskridge::experiment::sample_dataset;
use maskridge::fixed_point::ResolventKernel;
use maskridge::{
    dbar_vectors, degrees_of_freedom, linalg, solve_kappa, solve_mtilde, ChiProblem, Complex64, CovarianceModel,
    EntryDist, FixedPointMethod, SpikeMode,
};
use proptest::prelude::*;

fn model_for(kind: u8, d: usize) -> CovarianceModel {
    match kind % 5 {
        0 => CovarianceModel::identity(d).unwrap(),
        1 => CovarianceModel::toeplitz(0.8, d).unwrap(),
        2 => CovarianceModel::spiked(3.0, SpikeMode::UniformSphere { seed: None }, d, 1).unwrap(),
        3 => CovarianceModel::power_law(0.5, d).unwrap(),
        _ => CovarianceModel::power_law(2.0, d).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mtilde_is_the_reciprocal_of_kappa(
        kind in 0u8..5, d in 5usize..120, alpha in 0.2f64..6.0, log_lambda in -5.0f64..1.0
    ) {
        let model = model_for(kind, d);
        let n = ((alpha * d as f64).round() as usize).max(1);
        let lambda = 10f64.powf(log_lambda);
        let sol = solve_kappa(&model, n, lambda).unwrap();
        let m = solve_mtilde(&model, n, lambda).unwrap();
        prop_assert!((m * sol.kappa - 1.0).abs() < 1e-10, "{}", m * sol.kappa);
        prop_assert!(sol.kappa >= lambda);
        prop_assert!(sol.kappa <= lambda + model.trace() / n as f64 * (1.0 + 1e-12));
        let (df1, df2) = degrees_of_freedom(&model, sol.kappa).unwrap();
        prop_assert!(df2 <= df1 && df1 <= d as f64);
        prop_assert!((sol.kappa - lambda - sol.kappa * df1 / n as f64).abs() <= 1e-10 * sol.kappa);
    }

    #[test]
    fn kappa_increases_with_lambda(kind in 0u8..5, d in 5usize..60, alpha in 0.3f64..4.0) {
        let model = model_for(kind, d);
        let n = ((alpha * d as f64).round() as usize).max(1);
        let mut last = 0.0;
        for lambda in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
            let k = solve_kappa(&model, n, lambda).unwrap().kappa;
            prop_assert!(k > last);
            last = k;
        }
    }

    #[test]
    fn spectral_and_risk_normalizations_are_proportional(kind in 0u8..5, d in 5usize..80, log_lambda in -4.0f64..0.0) {
        let model = model_for(kind, d);
        let lambda = 10f64.powf(log_lambda);
        let v = dbar_vectors(&model, 2 * d, lambda).unwrap();
        for (r, s) in v.d_risk.iter().zip(&v.d_spec) {
            prop_assert!((s - lambda / v.kappa * r).abs() <= 1e-10 * s.abs().max(1e-300));
        }
    }
}

#[test]
fn ridgeless_limits() {
    let model = CovarianceModel::identity(50).unwrap();
    let over = solve_kappa(&model, 100, 0.0).unwrap();
    assert_eq!(over.method, FixedPointMethod::RidgelessLimit);
    assert_eq!(over.kappa, 0.0);
    assert!((over.nu - 1.0).abs() < 1e-12);
    // Underparameterized ridgeless: df₁(κ) = n, so κ = d/n − 1 for Σ = I.
    let under = solve_kappa(&model, 25, 0.0).unwrap();
    assert!((under.kappa - 1.0).abs() < 1e-10, "{}", under.kappa);
}

#[test]
fn resolvent_trace_matches_simulation() {
    let d = 300;
    let n = 600;
    let lambda = 0.05;
    let model = CovarianceModel::toeplitz(0.5, d).unwrap();
    let data = sample_dataset(&model, n, 3, EntryDist::Gaussian).unwrap();
    let mut shifted = data.sample_covariance();
    for k in 0..d {
        shifted[(k, k)] += lambda;
    }
    let q = linalg::spd_inverse(shifted.as_ref()).unwrap();
    let a = Mat::<f64>::identity(d, d);
    let predicted = resolvent_trace_equivalents(a.as_ref(), None, &model, n, lambda).unwrap();
    let empirical = linalg::trace(q.as_ref());
    assert!((predicted - empirical).abs() < 0.02 * empirical, "{predicted} vs {empirical}");

    let predicted2 = resolvent_trace_equivalents(model.dense(), Some(a.as_ref()), &model, n, lambda).unwrap();
    let qq = &q * &q;
    let empirical2 = linalg::trace_of_product(model.dense(), qq.as_ref());
    assert!((predicted2 - empirical2).abs() < 0.03 * empirical2, "{predicted2} vs {empirical2}");
}

#[test]
fn structured_kernels_match_dense_solves() {
    let d = 60;
    for model in [
        CovarianceModel::toeplitz(0.7, d).unwrap(),
        CovarianceModel::spiked(2.0, SpikeMode::UniformSphere { seed: Some(4) }, d, 0).unwrap(),
        CovarianceModel::power_law(1.0, d).unwrap(),
    ] {
        let fast = ChiProblem::new(&model, 2 * d, 0.01).unwrap();
        let slow = ChiProblem::new(&model, 2 * d, 0.01).unwrap().with_kernel(ResolventKernel::Dense);
        for z in [Complex64::new(0.3, 0.05), Complex64::new(1.2, 0.01), Complex64::new(-0.5, 0.2)] {
            for chi in [Complex64::new(0.1, 0.1), Complex64::new(-0.4, 0.02)] {
                let a = fast.map(z, chi);
                let b = slow.map(z, chi);
                assert!((a - b).norm() < 1e-10 * b.norm().max(1.0), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn chi_solutions_are_conjugate_symmetric_and_stieltjes() {
    let model = CovarianceModel::toeplitz(0.5, 80).unwrap();
    let problem = ChiProblem::new(&model, 160, 0.01).unwrap();
    let z = Complex64::new(0.8, 0.02);
    let up = problem.solve(z, None).unwrap();
    let down = problem.solve(z.conj(), None).unwrap();
    assert!((up.chi - down.chi.conj()).norm() < 1e-9);
    assert!(up.trace.im > 0.0);
    assert!(up.residual < 1e-9);
}
