//! Deterministic equivalents for the population and training risk of `Â`,
//! and for traces of the sample resolvent.

use faer::MatRef;
use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceModel;
use crate::error::{invalid, Error, Result};
use crate::estimator::approximation_optimum;
use crate::fixed_point::{dbar_from_solution, df_from_eigenvalues, solve_kappa, FixedPointSolution};
use crate::linalg;

/// Relative distance of `df₂` to `n` below which predictions are reported as
/// divergent.
pub const POLE_MARGIN: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskPrediction {
    pub n: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub df1: f64,
    pub df2: f64,
    /// `(1/d) Tr(D̄² (Σ+κ)^{-1} Σ (Σ+κ)^{-1})` with `D̄ = d_risk`.
    pub l1: f64,
    pub gen_error: f64,
    pub train_error: f64,
    /// `Tr(D̄² Q̄)`, `Tr(D̄² Q̄²)` and `Tr(D̄² Q̄² Σ)·Tr(Q̄² Σ)` with
    /// `Q̄ = (Σ+κ)^{-1}` and `D̄ = d_spec`.
    pub lbar1: f64,
    pub lbar2: f64,
    pub lbar3: f64,
    /// Approximation error, when `Σ` is definite.
    pub l_app: Option<f64>,
    /// Ridgeless variance term `L_app/(α − 1)` for `α > 1`.
    pub ridgeless_excess: Option<f64>,
}

fn check_pole(df2: f64, n: usize) -> Result<()> {
    if (n as f64 - df2) <= POLE_MARGIN * n as f64 {
        return Err(Error::Divergent { df2, n });
    }
    Ok(())
}

/// Diagonal of `g(Σ)` paired with weights: `Σ_k w_k [g(Σ)]_kk`.
fn weighted_spectral_trace(model: &CovarianceModel, weights: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    model.spectral_diagonal(g).iter().zip(weights).map(|(a, w)| a * w).sum()
}

/// Predicted generalization and training error of the masked ridge estimate.
pub fn predict_risk(model: &CovarianceModel, n: usize, lambda: f64) -> Result<RiskPrediction> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("must be a positive real, got {lambda}")));
    }
    let sol = solve_kappa(model, n, lambda)?;
    predict_from_solution(model, &sol)
}

pub(crate) fn predict_from_solution(model: &CovarianceModel, sol: &FixedPointSolution) -> Result<RiskPrediction> {
    let (n, lambda, kappa) = (sol.n, sol.lambda, sol.kappa);
    let d = model.dim() as f64;
    let nf = n as f64;
    let (df1, df2) = df_from_eigenvalues(model.eigenvalues(), kappa);
    check_pole(df2, n)?;
    let dbar = dbar_from_solution(model, sol);

    let risk_sq: Vec<f64> = dbar.d_risk.iter().map(|v| v * v).collect();
    let spec_sq: Vec<f64> = dbar.d_spec.iter().map(|v| v * v).collect();
    let l1 = weighted_spectral_trace(model, &risk_sq, |s| s / ((s + kappa) * (s + kappa))) / d;
    let gen_error = l1 * nf / (nf - df2);

    let lbar1 = weighted_spectral_trace(model, &spec_sq, |s| 1.0 / (s + kappa));
    let lbar2 = weighted_spectral_trace(model, &spec_sq, |s| 1.0 / ((s + kappa) * (s + kappa)));
    let t = weighted_spectral_trace(model, &spec_sq, |s| s / ((s + kappa) * (s + kappa)));
    let tr_q2_sigma: f64 = model.eigenvalues().iter().map(|&s| s / ((s + kappa) * (s + kappa))).sum();
    let lbar3 = t * tr_q2_sigma;
    // Using I − κQ̄ = ΣQ̄ and κ·Tr(Q̄²Σ) = df₁ − df₂, the three-term formula
    // equals κT(n − df₁)/(λd(n − df₂)) without the cancellation at large λ.
    let train_error = kappa * t * (nf - df1) / (lambda * d * (nf - df2));

    let alpha = nf / d;
    let l_app = approximation_optimum(model).ok().map(|a| a.l_app);
    let ridgeless_excess = match l_app {
        Some(l) if alpha > 1.0 => Some(l / (alpha - 1.0)),
        _ => None,
    };
    Ok(RiskPrediction {
        n,
        lambda,
        alpha,
        kappa,
        df1,
        df2,
        l1,
        gen_error,
        train_error,
        lbar1,
        lbar2,
        lbar3,
        l_app,
        ridgeless_excess,
    })
}

pub fn predict_gen_error(model: &CovarianceModel, n: usize, lambda: f64) -> Result<RiskPrediction> {
    predict_risk(model, n, lambda)
}

pub fn predict_train_error(model: &CovarianceModel, n: usize, lambda: f64) -> Result<RiskPrediction> {
    predict_risk(model, n, lambda)
}

impl RiskPrediction {
    /// The training error evaluated term by term from `L̄₁, L̄₂, L̄₃`.
    pub fn train_error_three_term(&self, d: usize) -> f64 {
        let (k, l, d) = (self.kappa, self.lambda, d as f64);
        k / (l * d) * self.lbar1 - k * k / (l * d) * self.lbar2 - k * k * self.lbar3 / (l * d * (self.n as f64 - self.df2))
    }
}

/// Deterministic equivalents of resolvent traces, `Q = (Σ̂ + λI)^{-1}`.
///
/// Without `b`: `Tr(AQ) ≈ (κ/λ) Tr(A(Σ+κ)^{-1})`.
/// With `b`: `Tr(AQBQ) ≈ (κ/λ)² [Tr(AQ̄BQ̄) + Tr(AQ̄²Σ)·Tr(BQ̄²Σ)/(n − df₂)]`.
pub fn resolvent_trace_equivalents(
    a: MatRef<'_, f64>,
    b: Option<MatRef<'_, f64>>,
    model: &CovarianceModel,
    n: usize,
    lambda: f64,
) -> Result<f64> {
    let d = model.dim();
    for (name, m) in [("A", Some(a)), ("B", b)] {
        if let Some(m) = m {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: format!("{name}: {d}x{d}"),
                    found: format!("{}x{}", m.nrows(), m.ncols()),
                });
            }
        }
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("must be a positive real, got {lambda}")));
    }
    let sol = solve_kappa(model, n, lambda)?;
    let kappa = sol.kappa;
    let vals = model.eigenvalues();
    let vecs = model.eigenvectors();
    let q_bar = linalg::spectral_function(vals, vecs, |s| 1.0 / (s + kappa));
    let ratio = kappa / lambda;
    let Some(b) = b else {
        return Ok(ratio * linalg::trace_of_product(a, q_bar.as_ref()));
    };
    let (_, df2) = df_from_eigenvalues(vals, kappa);
    check_pole(df2, n)?;
    let q2_sigma = linalg::spectral_function(vals, vecs, |s| s / ((s + kappa) * (s + kappa)));
    let aq = a * &q_bar;
    let bq = b * &q_bar;
    let first = linalg::trace_of_product(aq.as_ref(), bq.as_ref());
    let ta = linalg::trace_of_product(a, q2_sigma.as_ref());
    let tb = linalg::trace_of_product(b, q2_sigma.as_ref());
    Ok(ratio * ratio * (first + ta * tb / (n as f64 - df2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    #[test]
    fn isotropic_ridgeless_gen_error_is_two() {
        let model = CovarianceModel::identity(100).unwrap();
        let p = predict_gen_error(&model, 200, 1e-8).unwrap();
        assert!((p.gen_error - 2.0).abs() < 1e-6, "{}", p.gen_error);
        assert!((p.train_error - 0.5).abs() < 1e-6, "{}", p.train_error);
        assert!((p.gen_error - p.l1 - p.ridgeless_excess.unwrap()).abs() < 1e-6);
    }

    #[test]
    fn interpolation_regime_train_error_vanishes() {
        let model = CovarianceModel::identity(100).unwrap();
        let p = predict_train_error(&model, 50, 1e-8).unwrap();
        assert!(p.train_error < 1e-3, "{}", p.train_error);
    }

    #[test]
    fn large_lambda_limit_is_zero_predictor() {
        let model = CovarianceModel::toeplitz(0.5, 50).unwrap();
        let p = predict_risk(&model, 100, 1e8).unwrap();
        assert!((p.gen_error - 1.0).abs() < 1e-6, "{}", p.gen_error);
        assert!((p.train_error - 1.0).abs() < 1e-6, "{}", p.train_error);
    }

    #[test]
    fn three_term_training_formula_agrees() {
        let model = CovarianceModel::toeplitz(0.7, 60).unwrap();
        for (n, lambda) in [(30, 0.01), (120, 0.1), (200, 1.0)] {
            let p = predict_risk(&model, n, lambda).unwrap();
            let direct = p.train_error_three_term(60);
            assert!((direct - p.train_error).abs() < 1e-8 * p.train_error.max(1e-3), "{direct} vs {}", p.train_error);
        }
    }

    #[test]
    fn mode_one_identity() {
        let d = 20;
        let model = CovarianceModel::identity(d).unwrap();
        let eye = Mat::<f64>::identity(d, d);
        let v = resolvent_trace_equivalents(eye.as_ref(), None, &model, 40, 0.1).unwrap();
        let k = solve_kappa(&model, 40, 0.1).unwrap().kappa;
        assert!((v - k / 0.1 * d as f64 / (1.0 + k)).abs() < 1e-10);
        let zero = Mat::<f64>::zeros(d, d);
        let m2 = resolvent_trace_equivalents(eye.as_ref(), Some(zero.as_ref()), &model, 40, 0.1).unwrap();
        assert_eq!(m2, 0.0);
    }

    #[test]
    fn mode_two_reproduces_gen_error() {
        let model = CovarianceModel::toeplitz(0.4, 30).unwrap();
        let (n, lambda) = (60, 0.05);
        let p = predict_risk(&model, n, lambda).unwrap();
        let dv = crate::fixed_point::dbar_vectors(&model, n, lambda).unwrap();
        let a = Mat::from_fn(30, 30, |i, j| if i == j { dv.d_spec[i] * dv.d_spec[i] } else { 0.0 });
        let v = resolvent_trace_equivalents(a.as_ref(), Some(model.dense()), &model, n, lambda).unwrap();
        assert!((v / 30.0 - p.gen_error).abs() < 1e-10 * p.gen_error);
    }
}
