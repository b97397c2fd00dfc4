//! Spiked covariance `I + θvvᵀ`: outlier eigenvalues of `Â` and the
//! population losses of the masked ridge and PCA estimators.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::spectrum::universal_chi;
use crate::covariance::SpikeSpec;
use crate::error::{invalid, Error, Result};

/// Predicted top two eigenvalues of `Â` for a delocalized spike, ridgeless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BbpPrediction {
    pub alpha: f64,
    pub theta: f64,
    /// `1/√α`.
    pub theta_c: f64,
    pub s1: f64,
    /// Bulk edge `2/(√α + 1)`.
    pub s2: f64,
    /// Outlier location on the `M` axis, present above the threshold.
    pub z_star: Option<f64>,
}

/// Population losses under a spiked covariance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikedPopulationLosses {
    pub theta: f64,
    pub lambda: f64,
    /// `1 + λ`.
    pub tau: f64,
    /// `θ(τ² − 2τ − θ)/(τ + θ)²`.
    pub a: f64,
    /// `θ/(τ + θ)`.
    pub b: f64,
    pub d: usize,
    pub p: usize,
    pub l_ssr_pop: f64,
    pub l_pca_pop: f64,
    pub pca_dominates: bool,
}

/// Bulk edge of `M` nearest zero, `(√α − 1)/(√α + 1)`.
fn m_left_edge(alpha: f64) -> f64 {
    let r = alpha.sqrt();
    (r - 1.0) / (r + 1.0)
}

/// Outlier equation `zα/((α−1)(1−χ(z))) − 1/(1+θ)` left of the bulk.
fn outlier_equation(alpha: f64, theta: f64, z: f64) -> Result<f64> {
    let chi = universal_chi(alpha, C64::new(z, 0.0))?.re;
    Ok(z * alpha / ((alpha - 1.0) * (1.0 - chi)) - 1.0 / (1.0 + theta))
}

pub fn bbp_prediction(alpha: f64, theta: f64) -> Result<BbpPrediction> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(invalid("alpha", format!("outlier prediction needs alpha > 1, got {alpha}")));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(invalid("theta", format!("must be a nonnegative real, got {theta}")));
    }
    let theta_c = 1.0 / alpha.sqrt();
    let s2 = 2.0 / (alpha.sqrt() + 1.0);
    if theta <= theta_c {
        return Ok(BbpPrediction {
            alpha,
            theta,
            theta_c,
            s1: s2,
            s2,
            z_star: None,
        });
    }
    let edge = m_left_edge(alpha);
    let (mut lo, mut hi) = (0.0, edge);
    let g_lo = outlier_equation(alpha, theta, lo)?;
    let g_hi = outlier_equation(alpha, theta, hi)?;
    if !(g_lo < 0.0 && g_hi >= 0.0) {
        return Err(Error::Numeric {
            context: "outlier equation",
            reason: format!("no sign change on (0, {edge}) for alpha={alpha}, theta={theta}"),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if outlier_equation(alpha, theta, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    Ok(BbpPrediction {
        alpha,
        theta,
        theta_c,
        s1: 1.0 - z,
        s2,
        z_star: Some(z),
    })
}

pub fn spiked_population_losses(theta: f64, lambda: f64, spike: &SpikeSpec, p: usize) -> Result<SpikedPopulationLosses> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(invalid("theta", format!("must be a nonnegative real, got {theta}")));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid("lambda", format!("must be a nonnegative real, got {lambda}")));
    }
    let v = spike.vector();
    let d = v.len();
    if p > d {
        return Err(invalid("p", format!("{p} exceeds dimension {d}")));
    }
    let tau = 1.0 + lambda;
    let a = theta * (tau * tau - 2.0 * tau - theta) / ((tau + theta) * (tau + theta));
    let b = theta / (tau + theta);
    let l_ssr_pop = v
        .iter()
        .map(|&vl| {
            let v2 = vl * vl;
            (1.0 + a * v2) / ((1.0 - b * v2) * (1.0 - b * v2))
        })
        .sum::<f64>()
        / d as f64;
    let l_pca_pop = (d - p) as f64 / d as f64;
    Ok(SpikedPopulationLosses {
        theta,
        lambda,
        tau,
        a,
        b,
        d,
        p,
        l_ssr_pop,
        l_pca_pop,
        pca_dominates: p == 0 || l_pca_pop < l_ssr_pop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::SpikeMode;

    #[test]
    fn subcritical_gives_bulk_edge() {
        let p = bbp_prediction(2.0, 0.5).unwrap();
        assert!((p.s1 - 2.0 / (2f64.sqrt() + 1.0)).abs() < 1e-15);
        assert!(p.z_star.is_none());
    }

    #[test]
    fn supercritical_alpha_two_theta_one() {
        let p = bbp_prediction(2.0, 1.0).unwrap();
        assert!((p.s1 - 5.0 / 6.0).abs() < 1e-12, "{}", p.s1);
        assert!((p.z_star.unwrap() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn continuous_at_threshold() {
        for alpha in [2.0, 4.0] {
            let tc = 1.0 / f64::sqrt(alpha);
            for eps in [1e-2, 1e-3, 1e-4] {
                let up = bbp_prediction(alpha, tc + eps).unwrap().s1;
                let down = bbp_prediction(alpha, tc - eps).unwrap().s1;
                assert!((up - down).abs() <= 5.0 * eps, "alpha={alpha} eps={eps}");
            }
        }
    }

    #[test]
    fn isotropic_loss_is_one() {
        let spike = SpikeSpec::new(SpikeMode::UniformSphere { seed: Some(1) }, 50, 0).unwrap();
        let l = spiked_population_losses(0.0, 0.1, &spike, 5).unwrap();
        assert!((l.l_ssr_pop - 1.0).abs() < 1e-15);
        assert!(l.pca_dominates);
    }

    #[test]
    fn basis_spike_matches_approximation_optimum() {
        let spike = SpikeSpec::new(SpikeMode::Basis { index: 0 }, 2, 0).unwrap();
        let l = spiked_population_losses(1.0, 0.0, &spike, 1).unwrap();
        let model = crate::covariance::CovarianceModel::spiked(1.0, SpikeMode::Basis { index: 0 }, 2, 0).unwrap();
        let opt = crate::estimator::approximation_optimum(&model).unwrap();
        assert!((l.l_ssr_pop - opt.l_app).abs() < 1e-14, "{} vs {}", l.l_ssr_pop, opt.l_app);
        assert!((l.l_ssr_pop - 1.5).abs() < 1e-14);
    }
}
