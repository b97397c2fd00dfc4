//! AR(1) covariance closed forms in the circulant approximation, with
//! `E± = (1 ± ρ)/(1 ∓ ρ)` the extreme values of the eigenvalue profile.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ar1Analysis {
    pub rho: f64,
    pub lambda: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    /// Population masked ridge loss at `lambda`.
    pub f_pop: f64,
    /// `(γ, PCA loss)` samples.
    pub pca_pop: Vec<(f64, f64)>,
    pub gamma_star: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid("rho", format!("must lie in (0, 1), got {rho}")));
    }
    Ok(())
}

fn extremes(rho: f64) -> (f64, f64) {
    ((1.0 + rho) / (1.0 - rho), (1.0 - rho) / (1.0 + rho))
}

/// `f(λ, ρ) = (2λ + S)(F + 1)² / (2F(S + λ)²)` with `S = E⁺ + E⁻` and
/// `F = √(1 + λS + λ²)`.
pub fn ar1_population_ssr_loss(rho: f64, lambda: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid("lambda", format!("must be a nonnegative real, got {lambda}")));
    }
    let (ep, em) = extremes(rho);
    let s = ep + em;
    let f = (1.0 + lambda * s + lambda * lambda).sqrt();
    Ok((2.0 * lambda + s) * (f + 1.0) * (f + 1.0) / (2.0 * f * (s + lambda) * (s + lambda)))
}

/// `1 − (2/π) arctan(E⁺ tan(πγ/2))`.
pub fn ar1_pca_population_loss(rho: f64, gamma: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(invalid("gamma", format!("must lie in [0, 1], got {gamma}")));
    }
    if gamma == 1.0 {
        return Ok(0.0);
    }
    let (ep, _) = extremes(rho);
    Ok((1.0 - 2.0 / PI * (ep * (FRAC_PI_2 * gamma).tan()).atan()).clamp(0.0, 1.0))
}

/// Smallest PCA fraction `γ*` at which the PCA loss matches the ridgeless
/// masked ridge loss.
pub fn ar1_phase_boundary(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let (_, em) = extremes(rho);
    let inner = FRAC_PI_2 * 2.0 * rho * rho / (1.0 + rho * rho);
    Ok(2.0 / PI * (em * inner.tan()).atan())
}

/// `γ*` located by bisection on the crossing of the two population losses.
pub fn ar1_phase_boundary_bisection(rho: f64) -> Result<f64> {
    let target = ar1_population_ssr_loss(rho, 0.0)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ar1_pca_population_loss(rho, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn ar1_analysis(rho: f64, lambda: f64, gammas: &[f64]) -> Result<Ar1Analysis> {
    let (e_plus, e_minus) = {
        check_rho(rho)?;
        extremes(rho)
    };
    let pca_pop = gammas
        .iter()
        .map(|&g| ar1_pca_population_loss(rho, g).map(|l| (g, l)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ar1Analysis {
        rho,
        lambda,
        e_plus,
        e_minus,
        f_pop: ar1_population_ssr_loss(rho, lambda)?,
        pca_pop,
        gamma_star: ar1_phase_boundary(rho)?,
    })
}

/// `df₂` of the AR(1) covariance in the circulant approximation:
/// `d(1−ρ²)²(1−ρ²+κ(1+ρ²)) / ((1−ρ²+κ(1+ρ)²)(1−ρ²+κ(1−ρ)²))^{3/2}`.
pub fn toeplitz_df2_closed_form(rho: f64, kappa: f64, d: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid("rho", format!("must lie in [0, 1), got {rho}")));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    let r2 = rho * rho;
    let base = 1.0 - r2;
    let num = base * base * (base + kappa * (1.0 + r2));
    let den = ((base + kappa * (1.0 + rho).powi(2)) * (base + kappa * (1.0 - rho).powi(2))).powf(1.5);
    Ok(d as f64 * num / den)
}

/// Strong-correlation approximation `d√(1−ρ²)/(4√κ)`.
pub fn toeplitz_df2_strong_correlation(rho: f64, kappa: f64, d: usize) -> f64 {
    d as f64 * (1.0 - rho * rho).sqrt() / (4.0 * kappa.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ssr_loss_limits() {
        assert!((ar1_population_ssr_loss(0.5, 0.0).unwrap() - 0.6).abs() < 1e-15);
        for lambda in [0.0, 0.1, 3.0] {
            assert!((ar1_population_ssr_loss(1e-9, lambda).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn pca_loss_endpoints() {
        assert_eq!(ar1_pca_population_loss(0.5, 0.0).unwrap(), 1.0);
        assert_eq!(ar1_pca_population_loss(0.5, 1.0).unwrap(), 0.0);
        assert!(ar1_pca_population_loss(0.5, 1.2).is_err());
    }

    #[test]
    fn phase_boundary_matches_bisection() {
        for rho in [0.1, 0.5, 0.9] {
            let a = ar1_phase_boundary(rho).unwrap();
            let b = ar1_phase_boundary_bisection(rho).unwrap();
            assert!((a - b).abs() < 1e-12, "rho={rho}: {a} vs {b}");
        }
        let g = ar1_phase_boundary(0.5).unwrap();
        assert!((ar1_pca_population_loss(0.5, g).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn df2_isotropic_reduction() {
        let k = 0.3;
        let v = toeplitz_df2_closed_form(0.0, k, 100).unwrap();
        assert!((v - 100.0 / ((1.0 + k) * (1.0 + k))).abs() < 1e-12);
    }

    #[test]
    fn df2_strong_correlation() {
        let exact = toeplitz_df2_closed_form(0.9, 0.04, 2000).unwrap();
        let approx = toeplitz_df2_strong_correlation(0.9, 0.04, 2000);
        assert!((exact / approx - 1.0).abs() < 0.10, "{exact} vs {approx}");
    }
}
