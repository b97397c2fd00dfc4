//! Limiting spectral density of `Â`.
//!
//! Internally everything lives on the axis of `M = Λ^{1/2} Q Λ^{1/2}`, whose
//! deterministic equivalent is `D̄^{1/2}(Σ/(1−χ) + λ)^{-1}D̄^{1/2}`. Public grids
//! and densities use the `Â` axis, `s = 1 − x`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceModel;
use crate::error::{invalid, Result};
use crate::fixed_point::ChiProblem;
use crate::stats;

pub const DEFAULT_GRID_POINTS: usize = 1000;
pub const DEFAULT_PADDING: f64 = 0.10;
pub const DEFAULT_ETA_FRACTION: f64 = 1e-3;
/// Fraction of the peak density above which a grid point counts as support.
pub const SUPPORT_THRESHOLD: f64 = 1e-2;

/// A density sampled on a grid of the `Â` eigenvalue axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Stieltjes inversion offset; zero when evaluated exactly on the real axis.
    pub eta: f64,
    /// Interval where the density exceeds `SUPPORT_THRESHOLD` of its maximum.
    pub support_estimate: (f64, f64),
    pub chi_trace: Vec<C64>,
    /// Grid indices where the solver failed; their density is interpolated.
    pub failed_points: Vec<usize>,
    pub warnings: Vec<String>,
}

impl SpectralModel {
    pub fn mass(&self) -> f64 {
        stats::trapezoid(&self.grid, &self.density)
    }
}

fn support_of(grid: &[f64], density: &[f64], rel: f64) -> (f64, f64) {
    let peak = density.iter().copied().fold(0.0, f64::max);
    let above: Vec<usize> = (0..grid.len()).filter(|&k| density[k] > rel * peak).collect();
    match (above.first(), above.last()) {
        (Some(&a), Some(&b)) => (grid[a], grid[b]),
        _ => (grid[0], grid[grid.len() - 1]),
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|k| lo + step * k as f64).collect()
}

/// Density of `M` at `z` from the trace of `𝒢`.
fn density_at(trace: C64) -> f64 {
    (trace.im / std::f64::consts::PI).max(0.0)
}

/// Sweeps a grid on the `M` axis with warm starts. Returns per-point `χ`,
/// density and failure flags.
fn sweep(problem: &ChiProblem<'_>, xs: &[f64], eta: f64) -> (Vec<C64>, Vec<f64>, Vec<usize>) {
    let mut chis = Vec::with_capacity(xs.len());
    let mut dens = Vec::with_capacity(xs.len());
    let mut failed = Vec::new();
    let mut warm: Option<C64> = None;
    for (k, &x) in xs.iter().enumerate() {
        let z = C64::new(x, eta);
        match problem.solve(z, warm) {
            Ok(sol) => {
                warm = Some(sol.chi);
                chis.push(sol.chi);
                dens.push(density_at(sol.trace));
            }
            Err(_) => {
                warm = None;
                failed.push(k);
                chis.push(C64::new(f64::NAN, f64::NAN));
                dens.push(f64::NAN);
            }
        }
    }
    (chis, dens, failed)
}

fn interpolate_failures(grid: &[f64], density: &mut [f64], failed: &[usize]) {
    for &k in failed {
        let left = (0..k).rev().find(|&j| density[j].is_finite());
        let right = (k + 1..density.len()).find(|&j| density[j].is_finite());
        density[k] = match (left, right) {
            (Some(a), Some(b)) => {
                let t = (grid[k] - grid[a]) / (grid[b] - grid[a]);
                density[a] + t * (density[b] - density[a])
            }
            (Some(a), None) => density[a],
            (None, Some(b)) => density[b],
            (None, None) => 0.0,
        };
    }
}

/// Default grid on the `Â` axis: a coarse scan locates the support, which is
/// padded by 10% on each side and sampled at 1000 points. Returns the grid and
/// `η = 1e-3 × span`.
pub fn default_spectral_grid(model: &CovarianceModel, n: usize, lambda: f64) -> Result<(Vec<f64>, f64)> {
    let problem = ChiProblem::new(model, n, lambda)?;
    default_grid_for(&problem)
}

fn default_grid_for(problem: &ChiProblem<'_>) -> Result<(Vec<f64>, f64)> {
    const COARSE: usize = 400;
    let mut upper = 4.0;
    for _ in 0..40 {
        let xs = linspace(upper / (2.0 * COARSE as f64), upper, COARSE);
        let eta = 2.0 * upper / COARSE as f64;
        let (_, dens, _) = sweep(problem, &xs, eta);
        let clean: Vec<f64> = dens.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect();
        let (lo, hi) = support_of(&xs, &clean, 1e-3);
        if hi < 0.9 * upper {
            let (s_lo, s_hi) = (1.0 - hi, 1.0 - lo);
            let pad = DEFAULT_PADDING * (s_hi - s_lo).max(1e-3);
            let grid = linspace(s_lo - pad, s_hi + pad, DEFAULT_GRID_POINTS);
            let span = grid[grid.len() - 1] - grid[0];
            return Ok((grid, DEFAULT_ETA_FRACTION * span));
        }
        upper *= 2.0;
    }
    Err(invalid("grid", "could not bracket the spectral support"))
}

/// Predicted density of the eigenvalues of `Â` on `grid` (Â axis, increasing),
/// by Stieltjes inversion of `(1/d) Tr 𝒢(1 − s + iη)`.
pub fn predicted_spectral_density(
    model: &CovarianceModel,
    n: usize,
    lambda: f64,
    grid: &[f64],
    eta: f64,
) -> Result<SpectralModel> {
    let problem = ChiProblem::new(model, n, lambda)?;
    density_on_grid(&problem, grid, eta)
}

/// Predicted density on the default grid.
pub fn predicted_spectral_density_auto(model: &CovarianceModel, n: usize, lambda: f64) -> Result<SpectralModel> {
    let problem = ChiProblem::new(model, n, lambda)?;
    let (grid, eta) = default_grid_for(&problem)?;
    density_on_grid(&problem, &grid, eta)
}

fn density_on_grid(problem: &ChiProblem<'_>, grid: &[f64], eta: f64) -> Result<SpectralModel> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid", "need at least two strictly increasing points"));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(invalid("eta", format!("must be positive, got {eta}")));
    }
    // Walk the M axis upward so warm starts move continuously.
    let xs: Vec<f64> = grid.iter().rev().map(|s| 1.0 - s).collect();
    let (mut chis, mut dens, mut failed) = sweep(problem, &xs, eta);
    chis.reverse();
    dens.reverse();
    let last = grid.len() - 1;
    failed.iter_mut().for_each(|k| *k = last - *k);
    failed.sort_unstable();
    let mut warnings = Vec::new();
    if !failed.is_empty() {
        warnings.push(format!(
            "chi solver failed at {} of {} grid points; density interpolated there",
            failed.len(),
            grid.len()
        ));
        interpolate_failures(grid, &mut dens, &failed);
    }
    // The η-broadened tail decays only like η/dist², so a loose threshold
    // reports edges well outside the bulk.
    let support_estimate = support_of(grid, &dens, SUPPORT_THRESHOLD);
    Ok(SpectralModel {
        grid: grid.to_vec(),
        density: dens,
        eta,
        support_estimate,
        chi_trace: chis,
        failed_points: failed,
        warnings,
    })
}

/// Bulk endpoints of the ridgeless diagonal spectrum on the `M` axis.
fn universal_edges_m(alpha: f64) -> (f64, f64) {
    let c = (alpha + 1.0) / (alpha - 1.0);
    let r = (c * c - 1.0).sqrt();
    (c - r, c + r)
}

/// Support `[−2/(√α−1), 2/(√α+1)]` of the universal density on the `Â` axis.
pub fn universal_support(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let r = alpha.sqrt();
    Ok((-2.0 / (r - 1.0), 2.0 / (r + 1.0)))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(invalid("alpha", format!("the universal law needs alpha > 1, got {alpha}")));
    }
    Ok(())
}

/// Root of `χ² + (z−1)χ + z/(α−1) = 0` on the physical branch, analytic off
/// the bulk and tending to `−1/(α−1)` at infinity. `z` is on the `M` axis.
pub fn universal_chi(alpha: f64, z: C64) -> Result<C64> {
    check_alpha(alpha)?;
    let (a, b) = universal_edges_m(alpha);
    let root = (z - a).sqrt() * (z - b).sqrt();
    Ok(0.5 * ((1.0 - z) + root))
}

/// `(1/d) Tr 𝒢(z) = 1/((1 − 1/α)(1 − χ) − z)` on the `M` axis.
pub fn universal_trace(alpha: f64, z: C64) -> Result<C64> {
    let chi = universal_chi(alpha, z)?;
    Ok(1.0 / ((1.0 - 1.0 / alpha) * (1.0 - chi) - z))
}

/// The `Σ`-independent ridgeless density for diagonal covariances, evaluated
/// exactly on the real axis of `Â`. Without a grid, the support padded by 10%
/// is sampled at 1000 points.
pub fn universal_density(alpha: f64, grid: Option<&[f64]>) -> Result<SpectralModel> {
    let (lo, hi) = universal_support(alpha)?;
    let grid = match grid {
        Some(g) => {
            if g.len() < 2 || g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("grid", "need at least two strictly increasing points"));
            }
            g.to_vec()
        }
        None => {
            let pad = DEFAULT_PADDING * (hi - lo);
            linspace(lo - pad, hi + pad, DEFAULT_GRID_POINTS)
        }
    };
    let mut density = Vec::with_capacity(grid.len());
    let mut chis = Vec::with_capacity(grid.len());
    for &s in &grid {
        let z = C64::new(1.0 - s, 0.0);
        let chi = universal_chi(alpha, z)?;
        chis.push(chi);
        let tr = 1.0 / ((1.0 - 1.0 / alpha) * (1.0 - chi) - z);
        density.push(if s > lo && s < hi { density_at(tr) } else { 0.0 });
    }
    Ok(SpectralModel {
        grid,
        density,
        eta: 0.0,
        support_estimate: (lo, hi),
        chi_trace: chis,
        failed_points: Vec::new(),
        warnings: Vec::new(),
    })
}
