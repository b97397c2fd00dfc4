//! Summary statistics and 1-Wasserstein distances between spectra.
//!
//! Densities are given as samples on an increasing grid; their CDF is the
//! cumulative trapezoid normalized to unit mass and linearly interpolated.

use crate::error::{invalid, Result};

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Trapezoid integral of `y` over `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

/// Histogram over `bins` equal-width bins spanning `[lo, hi]`, normalized to
/// integrate to one. Returns `(edges, density)`.
pub fn histogram(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if bins == 0 {
        return Err(invalid("bins", "must be positive"));
    }
    if !(hi > lo) {
        return Err(invalid("range", format!("empty histogram range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
    let mut counts = vec![0usize; bins];
    let mut kept = 0usize;
    for &s in samples {
        if s < lo || s > hi {
            continue;
        }
        let k = (((s - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
        kept += 1;
    }
    let norm = if kept == 0 { 0.0 } else { 1.0 / (kept as f64 * width) };
    Ok((edges, counts.into_iter().map(|c| c as f64 * norm).collect()))
}

/// W1 between two empirical distributions.
pub fn wasserstein1_samples(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = match (a.first(), b.first()) {
        (Some(x), Some(y)) => x.min(*y),
        _ => return f64::NAN,
    };
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        total += (next - prev) * (i as f64 / na - j as f64 / nb).abs();
        while i < a.len() && a[i] <= next {
            i += 1;
        }
        while j < b.len() && b[j] <= next {
            j += 1;
        }
        prev = next;
    }
    total
}

/// Normalized CDF of a gridded density at the grid points.
pub fn density_cdf(grid: &[f64], density: &[f64]) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for k in 1..grid.len() {
        acc += 0.5 * (grid[k] - grid[k - 1]) * (density[k] + density[k - 1]);
        cdf.push(acc);
    }
    if acc > 0.0 {
        cdf.iter_mut().for_each(|c| *c /= acc);
    }
    cdf
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let k = xs.partition_point(|&g| g <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (x - x0) / (x1 - x0);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

/// `∫|f|` over `[x0, x1]` for `f` linear with end values `f0`, `f1`.
fn abs_linear_integral(h: f64, f0: f64, f1: f64) -> f64 {
    if f0 * f1 >= 0.0 {
        0.5 * h * (f0.abs() + f1.abs())
    } else {
        0.5 * h * (f0 * f0 + f1 * f1) / (f0.abs() + f1.abs())
    }
}

/// W1 between an empirical sample and a gridded density. The density CDF is
/// zero left of the grid and one right of it.
pub fn wasserstein1_sample_density(samples: &[f64], grid: &[f64], density: &[f64]) -> Result<f64> {
    check_grid(grid, density)?;
    if samples.is_empty() {
        return Err(invalid("samples", "empty sample"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let cdf = density_cdf(grid, density);
    let mut points: Vec<f64> = grid.iter().chain(s.iter()).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let n = s.len() as f64;
    let mut total = 0.0;
    for w in points.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let emp = s.partition_point(|&v| v <= x0) as f64 / n;
        let f0 = pred_cdf(grid, &cdf, x0) - emp;
        let f1 = pred_cdf_left(grid, &cdf, x1) - emp;
        total += abs_linear_integral(x1 - x0, f0, f1);
    }
    Ok(total)
}

fn pred_cdf(grid: &[f64], cdf: &[f64], x: f64) -> f64 {
    if x < grid[0] {
        0.0
    } else {
        interp(grid, cdf, x)
    }
}

/// Left limit of the predicted CDF, continuous inside the grid.
fn pred_cdf_left(grid: &[f64], cdf: &[f64], x: f64) -> f64 {
    if x <= grid[0] {
        0.0
    } else if x > grid[grid.len() - 1] {
        1.0
    } else {
        interp(grid, cdf, x)
    }
}

/// W1 between two gridded densities.
pub fn wasserstein1_densities(grid_a: &[f64], a: &[f64], grid_b: &[f64], b: &[f64]) -> Result<f64> {
    check_grid(grid_a, a)?;
    check_grid(grid_b, b)?;
    let ca = density_cdf(grid_a, a);
    let cb = density_cdf(grid_b, b);
    let mut points: Vec<f64> = grid_a.iter().chain(grid_b.iter()).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let eval = |grid: &[f64], cdf: &[f64], x: f64| {
        if x <= grid[0] {
            0.0
        } else if x >= grid[grid.len() - 1] {
            1.0
        } else {
            interp(grid, cdf, x)
        }
    };
    Ok(points
        .windows(2)
        .map(|w| {
            let f0 = eval(grid_a, &ca, w[0]) - eval(grid_b, &cb, w[0]);
            let f1 = eval(grid_a, &ca, w[1]) - eval(grid_b, &cb, w[1]);
            abs_linear_integral(w[1] - w[0], f0, f1)
        })
        .sum())
}

fn check_grid(grid: &[f64], density: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid.len() != density.len() {
        return Err(invalid("grid", "need at least two grid points and one density value per point"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid", "must be strictly increasing"));
    }
    Ok(())
}

/// Removes a grid region where `density` exceeds `factor` times its median
/// over positive values, plus the samples falling in it. Returns the filtered
/// `(samples, grid, density)` and the excluded intervals.
pub fn exclude_atoms(
    samples: &[f64],
    grid: &[f64],
    density: &[f64],
    factor: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<(f64, f64)>) {
    let positive: Vec<f64> = density.iter().copied().filter(|&v| v > 0.0).collect();
    let threshold = factor * median(&positive);
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut k = 0;
    while k < grid.len() {
        if density[k] > threshold {
            let start = k.saturating_sub(1);
            while k < grid.len() && density[k] > threshold {
                k += 1;
            }
            let end = k.min(grid.len() - 1);
            intervals.push((grid[start], grid[end]));
        }
        k += 1;
    }
    let inside = |x: f64| intervals.iter().any(|&(a, b)| x >= a && x <= b);
    let kept_samples = samples.iter().copied().filter(|&s| !inside(s)).collect();
    let (g, d): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(density)
        .map(|(&x, &y)| (x, if inside(x) { 0.0 } else { y }))
        .unzip();
    (kept_samples, g, d, intervals)
}
