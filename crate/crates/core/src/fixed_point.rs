//! Scalar self-consistent equations of the deterministic equivalents.
//!
//! * `κ = λ + (κ/n)·df₁(κ)`, the effective regularization.
//! * `m̃ = 1 / (λ + (1/n)Tr(Σ(m̃Σ + I)^{-1}))`, whose solution is `1/κ`.
//! * The complex equation `χ = (1/n)Tr(Σ(D̄/z − λ − Σ/(1−χ))^{-1})` with
//!   `D̄ = d_spec`, which drives the spectral deterministic equivalent.
//!
//! The real equations are solved by damped Picard iteration with a bisection
//! fallback on the monotone map. `κ` and `m̃` are solved independently so that
//! `m̃·κ = 1` is a genuine check.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::covariance::{CovarianceModel, Structure};
use crate::error::{invalid, Error, Result};

const PICARD_DAMPING: f64 = 0.5;
const PICARD_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMethod {
    Picard,
    Bisection,
    /// `λ = 0` with `n` at least the rank of `Σ`: `κ = 0` exactly.
    RidgelessLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSolution {
    pub lambda: f64,
    pub n: usize,
    pub kappa: f64,
    pub m_tilde: f64,
    /// `1/(λm̃) − 1`.
    pub nu: f64,
    /// `|κ − λ − (κ/n)·df₁(κ)|`.
    pub residual: f64,
    pub iterations: usize,
    pub method: FixedPointMethod,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "sample size must be at least 1"));
    }
    Ok(())
}

/// `(df₁, df₂)` at `κ`. Zero eigenvalues contribute nothing.
pub fn degrees_of_freedom(model: &CovarianceModel, kappa: f64) -> Result<(f64, f64)> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(invalid("kappa", format!("must be a nonnegative real, got {kappa}")));
    }
    Ok(df_from_eigenvalues(model.eigenvalues(), kappa))
}

pub(crate) fn df_from_eigenvalues(eigenvalues: &[f64], kappa: f64) -> (f64, f64) {
    let mut df1 = 0.0;
    let mut df2 = 0.0;
    for &s in eigenvalues {
        if s > 0.0 {
            let r = s / (s + kappa);
            df1 += r;
            df2 += r * r;
        }
    }
    (df1, df2)
}

fn kappa_residual(eigenvalues: &[f64], n: f64, lambda: f64, kappa: f64) -> f64 {
    let (df1, _) = df_from_eigenvalues(eigenvalues, kappa);
    kappa - lambda - kappa / n * df1
}

/// Bisection of an increasing function on `[lo, hi]` with `f(lo) ≤ 0 ≤ f(hi)`,
/// run until the bracket stops shrinking.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, usize) {
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || iterations >= 2000 {
            break;
        }
        iterations += 1;
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = if f(hi).abs() < f(lo).abs() { hi } else { lo };
    (x, iterations)
}

/// Solves for `κ(λ)`. With `λ = 0` the ridgeless limit is returned: the root of
/// `df₁(κ) = n` when `n` is below the rank of `Σ`, and `κ = 0` otherwise.
pub fn solve_kappa(model: &CovarianceModel, n: usize, lambda: f64) -> Result<FixedPointSolution> {
    check_n(n)?;
    if lambda == 0.0 {
        return solve_kappa_ridgeless(model, n);
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("must be a nonnegative real, got {lambda}")));
    }
    let eig = model.eigenvalues();
    let nf = n as f64;
    let upper = lambda + model.trace() / nf;
    let tol = |k: f64| 1e-13 * k;

    let mut kappa = upper;
    let mut iterations = 0;
    let mut method = FixedPointMethod::Picard;
    let mut converged = false;
    while iterations < PICARD_MAX_ITER {
        let (df1, _) = df_from_eigenvalues(eig, kappa);
        let image = lambda + kappa / nf * df1;
        if (kappa - image).abs() <= tol(kappa) {
            converged = true;
            break;
        }
        kappa = (1.0 - PICARD_DAMPING) * kappa + PICARD_DAMPING * image;
        iterations += 1;
    }
    if !converged {
        method = FixedPointMethod::Bisection;
        let (k, it) = bisect(lambda, upper, |k| kappa_residual(eig, nf, lambda, k));
        kappa = k;
        iterations += it;
    }
    let residual = kappa_residual(eig, nf, lambda, kappa).abs();
    if residual > 1e-12 * kappa.max(1.0) {
        return Err(Error::NonConvergence {
            solver: "kappa fixed point",
            iterations,
            residual,
        });
    }
    let m_tilde = solve_mtilde(model, n, lambda)?;
    Ok(FixedPointSolution {
        lambda,
        n,
        kappa,
        m_tilde,
        nu: 1.0 / (lambda * m_tilde) - 1.0,
        residual,
        iterations,
        method,
    })
}

fn solve_kappa_ridgeless(model: &CovarianceModel, n: usize) -> Result<FixedPointSolution> {
    let eig = model.eigenvalues();
    let nf = n as f64;
    let rank = eig.iter().filter(|&&s| s > 0.0).count();
    if n >= rank {
        let nu = if n > rank { rank as f64 / (nf - rank as f64) } else { f64::INFINITY };
        return Ok(FixedPointSolution {
            lambda: 0.0,
            n,
            kappa: 0.0,
            m_tilde: f64::INFINITY,
            nu,
            residual: 0.0,
            iterations: 0,
            method: FixedPointMethod::RidgelessLimit,
        });
    }
    // df₁ decreases from rank to 0, so bracket the root of n − df₁(κ).
    let mut hi = model.trace() / nf;
    while df_from_eigenvalues(eig, hi).0 > nf {
        hi *= 2.0;
    }
    let (kappa, iterations) = bisect(0.0, hi, |k| nf - df_from_eigenvalues(eig, k).0);
    let residual = kappa_residual(eig, nf, 0.0, kappa).abs();
    Ok(FixedPointSolution {
        lambda: 0.0,
        n,
        kappa,
        m_tilde: 1.0 / kappa,
        nu: f64::INFINITY,
        residual,
        iterations,
        method: FixedPointMethod::Bisection,
    })
}

/// Solves for `m̃(λ)` by bisection on `[0, 1/λ]`, where the fixed-point map is
/// increasing and stays inside the bracket.
pub fn solve_mtilde(model: &CovarianceModel, n: usize, lambda: f64) -> Result<f64> {
    check_n(n)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("must be a positive real, got {lambda}")));
    }
    let eig = model.eigenvalues();
    let nf = n as f64;
    let map = |m: f64| 1.0 / (lambda + eig.iter().map(|&s| s / (m * s + 1.0)).sum::<f64>() / nf);
    let (m, iterations) = bisect(0.0, 1.0 / lambda, |m| m - map(m));
    let residual = (m - map(m)).abs();
    if residual > 1e-12 * m.max(1.0) {
        return Err(Error::NonConvergence {
            solver: "m-tilde fixed point",
            iterations,
            residual,
        });
    }
    Ok(m)
}

/// The two diagonal normalizations entering the deterministic equivalents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbarVectors {
    pub kappa: f64,
    pub m_tilde: f64,
    /// `1/[(Σ + κI)^{-1}]_kk`, used by the risk formulas.
    pub d_risk: Vec<f64>,
    /// `λ/[(m̃Σ + I)^{-1}]_kk`, used by the spectral formulas.
    pub d_spec: Vec<f64>,
}

pub fn dbar_vectors(model: &CovarianceModel, n: usize, lambda: f64) -> Result<DbarVectors> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("must be a positive real, got {lambda}")));
    }
    let sol = solve_kappa(model, n, lambda)?;
    Ok(dbar_from_solution(model, &sol))
}

pub(crate) fn dbar_from_solution(model: &CovarianceModel, sol: &FixedPointSolution) -> DbarVectors {
    let (kappa, m) = (sol.kappa, sol.m_tilde);
    let d_risk = model.spectral_diagonal(|s| 1.0 / (s + kappa)).into_iter().map(|v| 1.0 / v).collect();
    let d_spec = model
        .spectral_diagonal(|s| 1.0 / (m * s + 1.0))
        .into_iter()
        .map(|v| sol.lambda / v)
        .collect();
    DbarVectors {
        kappa,
        m_tilde: m,
        d_risk,
        d_spec,
    }
}

/// A converged solution of the complex `χ` equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSolution {
    pub z: C64,
    pub chi: C64,
    /// `|χ − F(χ)|` for the fixed-point map `F`.
    pub residual: f64,
    pub iterations: usize,
    /// `(1/d) Tr 𝒢(z)`.
    pub trace: C64,
}

/// How `diag((Δ − cΣ)^{-1})` is evaluated for diagonal `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResolventKernel {
    /// Exploit diagonal, rank-one or tridiagonal-inverse structure when present.
    Structured,
    /// Complex LU of the full matrix.
    Dense,
}

/// The `χ` equation for a fixed `(Σ, n, λ)`, reusable across many `z`.
#[derive(Clone, Debug)]
pub struct ChiProblem<'a> {
    model: &'a CovarianceModel,
    n: usize,
    lambda: f64,
    dbar: Vec<f64>,
    structure: Structure<'a>,
    kernel: ResolventKernel,
    solution: FixedPointSolution,
}

const CHI_TOL: f64 = 1e-12;
const CHI_ACCEPT: f64 = 1e-10;

impl<'a> ChiProblem<'a> {
    pub fn new(model: &'a CovarianceModel, n: usize, lambda: f64) -> Result<Self> {
        let solution = solve_kappa(model, n, lambda)?;
        if lambda <= 0.0 {
            return Err(invalid("lambda", "the spectral equation needs a positive lambda"));
        }
        let dbar = dbar_from_solution(model, &solution).d_spec;
        Ok(Self {
            model,
            n,
            lambda,
            dbar,
            structure: model.structure(),
            kernel: ResolventKernel::Structured,
            solution,
        })
    }

    pub fn with_kernel(mut self, kernel: ResolventKernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn fixed_point(&self) -> &FixedPointSolution {
        &self.solution
    }

    pub fn dbar(&self) -> &[f64] {
        &self.dbar
    }

    /// Diagonal of `(Δ − cΣ)^{-1}` with `Δ = D̄/z − λ`.
    fn resolvent_diagonal(&self, delta: &[C64], c: C64) -> Vec<C64> {
        let d = delta.len();
        match (&self.structure, self.kernel) {
            (Structure::Diagonal(sigma), ResolventKernel::Structured) => {
                delta.iter().zip(sigma).map(|(&dl, &s)| 1.0 / (dl - c * s)).collect()
            }
            (Structure::IdentityPlusRankOne { theta, v }, ResolventKernel::Structured) => {
                let a_inv: Vec<C64> = delta.iter().map(|&dl| 1.0 / (dl - c)).collect();
                let ct = c * *theta;
                let quad: C64 = v.iter().zip(&a_inv).map(|(&vi, &ai)| ai * vi * vi).sum();
                let denom = 1.0 - ct * quad;
                a_inv
                    .iter()
                    .zip(v.iter())
                    .map(|(&ai, &vi)| ai + ct * (ai * vi) * (ai * vi) / denom)
                    .collect()
            }
            (Structure::Ar1 { rho }, ResolventKernel::Structured) => {
                // Woodbury with the tridiagonal T = Σ^{-1}:
                // (Δ − cΣ)^{-1} = Δ^{-1} + Δ^{-1} M^{-1} Δ^{-1}, M = T/c − Δ^{-1}.
                let rho = *rho;
                let s = 1.0 / (1.0 - rho * rho);
                let off = -rho * s / c;
                let off2 = off * off;
                let inv_delta: Vec<C64> = delta.iter().map(|&dl| 1.0 / dl).collect();
                let m: Vec<C64> = (0..d)
                    .map(|i| {
                        let t = if i == 0 || i == d - 1 { s } else { (1.0 + rho * rho) * s };
                        t / c - inv_delta[i]
                    })
                    .collect();
                let mut f = vec![C64::new(0.0, 0.0); d];
                let mut g = vec![C64::new(0.0, 0.0); d];
                f[0] = m[0];
                for i in 1..d {
                    f[i] = m[i] - off2 / f[i - 1];
                }
                g[d - 1] = m[d - 1];
                for i in (0..d - 1).rev() {
                    g[i] = m[i] - off2 / g[i + 1];
                }
                (0..d)
                    .map(|i| {
                        let minv = 1.0 / (f[i] + g[i] - m[i]);
                        inv_delta[i] + minv * inv_delta[i] * inv_delta[i]
                    })
                    .collect()
            }
            _ => {
                let sigma = self.model.dense();
                let b = Mat::<C64>::from_fn(d, d, |i, j| {
                    let base = -c * sigma[(i, j)];
                    if i == j {
                        base + delta[i]
                    } else {
                        base
                    }
                });
                let inv = b.partial_piv_lu().inverse();
                (0..d).map(|i| inv[(i, i)]).collect()
            }
        }
    }

    /// `(Tr(ΣB^{-1}), Tr(D̄B^{-1}))` with `B = D̄/z − λ − Σ/(1−χ)`.
    fn traces(&self, z: C64, chi: C64) -> (C64, C64) {
        let c = 1.0 / (1.0 - chi);
        let delta: Vec<C64> = self.dbar.iter().map(|&db| db / z - self.lambda).collect();
        let diag = self.resolvent_diagonal(&delta, c);
        let d = delta.len() as f64;
        let sum_delta: C64 = delta.iter().zip(&diag).map(|(&a, &b)| a * b).sum();
        let t1 = (sum_delta - d) / c;
        let t2: C64 = self.dbar.iter().zip(&diag).map(|(&a, &b)| b * a).sum();
        (t1, t2)
    }

    /// The right-hand side `F(χ) = (1/n) Tr(Σ B^{-1})`.
    pub fn map(&self, z: C64, chi: C64) -> C64 {
        self.traces(z, chi).0 / self.n as f64
    }

    /// `(1/d) Tr 𝒢(z)` at a given `χ`, where
    /// `𝒢(z) = (D̄^{1/2}(Σ/(1−χ) + λ)^{-1}D̄^{1/2} − z)^{-1}`.
    pub fn trace_g(&self, z: C64, chi: C64) -> C64 {
        let (_, t2) = self.traces(z, chi);
        let d = self.dbar.len() as f64;
        -1.0 / z + t2 / (d * z * z)
    }

    fn residual(&self, z: C64, chi: C64) -> f64 {
        (self.map(z, chi) - chi).norm()
    }

    /// Newton iteration with a finite-difference derivative and backtracking.
    fn newton(&self, z: C64, init: C64, max_iter: usize) -> Option<(C64, f64, usize)> {
        let mut chi = init;
        let mut f = self.map(z, chi) - chi;
        let mut r = f.norm();
        for it in 0..max_iter {
            if !r.is_finite() {
                return None;
            }
            if r <= CHI_TOL * chi.norm().max(1.0) {
                return Some((chi, r, it));
            }
            let h = 1e-7 * chi.norm().max(1.0);
            let fh = self.map(z, chi + h) - (chi + h);
            let deriv = (fh - f) / h;
            let mut step = f / deriv;
            if !step.is_finite() {
                return None;
            }
            let mut accepted = false;
            for _ in 0..30 {
                let cand = chi - step;
                let fc = self.map(z, cand) - cand;
                if fc.norm().is_finite() && fc.norm() < r {
                    chi = cand;
                    f = fc;
                    r = fc.norm();
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (r <= CHI_ACCEPT * chi.norm().max(1.0)).then_some((chi, r, max_iter))
    }

    fn picard(&self, z: C64, init: C64, max_iter: usize) -> Option<(C64, f64, usize)> {
        let mut chi = init;
        for it in 0..max_iter {
            let next = self.map(z, chi);
            if !next.is_finite() {
                return None;
            }
            let r = (next - chi).norm();
            chi = 0.5 * chi + 0.5 * next;
            if r <= CHI_TOL * chi.norm().max(1.0) {
                return Some((chi, self.residual(z, chi), it + 1));
            }
        }
        let r = self.residual(z, chi);
        (r <= CHI_ACCEPT * chi.norm().max(1.0)).then_some((chi, r, max_iter))
    }

    fn accept(&self, z: C64, found: Option<(C64, f64, usize)>) -> Option<ChiSolution> {
        let (chi, residual, iterations) = found?;
        let trace = self.trace_g(z, chi);
        if !trace.is_finite() {
            return None;
        }
        if z.im > 0.0 && trace.im < -1e-10 * trace.norm().max(1.0) {
            return None;
        }
        Some(ChiSolution {
            z,
            chi,
            residual,
            iterations,
            trace,
        })
    }

    /// Solves at `z` starting from `init`, without any continuation.
    pub fn solve_from(&self, z: C64, init: C64) -> Option<ChiSolution> {
        self.accept(z, self.newton(z, init, 100))
    }

    /// Solves at `z`. Without a usable warm start, the solution is continued
    /// down from `z + iY` for a large `Y`, where the map is a contraction.
    /// A root failing the Stieltjes sign test is retried from its conjugate and
    /// finally by damped Picard iteration from `χ = 0`.
    pub fn solve(&self, z: C64, init: Option<C64>) -> Result<ChiSolution> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() == 0.0 {
            return Err(invalid("z", format!("must be finite and nonzero, got {z}")));
        }
        if z.im < 0.0 {
            return self.solve(z.conj(), init.map(|c| c.conj())).map(|s| ChiSolution {
                z,
                chi: s.chi.conj(),
                trace: s.trace.conj(),
                ..s
            });
        }
        if let Some(start) = init {
            if let Some(sol) = self.solve_from(z, start) {
                return Ok(sol);
            }
        }
        if let Some(sol) = self.continuation(z) {
            return Ok(sol);
        }
        let mut last = f64::NAN;
        for start in [init.map(|c| c.conj()), Some(C64::new(0.0, 0.0))].into_iter().flatten() {
            if let Some(sol) = self.solve_from(z, start) {
                return Ok(sol);
            }
            match self.accept(z, self.picard(z, start, 20_000)) {
                Some(sol) => return Ok(sol),
                None => last = self.residual(z, start),
            }
        }
        Err(Error::NonConvergence {
            solver: "chi fixed point",
            iterations: 20_000,
            residual: last,
        })
    }

    fn continuation(&self, z: C64) -> Option<ChiSolution> {
        let top = (10.0 * z.norm()).max(10.0);
        let floor = z.im.max(1e-14 * z.norm());
        let mut y = top;
        let mut chi = self.picard(C64::new(z.re, y), C64::new(0.0, 0.0), 5_000)?.0;
        while y > floor {
            y = (y * 0.7).max(floor);
            let zz = C64::new(z.re, y);
            let sol = self.solve_from(zz, chi)?;
            chi = sol.chi;
        }
        self.solve_from(z, chi)
    }
}

/// Solves the `χ` equation at one `z`. For many `z`, build a [`ChiProblem`].
pub fn solve_chi(model: &CovarianceModel, n: usize, lambda: f64, z: C64) -> Result<ChiSolution> {
    ChiProblem::new(model, n, lambda)?.solve(z, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::SpikeMode;

    #[test]
    fn isotropic_kappa_matches_quadratic() {
        // κ² + κ(1 − λ − 1/α) − λ = 0 for Σ = I.
        let model = CovarianceModel::identity(100).unwrap();
        let (alpha, lambda): (f64, f64) = (2.0, 0.01);
        let b = 1.0 - lambda - 1.0 / alpha;
        let expected = 0.5 * (-b + (b * b + 4.0 * lambda).sqrt());
        let sol = solve_kappa(&model, 200, lambda).unwrap();
        assert!((sol.kappa - expected).abs() < 1e-14, "{} vs {expected}", sol.kappa);
        assert!((sol.kappa - 0.019623).abs() < 1e-6);
        assert!((sol.m_tilde - 50.96).abs() < 0.01);
        assert!((sol.m_tilde * sol.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ridgeless_limits() {
        let model = CovarianceModel::identity(100).unwrap();
        let under = solve_kappa(&model, 50, 0.0).unwrap();
        assert!((under.kappa - 1.0).abs() < 1e-12);
        let over = solve_kappa(&model, 200, 0.0).unwrap();
        assert_eq!(over.kappa, 0.0);
        assert!((over.nu - 1.0).abs() < 1e-15);
        let small = solve_kappa(&model, 200, 1e-10).unwrap();
        assert!(small.kappa < 1e-9);
        assert!((small.nu - 1.0).abs() < 1e-6);
    }

    #[test]
    fn degrees_of_freedom_identity() {
        let model = CovarianceModel::identity(10).unwrap();
        let (df1, df2) = degrees_of_freedom(&model, 0.25).unwrap();
        assert!((df1 - 8.0).abs() < 1e-12);
        assert!((df2 - 6.4).abs() < 1e-12);
        let (a, b) = degrees_of_freedom(&model, 0.0).unwrap();
        assert_eq!((a, b), (10.0, 10.0));
    }

    #[test]
    fn dbar_proportionality() {
        let model = CovarianceModel::toeplitz(0.6, 30).unwrap();
        let v = dbar_vectors(&model, 45, 0.05).unwrap();
        for (r, s) in v.d_risk.iter().zip(&v.d_spec) {
            assert!((s - 0.05 / v.kappa * r).abs() <= 1e-10 * s.abs());
        }
    }

    #[test]
    fn mtilde_satisfies_isotropic_quadratic() {
        let model = CovarianceModel::identity(50).unwrap();
        let (alpha, lambda): (f64, f64) = (2.0, 0.01);
        let m = solve_mtilde(&model, 100, lambda).unwrap();
        // λm² + (λ + 1/α − 1)m − 1 = 0 for Σ = I.
        let q = lambda * m * m + (lambda + 1.0 / alpha - 1.0) * m - 1.0;
        assert!(q.abs() < 1e-10, "{q}");
    }

    #[test]
    fn chi_matches_diagonal_quadratic() {
        // Ridgeless diagonal Σ: χ² + (z−1)χ + z/(α−1) = 0.
        let alpha = 3.0;
        let d = 200;
        let model = CovarianceModel::power_law(1.0, d).unwrap();
        let problem = ChiProblem::new(&model, (alpha * d as f64) as usize, 1e-10).unwrap();
        for z in [C64::new(0.6, 0.05), C64::new(1.5, 0.2), C64::new(3.0, 0.01)] {
            let sol = problem.solve(z, None).unwrap();
            let q = sol.chi * sol.chi + (z - 1.0) * sol.chi + z / (alpha - 1.0);
            assert!(q.norm() < 1e-6, "z={z} chi={} q={q}", sol.chi);
            assert!(sol.trace.im > 0.0);
        }
    }

    #[test]
    fn structured_kernels_match_dense() {
        let d = 40;
        let models = [
            CovarianceModel::toeplitz(0.7, d).unwrap(),
            CovarianceModel::spiked(2.0, SpikeMode::UniformSphere { seed: Some(5) }, d, 0).unwrap(),
            CovarianceModel::power_law(0.5, d).unwrap(),
        ];
        for model in &models {
            let fast = ChiProblem::new(model, 80, 0.05).unwrap();
            let slow = fast.clone().with_kernel(ResolventKernel::Dense);
            for (z, chi) in [(C64::new(0.8, 0.1), C64::new(-0.3, 0.2)), (C64::new(1.7, 0.01), C64::new(0.1, -0.4))] {
                let a = fast.map(z, chi);
                let b = slow.map(z, chi);
                assert!((a - b).norm() < 1e-10 * b.norm().max(1.0), "{a} vs {b}");
                let ta = fast.trace_g(z, chi);
                let tb = slow.trace_g(z, chi);
                assert!((ta - tb).norm() < 1e-10 * tb.norm().max(1.0));
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let model = CovarianceModel::identity(20).unwrap();
        let problem = ChiProblem::new(&model, 40, 0.01).unwrap();
        let up = problem.solve(C64::new(1.2, 0.1), None).unwrap();
        let down = problem.solve(C64::new(1.2, -0.1), None).unwrap();
        assert!((up.chi.conj() - down.chi).norm() < 1e-12);
    }
}
