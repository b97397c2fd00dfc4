//! The masked ridge estimator and exact finite-dimensional risk formulas.
//!
//! Column `k` of `Â` is the ridge regression of feature `k` on all other
//! features. Stacking the `d` problems gives the closed form `Â = I − QΛ` with
//! `Q = (Σ̂ + λI)^{-1}` and `Λ = diag(Q)^{-1}`.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceModel;
use crate::error::{invalid, Error, Result};
use crate::linalg;

/// Distribution of the i.i.d. entries of `Z` in `X = ZΣ^{1/2}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryDist {
    #[default]
    Gaussian,
    Rademacher,
}

/// An `n × d` design matrix with the provenance needed to regenerate it.
#[derive(Clone, Debug)]
pub struct Dataset {
    x: Mat<f64>,
    pub seed: u64,
    pub entry_dist: EntryDist,
    pub sigma_ref: String,
}

impl Dataset {
    pub fn new(x: Mat<f64>, seed: u64, entry_dist: EntryDist, sigma_ref: impl Into<String>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(invalid("X", format!("empty design matrix {}x{}", x.nrows(), x.ncols())));
        }
        Ok(Self {
            x,
            seed,
            entry_dist,
            sigma_ref: sigma_ref.into(),
        })
    }

    /// A dataset with no generating model, e.g. loaded from a file.
    pub fn from_matrix(x: Mat<f64>) -> Result<Self> {
        Self::new(x, 0, EntryDist::Gaussian, "external")
    }

    pub fn x(&self) -> MatRef<'_, f64> {
        self.x.as_ref()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    /// `Σ̂ = XᵀX / n`.
    pub fn sample_covariance(&self) -> Mat<f64> {
        let mut s = self.x.transpose() * &self.x;
        let inv_n = 1.0 / self.n() as f64;
        linalg::scale_in_place(&mut s, inv_n);
        linalg::symmetrize_in_place(&mut s);
        s
    }
}

/// A fitted masked ridge estimate.
#[derive(Clone, Debug)]
pub struct SsrEstimate {
    pub a_hat: Mat<f64>,
    pub lambda: f64,
    /// `(Σ̂ + λI)^{-1}`.
    pub q: Mat<f64>,
    /// `1 / diag(Q)`.
    pub lambda_diag: Vec<f64>,
}

impl SsrEstimate {
    fn from_resolvent(q: Mat<f64>, lambda: f64) -> Result<Self> {
        let d = q.nrows();
        let mut lambda_diag = Vec::with_capacity(d);
        for k in 0..d {
            let qkk = q[(k, k)];
            if !(qkk > 0.0) {
                return Err(Error::Numeric {
                    context: "masked ridge fit",
                    reason: format!("resolvent diagonal entry {k} is {qkk}, expected positive"),
                });
            }
            lambda_diag.push(1.0 / qkk);
        }
        let a_hat = Mat::from_fn(d, d, |i, j| if i == j { 0.0 } else { -q[(i, j)] * lambda_diag[j] });
        Ok(Self {
            a_hat,
            lambda,
            q,
            lambda_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.a_hat.nrows()
    }
}

/// Route used to form `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionPath {
    /// Picks `Dual` when `n < d/2`, `Primal` otherwise.
    Auto,
    /// Cholesky of the `d × d` matrix `Σ̂ + λI`.
    Primal,
    /// `Q = (I − Xᵀ(nλI + XXᵀ)^{-1}X)/λ`, an `n × n` factorization.
    Dual,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("must be a positive real, got {lambda}")));
    }
    Ok(())
}

pub fn fit_ssr(data: &Dataset, lambda: f64) -> Result<SsrEstimate> {
    fit_ssr_with(data, lambda, InversionPath::Auto)
}

pub fn fit_ssr_with(data: &Dataset, lambda: f64, path: InversionPath) -> Result<SsrEstimate> {
    check_lambda(lambda)?;
    let (n, d) = (data.n(), data.d());
    let dual = match path {
        InversionPath::Auto => 2 * n < d,
        InversionPath::Primal => false,
        InversionPath::Dual => true,
    };
    let q = if dual {
        let x = data.x();
        let mut k = x * x.transpose();
        let shift = n as f64 * lambda;
        for i in 0..n {
            k[(i, i)] += shift;
        }
        let kx = linalg::spd_solve(k.as_ref(), x)?;
        let mut q = x.transpose() * &kx;
        linalg::scale_in_place(&mut q, -1.0 / lambda);
        for i in 0..d {
            q[(i, i)] += 1.0 / lambda;
        }
        linalg::symmetrize_in_place(&mut q);
        q
    } else {
        let mut s = data.sample_covariance();
        for i in 0..d {
            s[(i, i)] += lambda;
        }
        linalg::spd_inverse(s.as_ref())?
    };
    SsrEstimate::from_resolvent(q, lambda)
}

/// Brute-force oracle: `d` separate ridge regressions, each on the reduced
/// covariance with row and column `k` removed.
pub fn fit_ssr_coordinatewise(data: &Dataset, lambda: f64) -> Result<SsrEstimate> {
    check_lambda(lambda)?;
    let d = data.d();
    let s = data.sample_covariance();
    let mut a_hat = Mat::<f64>::zeros(d, d);
    for k in 0..d {
        let others: Vec<usize> = (0..d).filter(|&j| j != k).collect();
        let m = others.len();
        if m == 0 {
            continue;
        }
        let reduced = Mat::from_fn(m, m, |i, j| s[(others[i], others[j])] + if i == j { lambda } else { 0.0 });
        let rhs = Mat::from_fn(m, 1, |i, _| s[(others[i], k)]);
        let coef = linalg::spd_solve(reduced.as_ref(), rhs.as_ref())?;
        for (i, &row) in others.iter().enumerate() {
            a_hat[(row, k)] = coef[(i, 0)];
        }
    }
    let mut shifted = s;
    for i in 0..d {
        shifted[(i, i)] += lambda;
    }
    let q = linalg::spd_inverse(shifted.as_ref())?;
    let lambda_diag = (0..d).map(|k| 1.0 / q[(k, k)]).collect();
    Ok(SsrEstimate {
        a_hat,
        lambda,
        q,
        lambda_diag,
    })
}

fn check_square(a: MatRef<'_, f64>, d: usize) -> Result<()> {
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: format!("{d}x{d}"),
            found: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    Ok(())
}

/// `(1/d) Tr((I − A)ᵀ Σ (I − A))`.
pub fn population_risk(a: MatRef<'_, f64>, model: &CovarianceModel) -> Result<f64> {
    let d = model.dim();
    check_square(a, d)?;
    let r = Mat::from_fn(d, d, |i, j| f64::from(u8::from(i == j)) - a[(i, j)]);
    let sr = model.dense() * &r;
    let mut acc = 0.0;
    for j in 0..d {
        for i in 0..d {
            acc += r[(i, j)] * sr[(i, j)];
        }
    }
    Ok((acc / d as f64).max(0.0))
}

/// `‖X − XA‖_F² / (nd)`.
pub fn empirical_risk(a: MatRef<'_, f64>, data: &Dataset) -> Result<f64> {
    let d = data.d();
    check_square(a, d)?;
    let x = data.x();
    let mut resid = x * a;
    for j in 0..d {
        for i in 0..data.n() {
            resid[(i, j)] = x[(i, j)] - resid[(i, j)];
        }
    }
    let f = linalg::frobenius_norm(resid.as_ref());
    Ok(f * f / (data.n() as f64 * d as f64))
}

/// Largest off-diagonal entry of `−Σ̂ + (Σ̂ + λI)Â`, the stationarity residual
/// of the joint objective restricted to the free coordinates.
pub fn kkt_residual(data: &Dataset, estimate: &SsrEstimate) -> Result<f64> {
    let d = data.d();
    check_square(estimate.a_hat.as_ref(), d)?;
    let s = data.sample_covariance();
    let sa = &s * &estimate.a_hat;
    let mut worst = 0.0_f64;
    for j in 0..d {
        for i in 0..d {
            if i != j {
                let g = -s[(i, j)] + sa[(i, j)] + estimate.lambda * estimate.a_hat[(i, j)];
                worst = worst.max(g.abs());
            }
        }
    }
    Ok(worst)
}

/// Best zero-diagonal linear predictor under the population covariance.
#[derive(Clone, Debug)]
pub struct ApproximationResult {
    pub a_app: Mat<f64>,
    pub l_app: f64,
}

pub fn approximation_optimum(model: &CovarianceModel) -> Result<ApproximationResult> {
    model.require_definite()?;
    let d = model.dim();
    let p = linalg::spectral_function(model.eigenvalues(), model.eigenvectors(), |v| 1.0 / v);
    let a_app = Mat::from_fn(d, d, |i, j| if i == j { 0.0 } else { -p[(i, j)] / p[(j, j)] });
    let l_app = (0..d).map(|k| 1.0 / p[(k, k)]).sum::<f64>() / d as f64;
    Ok(ApproximationResult { a_app, l_app })
}

/// Covariance from which principal directions are taken.
#[derive(Clone, Copy, Debug)]
pub enum PcaReference<'a> {
    Population(&'a CovarianceModel),
    Sample(&'a Dataset),
}

/// Projection onto the top `p` eigenvectors of the reference covariance.
#[derive(Clone, Debug)]
pub struct PcaResult {
    pub p: usize,
    pub projector: Mat<f64>,
    /// `(1/d)` times the sum of the `d − p` smallest reference eigenvalues.
    pub population_risk: f64,
    pub gamma: f64,
}

pub fn pca_fit(reference: PcaReference<'_>, p: usize) -> Result<PcaResult> {
    let (values, vectors) = match reference {
        PcaReference::Population(model) => {
            let d = model.dim();
            // Stored nonincreasing; flip to the nondecreasing convention below.
            let vals: Vec<f64> = model.eigenvalues().iter().rev().copied().collect();
            let vecs = Mat::from_fn(d, d, |i, j| model.eigenvectors()[(i, d - 1 - j)]);
            (vals, vecs)
        }
        PcaReference::Sample(data) => linalg::sym_eigen(data.sample_covariance().as_ref())?,
    };
    let d = values.len();
    if p > d {
        return Err(invalid("p", format!("{p} exceeds dimension {d}")));
    }
    let top = d - p..d;
    let projector = Mat::from_fn(d, d, |i, j| top.clone().map(|c| vectors[(i, c)] * vectors[(j, c)]).sum());
    let population_risk = values[..d - p].iter().map(|v| v.max(0.0)).sum::<f64>() / d as f64;
    Ok(PcaResult {
        p,
        projector,
        population_risk,
        gamma: p as f64 / d as f64,
    })
}

/// Eigenvalues of `Â`, nondecreasing, computed as `1 − eig(Λ^{1/2} Q Λ^{1/2})`.
pub fn ssr_spectrum_empirical(estimate: &SsrEstimate) -> Result<Vec<f64>> {
    let d = estimate.dim();
    let mut root = Vec::with_capacity(d);
    for k in 0..d {
        let qkk = estimate.q[(k, k)];
        if !(qkk > 0.0) {
            return Err(Error::Numeric {
                context: "masked ridge spectrum",
                reason: format!("resolvent diagonal entry {k} is {qkk}, expected positive"),
            });
        }
        root.push((1.0 / qkk).sqrt());
    }
    let m = Mat::from_fn(d, d, |i, j| root[i] * estimate.q[(i, j)] * root[j]);
    let mut eig = linalg::sym_eigenvalues(m.as_ref())?;
    eig.iter_mut().for_each(|v| *v = 1.0 - *v);
    eig.reverse();
    Ok(eig)
}
