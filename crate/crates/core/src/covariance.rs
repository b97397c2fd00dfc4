//! Population covariance models: identity, spiked, AR(1) Toeplitz, power-law
//! diagonal and user-supplied matrices.
//!
//! Every model materializes its dense matrix and a full eigendecomposition at
//! construction time. The eigendecomposition is the only route to `Σ^{1/2}`,
//! the eigenvalues and the diagonal of `Σ^{-1}`; no structure-specific shortcut
//! is taken for those quantities.

use std::path::Path;

use faer::{Mat, MatRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg;

/// Relative tolerance below zero accepted on the smallest eigenvalue of a
/// custom matrix before it is clipped.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// How the unit spike direction of a spiked model is chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SpikeMode {
    /// Uniform on the sphere. Without an explicit seed the build seed is used.
    UniformSphere {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// The canonical basis vector `e_index` (zero-based).
    Basis { index: usize },
}

impl Default for SpikeMode {
    fn default() -> Self {
        SpikeMode::UniformSphere { seed: None }
    }
}

/// Declarative description of a covariance family, as found in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovarianceSpec {
    Identity,
    Spiked {
        theta: f64,
        #[serde(default)]
        spike: SpikeMode,
    },
    Toeplitz {
        rho: f64,
    },
    PowerLaw {
        beta: f64,
    },
    Custom {
        matrix: Vec<Vec<f64>>,
    },
    CustomCsv {
        path: std::path::PathBuf,
    },
}

/// A realized spike direction.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeSpec {
    pub mode: SpikeMode,
    vector: Vec<f64>,
}

impl SpikeSpec {
    pub fn new(mode: SpikeMode, dim: usize, fallback_seed: u64) -> Result<Self> {
        let vector = match &mode {
            SpikeMode::Basis { index } => {
                if *index >= dim {
                    return Err(invalid("spike.index", format!("{index} is out of range for dimension {dim}")));
                }
                let mut v = vec![0.0; dim];
                v[*index] = 1.0;
                v
            }
            SpikeMode::UniformSphere { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(fallback_seed));
                let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= norm);
                v
            }
        };
        let mode = match mode {
            SpikeMode::UniformSphere { seed } => SpikeMode::UniformSphere {
                seed: Some(seed.unwrap_or(fallback_seed)),
            },
            other => other,
        };
        Ok(Self { mode, vector })
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }
}

/// Resolved covariance family with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum CovarianceKind {
    Identity,
    Spiked { theta: f64, spike: SpikeSpec },
    Toeplitz { rho: f64 },
    /// `C_β · diag(1, 2^{-β}, ..., d^{-β})` with `C_β` normalizing the trace to 1.
    PowerLawDiagonal { beta: f64, scale: f64 },
    Custom,
}

/// Structure that asymptotic kernels may exploit when evaluating resolvent
/// diagonals of `Δ - cΣ` for diagonal `Δ`.
#[derive(Clone, Debug)]
pub enum Structure<'a> {
    Diagonal(Vec<f64>),
    IdentityPlusRankOne { theta: f64, v: &'a [f64] },
    /// AR(1) covariance; its inverse is tridiagonal.
    Ar1 { rho: f64 },
    Dense,
}

/// A population covariance `Σ` with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct CovarianceModel {
    kind: CovarianceKind,
    dense: Mat<f64>,
    /// Nonincreasing.
    eigenvalues: Vec<f64>,
    /// Column `j` pairs with `eigenvalues[j]`.
    eigenvectors: Mat<f64>,
}

impl CovarianceModel {
    pub fn identity(dim: usize) -> Result<Self> {
        build_covariance(&CovarianceSpec::Identity, dim, None)
    }

    pub fn toeplitz(rho: f64, dim: usize) -> Result<Self> {
        build_covariance(&CovarianceSpec::Toeplitz { rho }, dim, None)
    }

    pub fn spiked(theta: f64, spike: SpikeMode, dim: usize, seed: u64) -> Result<Self> {
        build_covariance(&CovarianceSpec::Spiked { theta, spike }, dim, Some(seed))
    }

    pub fn power_law(beta: f64, dim: usize) -> Result<Self> {
        build_covariance(&CovarianceSpec::PowerLaw { beta }, dim, None)
    }

    /// Accepts a symmetric matrix whose smallest eigenvalue is at least
    /// `-1e-10·‖Σ‖`; negative eigenvalues within that band are clipped to zero.
    pub fn custom(matrix: Mat<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if d != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        if d < 2 {
            return Err(invalid("dim", "covariance dimension must be at least 2"));
        }
        let scale = linalg::max_abs(matrix.as_ref());
        if scale.is_nan() {
            return Err(invalid("matrix", "entries must be finite"));
        }
        let scale = scale.max(f64::MIN_POSITIVE);
        let asym = linalg::max_asymmetry(matrix.as_ref());
        if asym > 1e-10 * scale {
            return Err(Error::NotSymmetric { max_asymmetry: asym });
        }
        let mut dense = matrix;
        linalg::symmetrize_in_place(&mut dense);
        let (values, vectors) = linalg::sym_eigen(dense.as_ref())?;
        let norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let min = values.first().copied().unwrap_or(0.0);
        let tolerance = PSD_TOLERANCE * norm;
        if min < -tolerance {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
                tolerance,
            });
        }
        if min < 0.0 {
            let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
            dense = linalg::spectral_function(&clipped, vectors.as_ref(), |v| v);
        }
        Self::from_parts(CovarianceKind::Custom, dense)
    }

    /// Reads a `d × d` comma-separated matrix, one row per line.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let matrix = crate::io::read_matrix_csv(path)?;
        Self::custom(matrix)
    }

    fn from_parts(kind: CovarianceKind, dense: Mat<f64>) -> Result<Self> {
        let (mut values, vectors) = linalg::sym_eigen(dense.as_ref())?;
        let d = values.len();
        values.reverse();
        let eigenvectors = Mat::from_fn(d, d, |i, j| vectors[(i, d - 1 - j)]);
        // Exact-zero eigenvalues can come back as -1e-17.
        values.iter_mut().for_each(|v| {
            if *v < 0.0 {
                *v = 0.0;
            }
        });
        Ok(Self {
            kind,
            dense,
            eigenvalues: values,
            eigenvectors,
        })
    }

    pub fn kind(&self) -> &CovarianceKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dense.nrows()
    }

    pub fn dense(&self) -> MatRef<'_, f64> {
        self.dense.as_ref()
    }

    /// Nonincreasing eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, f64> {
        self.eigenvectors.as_ref()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(self.dense.as_ref())
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn spike(&self) -> Option<(f64, &SpikeSpec)> {
        match &self.kind {
            CovarianceKind::Spiked { theta, spike } => Some((*theta, spike)),
            _ => None,
        }
    }

    /// Short identifier used to tag datasets and reports.
    pub fn describe(&self) -> String {
        let d = self.dim();
        match &self.kind {
            CovarianceKind::Identity => format!("identity(d={d})"),
            CovarianceKind::Spiked { theta, spike } => match &spike.mode {
                SpikeMode::UniformSphere { seed } => {
                    format!("spiked(theta={theta},spike=uniform_sphere(seed={}),d={d})", seed.unwrap_or(0))
                }
                SpikeMode::Basis { index } => format!("spiked(theta={theta},spike=e{index},d={d})"),
            },
            CovarianceKind::Toeplitz { rho } => format!("toeplitz(rho={rho},d={d})"),
            CovarianceKind::PowerLawDiagonal { beta, .. } => format!("power_law(beta={beta},d={d})"),
            CovarianceKind::Custom => format!("custom(d={d})"),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.dense[(i, j)] == 0.0))
    }

    pub fn structure(&self) -> Structure<'_> {
        match &self.kind {
            CovarianceKind::Spiked { theta, spike } => Structure::IdentityPlusRankOne {
                theta: *theta,
                v: spike.vector(),
            },
            CovarianceKind::Toeplitz { rho } => Structure::Ar1 { rho: *rho },
            _ if self.is_diagonal() => Structure::Diagonal((0..self.dim()).map(|i| self.dense[(i, i)]).collect()),
            _ => Structure::Dense,
        }
    }

    /// Symmetric PSD square root `S` with `S·S = Σ`.
    pub fn sqrt(&self) -> Mat<f64> {
        linalg::spectral_function(&self.eigenvalues, self.eigenvectors.as_ref(), |v| v.max(0.0).sqrt())
    }

    /// `(Σ + κI)^{-1}` through the eigendecomposition.
    pub fn shifted_inverse(&self, kappa: f64) -> Mat<f64> {
        linalg::spectral_function(&self.eigenvalues, self.eigenvectors.as_ref(), |v| 1.0 / (v + kappa))
    }

    /// Diagonal of `g(Σ)` for a spectral function `g`, i.e. `Σ_j U_kj² g(σ_j)`.
    pub fn spectral_diagonal(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        let d = self.dim();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&v| g(v)).collect();
        (0..d)
            .map(|k| {
                (0..d)
                    .map(|j| {
                        let u = self.eigenvectors[(k, j)];
                        u * u * weights[j]
                    })
                    .sum()
            })
            .collect()
    }

    pub(crate) fn require_definite(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min <= 1e-12 * self.operator_norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Singular { min_eigenvalue: min });
        }
        Ok(())
    }

    /// Entries `1/(Σ^{-1})_kk`, the conditional variance of coordinate `k`
    /// given all others.
    pub fn diag_precision_inverse(&self) -> Result<Vec<f64>> {
        self.require_definite()?;
        Ok(self.spectral_diagonal(|v| 1.0 / v).into_iter().map(|p| 1.0 / p).collect())
    }
}

/// Builds a covariance model. `seed` drives the uniform-sphere spike when the
/// spike mode carries no seed of its own.
pub fn build_covariance(spec: &CovarianceSpec, dim: usize, seed: Option<u64>) -> Result<CovarianceModel> {
    if dim < 2 {
        return Err(invalid("dim", format!("dimension must be at least 2, got {dim}")));
    }
    let d = dim;
    match spec {
        CovarianceSpec::Identity => {
            CovarianceModel::from_parts(CovarianceKind::Identity, Mat::from_fn(d, d, |i, j| f64::from(u8::from(i == j))))
        }
        CovarianceSpec::Spiked { theta, spike } => {
            if !(theta.is_finite() && *theta >= 0.0) {
                return Err(invalid("theta", format!("must be a nonnegative real, got {theta}")));
            }
            let spike = SpikeSpec::new(spike.clone(), d, seed.unwrap_or(0))?;
            let v = spike.vector();
            let dense = Mat::from_fn(d, d, |i, j| f64::from(u8::from(i == j)) + theta * v[i] * v[j]);
            CovarianceModel::from_parts(CovarianceKind::Spiked { theta: *theta, spike }, dense)
        }
        CovarianceSpec::Toeplitz { rho } => {
            if !(*rho > 0.0 && *rho < 1.0) {
                return Err(invalid("rho", format!("must lie in (0, 1), got {rho}")));
            }
            let dense = Mat::from_fn(d, d, |i, j| rho.powi(i.abs_diff(j) as i32));
            CovarianceModel::from_parts(CovarianceKind::Toeplitz { rho: *rho }, dense)
        }
        CovarianceSpec::PowerLaw { beta } => {
            if !(beta.is_finite() && *beta > 0.0) {
                return Err(invalid("beta", format!("must be positive, got {beta}")));
            }
            let raw: Vec<f64> = (1..=d).map(|k| (k as f64).powf(-beta)).collect();
            let scale = 1.0 / raw.iter().sum::<f64>();
            let dense = Mat::from_fn(d, d, |i, j| if i == j { scale * raw[i] } else { 0.0 });
            CovarianceModel::from_parts(CovarianceKind::PowerLawDiagonal { beta: *beta, scale }, dense)
        }
        CovarianceSpec::Custom { matrix } => {
            let m = linalg::from_rows(matrix)?;
            if m.nrows() != d {
                return Err(Error::DimensionMismatch {
                    expected: format!("{d}x{d}"),
                    found: format!("{}x{}", m.nrows(), m.ncols()),
                });
            }
            CovarianceModel::custom(m)
        }
        CovarianceSpec::CustomCsv { path } => {
            let model = CovarianceModel::from_csv(path)?;
            if model.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: format!("{d}x{d}"),
                    found: format!("{0}x{0}", model.dim()),
                });
            }
            Ok(model)
        }
    }
}

/// `Σ^{1/2}` of a model.
pub fn covariance_sqrt(model: &CovarianceModel) -> Mat<f64> {
    model.sqrt()
}

/// Conditional variances `1/(Σ^{-1})_kk`.
pub fn diag_precision_inverse(model: &CovarianceModel) -> Result<Vec<f64>> {
    model.diag_precision_inverse()
}

/// Limiting eigenvalue profile of the AR(1) covariance,
/// `E(x) = (1-ρ²)/(1+ρ²-2ρcos(πx))` for `x ∈ [0, 1]`.
pub fn ar1_eigendensity(rho: f64, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid("rho", format!("must lie in [0, 1), got {rho}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid("x", format!("must lie in [0, 1], got {x}")));
    }
    Ok((1.0 - rho * rho) / (1.0 + rho * rho - 2.0 * rho * (std::f64::consts::PI * x).cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_matrix(m: MatRef<'_, f64>, expected: &[&[f64]], tol: f64) {
        for (i, row) in expected.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert!((m[(i, j)] - e).abs() <= tol, "entry ({i},{j}) = {} expected {e}", m[(i, j)]);
            }
        }
    }

    #[test]
    fn identity_is_identity() {
        let m = CovarianceModel::identity(3).unwrap();
        assert_matrix(m.dense(), &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]], 0.0);
        assert_matrix(m.sqrt().as_ref(), &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]], 1e-14);
    }

    #[test]
    fn toeplitz_entries() {
        let m = CovarianceModel::toeplitz(0.5, 3).unwrap();
        assert_matrix(m.dense(), &[&[1.0, 0.5, 0.25], &[0.5, 1.0, 0.5], &[0.25, 0.5, 1.0]], 0.0);
    }

    #[test]
    fn spiked_along_basis_vector() {
        let m = CovarianceModel::spiked(1.0, SpikeMode::Basis { index: 0 }, 2, 0).unwrap();
        assert_matrix(m.dense(), &[&[2.0, 0.0], &[0.0, 1.0]], 0.0);
        let s = CovarianceModel::spiked(3.0, SpikeMode::Basis { index: 0 }, 2, 0).unwrap().sqrt();
        assert_matrix(s.as_ref(), &[&[2.0, 0.0], &[0.0, 1.0]], 1e-14);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let m = CovarianceModel::custom(linalg::from_rows(&[vec![4.0, 0.0], vec![0.0, 9.0]]).unwrap()).unwrap();
        assert_matrix(m.sqrt().as_ref(), &[&[2.0, 0.0], &[0.0, 3.0]], 1e-14);
    }

    #[test]
    fn conditional_variances() {
        let id = CovarianceModel::identity(4).unwrap();
        for v in id.diag_precision_inverse().unwrap() {
            assert!((v - 1.0).abs() < 1e-14);
        }
        // [[1, ρ], [ρ, 1]]^{-1} has diagonal 1/(1-ρ²).
        let t = CovarianceModel::toeplitz(0.5, 2).unwrap();
        for v in t.diag_precision_inverse().unwrap() {
            assert!((v - 0.75).abs() < 1e-14);
        }
        let s = CovarianceModel::spiked(1.0, SpikeMode::Basis { index: 0 }, 2, 0).unwrap();
        let v = s.diag_precision_inverse().unwrap();
        assert!((v[0] - 2.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_covariance_reports_eigenvalue() {
        let m = CovarianceModel::custom(linalg::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap()).unwrap();
        match m.diag_precision_inverse() {
            Err(Error::Singular { min_eigenvalue }) => assert!(min_eigenvalue.abs() < 1e-12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn parameter_ranges() {
        assert!(CovarianceModel::toeplitz(1.0, 3).is_err());
        assert!(CovarianceModel::toeplitz(0.0, 3).is_err());
        assert!(CovarianceModel::identity(1).is_err());
        assert!(CovarianceModel::power_law(0.0, 3).is_err());
        assert!(CovarianceModel::spiked(-1.0, SpikeMode::default(), 3, 0).is_err());
    }

    #[test]
    fn custom_rejects_indefinite_and_clips_noise() {
        let bad = linalg::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        match CovarianceModel::custom(bad) {
            Err(Error::NotPositiveSemidefinite { min_eigenvalue, .. }) => assert!((min_eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("expected PSD error, got {other:?}"),
        }
        // Rank-one matrix perturbed by -1e-13 along the null direction.
        let eps = 1e-13;
        let noisy = linalg::from_rows(&[vec![1.0 - eps / 2.0, 1.0 + eps / 2.0], vec![1.0 + eps / 2.0, 1.0 - eps / 2.0]]).unwrap();
        let m = CovarianceModel::custom(noisy).unwrap();
        assert!(m.min_eigenvalue() >= 0.0);
        let asym = linalg::from_rows(&[vec![1.0, 0.1], vec![0.2, 1.0]]).unwrap();
        assert!(matches!(CovarianceModel::custom(asym), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn power_law_has_unit_trace() {
        for beta in [0.5, 2.0] {
            let m = CovarianceModel::power_law(beta, 50).unwrap();
            assert!((m.trace() - 1.0).abs() < 1e-12);
            let d = m.dense();
            assert!((d[(1, 1)] / d[(0, 0)] - 2f64.powf(-beta)).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_sum_to_trace_and_are_sorted() {
        let models = [
            CovarianceModel::identity(20).unwrap(),
            CovarianceModel::toeplitz(0.7, 20).unwrap(),
            CovarianceModel::spiked(2.0, SpikeMode::default(), 20, 3).unwrap(),
            CovarianceModel::power_law(1.0, 20).unwrap(),
        ];
        for m in &models {
            let sum: f64 = m.eigenvalues().iter().sum();
            assert!((sum - m.trace()).abs() <= 1e-9 * m.trace());
            assert!(m.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn spiked_trace_and_unit_spike() {
        let m = CovarianceModel::spiked(1.5, SpikeMode::UniformSphere { seed: Some(9) }, 40, 0).unwrap();
        assert!((m.trace() - 41.5).abs() < 1e-10);
        let (_, spike) = m.spike().unwrap();
        let norm: f64 = spike.vector().iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigendensity_endpoints() {
        assert!((ar1_eigendensity(0.5, 0.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((ar1_eigendensity(0.5, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((ar1_eigendensity(0.0, 0.37).unwrap() - 1.0).abs() < 1e-14);
        assert!(ar1_eigendensity(0.5, 1.5).is_err());
    }
}
