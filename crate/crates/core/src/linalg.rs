//! Thin helpers over `faer` for the dense symmetric work used everywhere else.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix, eigenvalues nondecreasing.
pub fn sym_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Numeric {
        context: "symmetric eigendecomposition",
        reason: format!("{e:?}"),
    })?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

/// Eigenvalues of a symmetric matrix, nondecreasing.
pub fn sym_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric {
            context: "symmetric eigenvalues",
            reason: format!("{e:?}"),
        })
}

/// Inverse of a symmetric positive-definite matrix through its Cholesky factor.
pub fn spd_inverse(a: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let llt = a.llt(Side::Lower).map_err(|e| Error::Numeric {
        context: "Cholesky factorization",
        reason: format!("{e:?}"),
    })?;
    let mut inv = llt.inverse();
    symmetrize_in_place(&mut inv);
    Ok(inv)
}

/// Solves `a x = b` for symmetric positive-definite `a`.
pub fn spd_solve(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<Mat<f64>> {
    use faer::linalg::solvers::Solve;
    let llt = a.llt(Side::Lower).map_err(|e| Error::Numeric {
        context: "Cholesky factorization",
        reason: format!("{e:?}"),
    })?;
    Ok(llt.solve(b))
}

pub fn symmetrize_in_place(a: &mut Mat<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

pub fn max_asymmetry(a: MatRef<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// `U diag(f(values)) U^T` for an orthonormal `U`.
pub fn spectral_function(values: &[f64], vectors: MatRef<'_, f64>, f: impl Fn(f64) -> f64) -> Mat<f64> {
    let d = values.len();
    let scaled = Mat::from_fn(d, d, |i, j| vectors[(i, j)] * f(values[j]));
    let mut out = &scaled * vectors.transpose();
    symmetrize_in_place(&mut out);
    out
}

pub fn frobenius_norm(a: MatRef<'_, f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * a[(i, j)];
        }
    }
    acc.sqrt()
}

/// Largest absolute entry, `NaN` if any entry is not finite.
pub fn max_abs(a: MatRef<'_, f64>) -> f64 {
    let mut m = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if !v.is_finite() {
                return f64::NAN;
            }
            m = m.max(v.abs());
        }
    }
    m
}

pub fn scale_in_place(a: &mut Mat<f64>, factor: f64) {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            a[(i, j)] *= factor;
        }
    }
}

pub fn trace(a: MatRef<'_, f64>) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            expected: format!("{ncols} columns"),
            found: format!("{} columns in row {bad}", rows[bad].len()),
        });
    }
    Ok(Mat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_rows(a: MatRef<'_, f64>) -> Vec<Vec<f64>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
        .collect()
}
