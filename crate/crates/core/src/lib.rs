//! Masked self-supervised ridge regression.
//!
//! The estimator predicts every feature from all the others with a ridge
//! penalty and stacks the coefficients into a zero-diagonal matrix `Â`. This
//! crate provides the closed-form fit, exact finite-dimensional risks, the
//! random-matrix deterministic equivalents for its risks and spectrum, and a
//! seeded Monte Carlo harness that compares the two.

pub mod asymptotics;
pub mod covariance;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod fixed_point;
pub mod io;
pub mod linalg;
pub mod stats;

pub use covariance::{
    ar1_eigendensity, build_covariance, covariance_sqrt, diag_precision_inverse, CovarianceKind, CovarianceModel,
    CovarianceSpec, SpikeMode, SpikeSpec,
};
pub use error::{Error, Result};
pub use estimator::{
    approximation_optimum, empirical_risk, fit_ssr, fit_ssr_coordinatewise, fit_ssr_with, kkt_residual, pca_fit,
    population_risk, ssr_spectrum_empirical, ApproximationResult, Dataset, EntryDist, InversionPath, PcaReference,
    PcaResult, SsrEstimate,
};
pub use fixed_point::{
    dbar_vectors, degrees_of_freedom, solve_chi, solve_kappa, solve_mtilde, ChiProblem, ChiSolution, DbarVectors,
    FixedPointMethod, FixedPointSolution,
};

pub use num_complex::Complex64;
