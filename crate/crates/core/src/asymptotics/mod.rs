//! Deterministic-equivalent predictions: risks, resolvent traces, the
//! spectrum of `Â`, spiked outliers and AR(1) closed forms.

pub mod ar1;
pub mod risk;
pub mod spectrum;
pub mod spiked;

pub use ar1::{
    ar1_analysis, ar1_pca_population_loss, ar1_phase_boundary, ar1_phase_boundary_bisection, ar1_population_ssr_loss,
    toeplitz_df2_closed_form, toeplitz_df2_strong_correlation, Ar1Analysis,
};
pub use risk::{
    predict_gen_error, predict_risk, predict_train_error, resolvent_trace_equivalents, RiskPrediction, POLE_MARGIN,
};
pub use spectrum::{
    default_spectral_grid, predicted_spectral_density, predicted_spectral_density_auto, universal_chi,
    universal_density, universal_support, universal_trace, SpectralModel,
};
pub use spiked::{bbp_prediction, spiked_population_losses, BbpPrediction, SpikedPopulationLosses};
