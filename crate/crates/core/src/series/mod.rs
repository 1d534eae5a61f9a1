//! Gamma-kernel Laguerre series for an insured-loss density known only
//! through its first four moments.

mod fit;
mod laguerre;
mod models;
mod moments;
mod positivity;

pub use fit::{
    approx_expected_min, approx_pdf, astar_vector, default_u_max, expansion_coefficients, fit_expansion, ExpansionFit,
    Refit,
};
pub use laguerre::{gamma_kernel, gamma_kernel_cdf, laguerre, laguerre_derivative, squared_norm, MAX_ORDER};
pub use models::{GammaLocal, SeriesLocal};
pub use moments::MomentSet;
pub use positivity::{
    admissible_segments, constrained_refit, curve_grid, curve_point, positivity_boundary, positivity_check,
    scan_bracket, system_residuals, CurvePoint, Positivity, PositivityCurve,
};
