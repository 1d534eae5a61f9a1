//! Numerical kernels: quadrature, special functions, loss laws and sampling.

pub mod ig;
pub mod poisson;
pub mod quadrature;
pub mod sampling;
pub mod special;

pub use ig::{
    gig_cdf, gig_pdf, ig_cdf, ig_partial_expectation, ig_partial_moment, ig_pdf, ig_sf, ig_sum_params, GIGParams,
    GigDistribution, IGParams,
};
pub use poisson::{poisson_pmf, FrequencyModel};
pub use quadrature::{integrate, integrate_pieces, Integral, QuadratureSpec};
pub use special::{bessel_k, ln_bessel_k, std_normal_cdf};
