//! Special functions and adaptive quadrature used by the closed-form expressions.

mod quad;
mod special;

pub(crate) use quad::adaptive;
pub use quad::{integrate_1d, integrate_3d, integrate_polar_disc, Box3, QuadratureSpec};
pub use special::{
    bessel_i0, gauss_2f1, lower_incomplete_gamma, regularized_lower_gamma, scaled_lower_gamma, BESSEL_MAX_TERMS,
    GAMMA_MAX_TERMS, HYP2F1_MAX_TERMS,
};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("{what} did not converge within {iterations} terms")]
    NoConvergence { what: &'static str, iterations: usize },
    #[error("quadrature tolerance not met (estimate {estimate:e}, error {error:e})")]
    ToleranceNotMet { estimate: f64, error: f64 },
}
