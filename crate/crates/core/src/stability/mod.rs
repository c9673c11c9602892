//! Local stability of equilibria: the fractional sector (argument) criterion
//! and the fractional divergence indicator.

mod divergence;
mod spectrum;

pub use divergence::{
    caputo_monomial, fractional_divergence, fractional_divergence_about, integer_divergence,
    tanh_taylor_coefficients, DivergenceSeries, DEFAULT_DIVERGENCE_POINT,
};
pub use spectrum::{eigenvalues_3x3, stability_index, Spectrum, StabilityReport, Verdict};
