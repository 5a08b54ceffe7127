//! Gaussian mixture model over three-dimensional feature rows.

mod component;
mod em;
mod mixture;

pub use component::{gaussian_pdf, GaussianComponent};
pub use em::{fit, fit_from, initialize, EmConfig, EmTrace, FitResult, MAX_REINITIALIZATIONS};
pub(crate) use mixture::check_permutation;
pub use mixture::{
    argmax_posterior, e_step, expectation, log_likelihood, m_step, CovarianceMode, MStepOptions, MixtureParams,
    ResponsibilityMatrix, EMPTY_COMPONENT_MASS,
};
