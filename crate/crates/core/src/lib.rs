//! Nonparametric estimation of a survival function from multiplicatively
//! noisy observations `Y = X·U`, where the noise density `g` of `U` is known.
//!
//! The estimator works in the Mellin domain: the empirical Mellin transform
//! of the contaminated sample is divided by the Mellin transform of the noise
//! and by the survival-function factor `(1/2 + it)`, the inversion integral is
//! truncated to `[-k, k]` (spectral cut-off), and the cut-off `k` is chosen by
//! a fully data-driven penalized-contrast criterion.
//!
//! Module map:
//! - [`grid`]: symmetric frequency grids and Mellin-domain series,
//! - [`special`]: complex log-gamma and incomplete gamma/beta functions,
//! - [`mellin`]: forward/inverse Mellin quadrature and Plancherel norms,
//! - [`models`]: catalog of target and error densities with closed-form
//!   Mellin transforms and samplers,
//! - [`estimator`]: the spectral cut-off survival estimator and variants,
//! - [`adaptive`]: the data-driven cut-off selection,
//! - [`dependence`]: AR(1)-Gamma latent process and dependence diagnostics,
//! - [`risk`]: integrated squared error, Monte Carlo harness, rate fits.

// `!(x > 0.0)` is used on purpose throughout: it rejects NaN along with
// non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod dependence;
pub mod error;
pub mod estimator;
pub mod grid;
pub mod mellin;
pub mod models;
pub mod risk;
pub mod sampling;
pub mod special;

pub use error::CoreError;
pub use grid::{MellinSeries, QuadratureConfig, TGrid};
