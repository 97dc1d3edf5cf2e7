//! Kernel least-squares regression with a variable RKHS penalty exponent.
//!
//! The centerpiece is [`solver::fit_mrlsr`]: regularized least squares in a
//! reproducing kernel Hilbert space where the penalty is `lambda * ||f||^m`
//! for a real exponent `m > 0`, not just the classical quadratic `m = 2`.
//! The minimizer is obtained semi-analytically — eigendecompose the Gram
//! matrix once, then reduce the whole problem to a scalar root-find — so a
//! fit costs one symmetric eigendecomposition plus a handful of Newton steps.
//!
//! What lives where:
//!
//! * [`data`] — datasets, CSV ingestion, the synthetic benchmark generator,
//!   deterministic splits and k-folds.
//! * [`kernel`] — Gaussian kernel, Gram matrices, mean-pairwise-distance
//!   bandwidth heuristic.
//! * [`spectral`] — symmetric eigendecomposition of the Gram matrix and the
//!   associated basis changes.
//! * [`rootfind`] — the scalar reduction `F(C)` and its root(s): safeguarded
//!   Newton for `m > 1`, log-spaced multi-start for `m <= 1`.
//! * [`solver`] — the fit/predict pipeline, the kernel ridge (KRR) baseline,
//!   dual objective and gradient, model (de)serialization.
//! * [`equivalence`] — the per-training-set mapping between the variable
//!   exponent solver and KRR, and the experiment showing it does not
//!   transfer across training sets.
//! * [`stability`] — uniform-stability bound for `m >= 2` and its empirical
//!   leave-one-out verification.
//! * [`eval`] — scaled RMSE, the two-phase cross-validation protocol,
//!   learning curves, and the synthetic benchmark pipeline.
//! * [`oracle`] — slow gradient-descent minimizer of the dual objective,
//!   used only to validate the semi-analytic solver on small instances.
//!
//! All randomized operations are deterministic functions of an explicit
//! `u64` seed.

pub mod data;
pub mod equivalence;
mod error;
pub mod eval;
pub mod kernel;
pub mod oracle;
pub mod rootfind;
pub mod solver;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
