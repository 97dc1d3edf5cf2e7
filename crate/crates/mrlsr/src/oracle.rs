//! Brute-force minimizer of the dual objective, used only to validate the
//! semi-analytic solver on small instances.
//!
//! Plain gradient descent with a backtracking line search: the step is
//! halved until the objective decreases. Deliberately simple — the point of
//! this module is to be an independent route to the same minimum, so it
//! shares nothing with the spectral solver beyond the objective itself.
//! Guardrailed to `n <= 50`; it is a desk-scale cross-check, not a solver.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::solver::{dual_gradient, dual_objective};

/// Largest instance the oracle accepts.
pub const ORACLE_MAX_N: usize = 50;

/// Gradient-descent settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub step_size: f64,
    pub max_steps: usize,
    pub gradient_tolerance: f64,
    /// Seed for the small random perturbation of the starting point.
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            step_size: 1e-2,
            max_steps: 100_000,
            gradient_tolerance: 1e-8,
            seed: 0,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "step_size",
                value: self.step_size,
                requirement: "must be positive and finite",
            });
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_steps",
                value: 0.0,
                requirement: "must be at least 1",
            });
        }
        if !(self.gradient_tolerance > 0.0 && self.gradient_tolerance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gradient_tolerance",
                value: self.gradient_tolerance,
                requirement: "must be positive and finite",
            });
        }
        Ok(())
    }
}

/// Result of a descent run.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub coefficients: DVector<f64>,
    pub objective: f64,
    /// True when the gradient max-norm fell below the tolerance; false when
    /// the step budget ran out first (best iterate returned).
    pub converged: bool,
    pub steps: usize,
}

/// Minimize `(Y - Ka)^T (Y - Ka) + n lambda (a^T K a)^(m/2)` by gradient
/// descent with backtracking.
///
/// Starts from zero perturbed by `1e-3` Gaussian noise, which keeps the
/// `m < 2` power term away from its singularity at the origin.
pub fn minimize_dual(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    m: f64,
    config: &OracleConfig,
) -> Result<OracleOutcome> {
    config.validate()?;
    let n = k.nrows();
    if n > ORACLE_MAX_N {
        return Err(Error::InstanceTooLarge {
            n,
            max: ORACLE_MAX_N,
        });
    }
    if m <= 1.0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m,
            requirement: "the descent oracle certifies nothing for m <= 1",
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut a = DVector::from_fn(n, |_, _| 1e-3 * rng.sample::<f64, _>(StandardNormal));
    let mut objective = dual_objective(k, y, &a, lambda, m)?;

    for step in 0..config.max_steps {
        let gradient = dual_gradient(k, y, &a, lambda, m)?;
        if gradient.amax() <= config.gradient_tolerance {
            return Ok(OracleOutcome {
                coefficients: a,
                objective,
                converged: true,
                steps: step,
            });
        }

        let mut t = config.step_size;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = &a - t * &gradient;
            let candidate_objective = dual_objective(k, y, &candidate, lambda, m)?;
            if candidate_objective < objective {
                a = candidate;
                objective = candidate_objective;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            if step == 0 {
                // no descent was ever possible: a genuine failure
                return Err(Error::LineSearchFailure { step: t });
            }
            // the objective is flat to machine precision; further halving
            // cannot represent a decrease, so this is the best iterate
            return Ok(OracleOutcome {
                coefficients: a,
                objective,
                converged: false,
                steps: step,
            });
        }
    }

    Ok(OracleOutcome {
        coefficients: a,
        objective,
        converged: false,
        steps: config.max_steps,
    })
}
