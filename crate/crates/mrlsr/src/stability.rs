//! Uniform-stability bound for exponents `m >= 2` and its empirical
//! leave-one-out verification.
//!
//! With bounded targets (`|Y| < C_y`) and a bounded kernel diagonal
//! (`sup k(x,x) < kappa^2`), the squared-error cost of the fitted function
//! changes by at most
//! `beta = L kappa (2^(m-2) L kappa / (lambda n))^(1/(m-1))`
//! when any single training example is removed, where
//! `L = 2 (C_y + kappa (C_y^2 / lambda)^(1/m))` is the cost's Lipschitz
//! constant in the function argument. The empirical check refits the model
//! on every leave-one-out subset and takes the worst cost perturbation over
//! a probe set; exceeding `beta` with honestly declared constants signals a
//! solver bug. The range `1 < m < 2` carries no bound here.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::solver::{fit_mrlsr, SolverConfig};

/// Constants entering the bound. `lipschitz_slack` on the kernel bound: for
/// the Gaussian kernel the diagonal is exactly 1, and the hypotheses want a
/// strict inequality.
pub const GAUSSIAN_KAPPA: f64 = 1.0 + 1e-12;

/// Inputs of the bound computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityInput {
    /// Almost-sure bound on `|Y|` (empirically: the max absolute target).
    pub c_y: f64,
    /// Kernel bound, `kappa^2 > sup k(x, x)`.
    pub kappa: f64,
    pub lambda: f64,
    pub m: f64,
    pub n: usize,
}

impl StabilityInput {
    pub fn new(c_y: f64, kappa: f64, lambda: f64, m: f64, n: usize) -> Result<Self> {
        if !(c_y >= 0.0 && c_y.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c_y",
                value: c_y,
                requirement: "must be non-negative and finite",
            });
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                requirement: "must be positive and finite",
            });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                requirement: "must be positive and finite",
            });
        }
        if !(m >= 2.0 && m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                requirement: "the bound holds for m >= 2 (1 < m < 2 is open)",
            });
        }
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                requirement: "must be at least 1",
            });
        }
        Ok(Self {
            c_y,
            kappa,
            lambda,
            m,
            n,
        })
    }
}

/// Bound outcome together with the empirical maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// Lipschitz constant of the cost, `2 (C_y + kappa (C_y^2/lambda)^(1/m))`.
    pub lipschitz_const: f64,
    pub beta: f64,
    /// Worst observed cost perturbation over probes and leave-one-out fits.
    pub empirical_max: f64,
    /// `empirical_max <= beta`.
    pub satisfied: bool,
}

/// Compute `(lipschitz_const, beta)` from the declared constants.
pub fn beta_bound(input: &StabilityInput) -> (f64, f64) {
    let StabilityInput {
        c_y,
        kappa,
        lambda,
        m,
        n,
    } = *input;
    let lipschitz = 2.0 * (c_y + kappa * (c_y * c_y / lambda).powf(1.0 / m));
    let inner = 2f64.powf(m - 2.0) * lipschitz * kappa / (lambda * n as f64);
    let beta = lipschitz * kappa * inner.powf(1.0 / (m - 1.0));
    (lipschitz, beta)
}

/// Fit on the full set and on each leave-one-out subset, then compare the
/// squared-error cost of the two fits on every probe point.
///
/// The constants are the tightest observable proxies: `C_y` is the max
/// absolute target over training and probe data, `kappa` is the Gaussian
/// unit diagonal plus slack. A single-point training set leaves the empty
/// set behind; its minimizer is the zero function.
pub fn empirical_stability(
    dataset: &Dataset,
    kernel: &KernelSpec,
    config: &SolverConfig,
    probe: &Dataset,
) -> Result<StabilityReport> {
    if probe.dim() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            context: "probe feature dimension",
            expected: dataset.dim(),
            got: probe.dim(),
        });
    }
    let n = dataset.len();
    let c_y = dataset
        .targets()
        .iter()
        .chain(probe.targets().iter())
        .fold(0.0f64, |acc, &y| acc.max(y.abs()));
    let input = StabilityInput::new(c_y, GAUSSIAN_KAPPA, config.lambda, config.m, n)?;
    let (lipschitz_const, beta) = beta_bound(&input);

    let full_model = fit_mrlsr(dataset, kernel, config)?;
    let full_predictions = full_model.predict_dataset(probe)?;

    let worst_per_leaveout: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let loo_predictions = if n == 1 {
                // empty training set: the regularizer alone is minimized by
                // the zero function
                nalgebra::DVector::zeros(probe.len())
            } else {
                let reduced = dataset.leave_one_out(i)?;
                fit_mrlsr(&reduced, kernel, config)?.predict_dataset(probe)?
            };
            let mut worst = 0.0f64;
            for (j, (&f_full, &f_loo)) in full_predictions
                .iter()
                .zip(loo_predictions.iter())
                .enumerate()
            {
                let y = probe.targets()[j];
                let cost_full = (y - f_full) * (y - f_full);
                let cost_loo = (y - f_loo) * (y - f_loo);
                worst = worst.max((cost_full - cost_loo).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;

    let empirical_max = worst_per_leaveout.into_iter().fold(0.0f64, f64::max);
    Ok(StabilityReport {
        lipschitz_const,
        beta,
        empirical_max,
        satisfied: empirical_max <= beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic_with, Dataset};
    use crate::kernel::bandwidth_heuristic;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bounded_dataset(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.random::<f64>());
        let y = DVector::from_fn(n, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn hand_bound_is_sixteen() {
        let input = StabilityInput::new(1.0, 1.0, 1.0, 2.0, 1).unwrap();
        let (lipschitz, beta) = beta_bound(&input);
        assert_eq!(lipschitz, 4.0);
        assert_eq!(beta, 16.0);
    }

    #[test]
    fn quadratic_bound_scales_inversely_with_n() {
        let base = StabilityInput::new(1.3, 1.0, 0.7, 2.0, 5).unwrap();
        let scaled = StabilityInput::new(1.3, 1.0, 0.7, 2.0, 50).unwrap();
        let (_, beta_base) = beta_bound(&base);
        let (_, beta_scaled) = beta_bound(&scaled);
        assert!((beta_scaled - beta_base / 10.0).abs() <= 1e-12 * beta_base);
    }

    #[test]
    fn cubic_bound_matches_exact_algebra() {
        // m=3, C_y=2, kappa=1, lambda=0.5, n=50:
        // L = 2 (2 + (4 / 0.5)^(1/3)) = 2 (2 + 2) = 8
        // beta = 8 * (2^1 * 8 / 25)^(1/2) = 8 * 0.8 = 6.4, all exact rationals
        let input = StabilityInput::new(2.0, 1.0, 0.5, 3.0, 50).unwrap();
        let (lipschitz, beta) = beta_bound(&input);
        assert!((lipschitz - 8.0).abs() <= 1e-12);
        assert!((beta - 6.4).abs() <= 1e-12);
    }

    #[test]
    fn open_range_is_rejected() {
        assert!(StabilityInput::new(1.0, 1.0, 1.0, 1.5, 10).is_err());
        assert!(StabilityInput::new(1.0, 1.0, 1.0, 1.99, 10).is_err());
        assert!(StabilityInput::new(1.0, 1.0, 1.0, 2.0, 10).is_ok());
    }

    #[test]
    fn bound_is_monotone_in_n_and_lambda() {
        let mut previous = f64::INFINITY;
        for n in [10, 20, 40, 80] {
            let (_, beta) = beta_bound(&StabilityInput::new(1.0, 1.0, 0.5, 2.5, n).unwrap());
            assert!(beta < previous);
            previous = beta;
        }
        let mut previous = f64::INFINITY;
        for lambda in [0.1, 0.3, 1.0, 3.0] {
            let (_, beta) = beta_bound(&StabilityInput::new(1.0, 1.0, lambda, 2.5, 30).unwrap());
            assert!(beta < previous);
            previous = beta;
        }
    }

    #[test]
    fn leave_one_out_perturbations_stay_below_beta() {
        for (seed, m) in [(41u64, 2.0), (42, 2.5)] {
            let train = bounded_dataset(12, 2, seed);
            let probe = bounded_dataset(20, 2, seed + 100);
            let kernel = KernelSpec::new(bandwidth_heuristic(&train).unwrap()).unwrap();
            let config = SolverConfig::new(m, 0.5).unwrap();
            let report = empirical_stability(&train, &kernel, &config, &probe).unwrap();
            assert!(
                report.satisfied,
                "m={m}: empirical {} exceeds beta {}",
                report.empirical_max, report.beta
            );
            assert!(report.empirical_max > 0.0);
        }
    }

    #[test]
    fn single_point_training_set_uses_zero_function_convention() {
        let train = Dataset::new(
            DMatrix::from_element(1, 2, 0.3),
            DVector::from_vec(vec![1.5]),
        )
        .unwrap();
        let probe = bounded_dataset(10, 2, 77);
        let kernel = KernelSpec::new(1.0).unwrap();
        let config = SolverConfig::new(2.0, 1.0).unwrap();
        let report = empirical_stability(&train, &kernel, &config, &probe).unwrap();
        assert!(report.satisfied);
    }

    #[test]
    fn synthetic_data_with_noise_off_also_satisfies_the_bound() {
        let train = generate_synthetic_with(15, 4, false).unwrap();
        let probe = generate_synthetic_with(15, 5, false).unwrap();
        let kernel = KernelSpec::new(bandwidth_heuristic(&train).unwrap()).unwrap();
        let config = SolverConfig::new(3.0, 1.0).unwrap();
        let report = empirical_stability(&train, &kernel, &config, &probe).unwrap();
        assert!(report.satisfied);
    }
}
