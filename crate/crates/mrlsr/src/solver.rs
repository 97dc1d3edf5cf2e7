//! The fit/predict pipeline with a variable penalty exponent, plus the
//! kernel ridge baseline it generalizes.
//!
//! A fit runs: Gram matrix -> eigendecomposition -> scalar root-find ->
//! coefficients in the eigenbasis -> rotate back. For `m > 1` the dual
//! problem is strictly convex and the returned model is its unique
//! minimizer; for `m <= 1` every root of the scalar reduction yields a
//! candidate and the one with the lowest primal objective wins. `m = 2`
//! reproduces kernel ridge regression exactly, and the baseline
//! [`fit_krr`] is deliberately routed through the same spectral path
//! (tests cross-check it against a dense linear solve).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{cross_gram, gram, KernelSpec};
use crate::rootfind::{
    find_root_unique, find_roots_multistart, RootProblem, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use crate::spectral::{decompose, to_original_basis, GramSpectrum};

/// Exponent, penalty weight, and root-search settings for one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub m: f64,
    pub lambda: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl SolverConfig {
    pub fn new(m: f64, lambda: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
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
        Ok(Self {
            m,
            lambda,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                value: tolerance,
                requirement: "must be positive and finite",
            });
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter.max(1);
        self
    }
}

/// Diagnostics of one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// Root of the scalar reduction selected for the returned model.
    pub c0: f64,
    /// `|F(c0)|` at acceptance.
    pub residual: f64,
    /// Function evaluations spent in the root search.
    pub newton_iterations: usize,
    /// Distinct roots examined (1 for `m > 1`, possibly more for `m <= 1`).
    pub candidate_count: usize,
    /// Primal objective of the returned coefficients.
    pub primal_objective: f64,
}

/// A fitted model: dual coefficients anchored to the training inputs plus
/// the kernel that ties them together. Prediction is
/// `f(x) = sum_i alpha_i k(x, x_i)`.
#[derive(Debug, Clone)]
pub struct Model {
    alpha: DVector<f64>,
    train_inputs: DMatrix<f64>,
    kernel: KernelSpec,
    config: SolverConfig,
    report: SolveReport,
}

impl Model {
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn train_inputs(&self) -> &DMatrix<f64> {
        &self.train_inputs
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn report(&self) -> &SolveReport {
        &self.report
    }

    /// Evaluate the expansion at each query row.
    pub fn predict(&self, queries: &DMatrix<f64>) -> Result<DVector<f64>> {
        let k_cross = cross_gram(&self.train_inputs, queries, &self.kernel)?;
        Ok(k_cross * &self.alpha)
    }

    pub fn predict_dataset(&self, dataset: &Dataset) -> Result<DVector<f64>> {
        self.predict(dataset.features())
    }

    /// Squared RKHS norm of the fitted function, `alpha^T K alpha`
    /// (recomputes the training Gram matrix).
    pub fn rkhs_norm_sq(&self) -> f64 {
        let k = crate::kernel::gram_of_rows(&self.train_inputs, &self.kernel);
        self.alpha.dot(&(k * &self.alpha))
    }

    /// Serialize to the interchange document (pretty JSON, full round-trip
    /// float precision).
    pub fn to_json_string(&self) -> String {
        let doc = ModelDocument {
            m: self.config.m,
            lambda: self.config.lambda,
            mu: self.kernel.bandwidth(),
            c0: self.report.c0,
            residual: Some(self.report.residual),
            alpha: self.alpha.iter().copied().collect(),
            train_x: (0..self.train_inputs.nrows())
                .map(|i| {
                    (0..self.train_inputs.ncols())
                        .map(|j| self.train_inputs[(i, j)])
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model document serializes")
    }

    /// Parse the interchange document. Solve diagnostics that are not part
    /// of the document (iteration counts, primal objective) come back as
    /// zeros/NaN; prediction and the equivalence mapping only need what the
    /// document carries.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.into_model()
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::NotUtf8)?;
        Self::from_json_str(text)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    m: f64,
    lambda: f64,
    mu: f64,
    c0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    alpha: Vec<f64>,
    train_x: Vec<Vec<f64>>,
}

impl ModelDocument {
    fn into_model(self) -> Result<Model> {
        let invalid = |reason: &str| Error::InvalidModel {
            reason: reason.to_string(),
        };
        let n = self.train_x.len();
        if n == 0 {
            return Err(invalid("train_x is empty"));
        }
        if self.alpha.len() != n {
            return Err(invalid("alpha length does not match train_x rows"));
        }
        let p = self.train_x[0].len();
        if p == 0 {
            return Err(invalid("training rows have no coordinates"));
        }
        if self.train_x.iter().any(|row| row.len() != p) {
            return Err(invalid("train_x rows have inconsistent lengths"));
        }
        if self
            .train_x
            .iter()
            .flatten()
            .chain(self.alpha.iter())
            .any(|v| !v.is_finite())
        {
            return Err(invalid("non-finite value in alpha or train_x"));
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return Err(invalid("c0 must be non-negative and finite"));
        }
        let kernel =
            KernelSpec::new(self.mu).map_err(|_| invalid("mu must be positive and finite"))?;
        let config = SolverConfig::new(self.m, self.lambda)
            .map_err(|_| invalid("m and lambda must be positive and finite"))?;
        let train_inputs = DMatrix::from_fn(n, p, |i, j| self.train_x[i][j]);
        Ok(Model {
            alpha: DVector::from_vec(self.alpha),
            train_inputs,
            kernel,
            config,
            report: SolveReport {
                c0: self.c0,
                residual: self.residual.unwrap_or(0.0),
                newton_iterations: 0,
                candidate_count: 0,
                primal_objective: f64::NAN,
            },
        })
    }
}

/// Coefficients in the eigenbasis for a given root:
/// `alpha_i' = 2 y_i' / (2 d_i + a C)`. The only vanishing denominator is
/// `d_i = 0` with `C = 0`, where the minimal-norm choice is zero.
fn alpha_rotated(d: &DVector<f64>, y_rot: &DVector<f64>, a: f64, c0: f64) -> DVector<f64> {
    DVector::from_fn(d.len(), |i, _| {
        let denom = 2.0 * d[i] + a * c0;
        if denom > 0.0 {
            2.0 * y_rot[i] / denom
        } else {
            0.0
        }
    })
}

/// Primal objective in the eigenbasis:
/// `(1/n) ||y' - D a'||^2 + lambda (a'^T D a')^(m/2)`.
fn primal_objective_rotated(
    d: &DVector<f64>,
    y_rot: &DVector<f64>,
    alpha_rot: &DVector<f64>,
    lambda: f64,
    m: f64,
) -> f64 {
    let n = d.len() as f64;
    let mut fit = 0.0;
    let mut norm_sq = 0.0;
    for i in 0..d.len() {
        let r = y_rot[i] - d[i] * alpha_rot[i];
        fit += r * r;
        norm_sq += d[i] * alpha_rot[i] * alpha_rot[i];
    }
    fit / n + lambda * norm_sq.max(0.0).powf(0.5 * m)
}

/// Solve for the rotated coefficients given a decomposed Gram matrix.
///
/// This is the shared core of [`fit_mrlsr`] and the cross-validation grids,
/// which reuse one eigendecomposition across many `(m, lambda)` cells.
pub(crate) fn solve_in_eigenbasis(
    spectrum: &GramSpectrum,
    config: &SolverConfig,
) -> Result<(DVector<f64>, SolveReport)> {
    let d = spectrum.eigenvalues();
    let y_rot = spectrum.rotated_targets();
    let n = spectrum.n();

    // Y = 0 short-circuits to the zero function.
    if y_rot.iter().all(|&v| v == 0.0) {
        let c0 = if config.m == 2.0 { 1.0 } else { 0.0 };
        return Ok((
            DVector::zeros(n),
            SolveReport {
                c0,
                residual: 0.0,
                newton_iterations: 0,
                candidate_count: 0,
                primal_objective: 0.0,
            },
        ));
    }

    let problem = RootProblem::new(d.clone(), y_rot.clone(), config.lambda, config.m)?;
    let a = problem.coefficient();

    if config.m > 1.0 {
        let report = find_root_unique(&problem, config.tolerance, config.max_iter)?;
        let root = report.roots[0];
        let alpha_rot = alpha_rotated(d, y_rot, a, root.c0);
        let primal = primal_objective_rotated(d, y_rot, &alpha_rot, config.lambda, config.m);
        Ok((
            alpha_rot,
            SolveReport {
                c0: root.c0,
                residual: root.residual,
                newton_iterations: root.iterations,
                candidate_count: 1,
                primal_objective: primal,
            },
        ))
    } else {
        let report = find_roots_multistart(&problem, config.tolerance, config.max_iter)?;
        let mut best: Option<(DVector<f64>, f64, f64, crate::rootfind::RootCandidate)> = None;
        for root in &report.roots {
            let alpha_rot = alpha_rotated(d, y_rot, a, root.c0);
            let primal = primal_objective_rotated(d, y_rot, &alpha_rot, config.lambda, config.m);
            let norm_sq = (0..n)
                .map(|i| d[i] * alpha_rot[i] * alpha_rot[i])
                .sum::<f64>();
            let replace = match &best {
                None => true,
                Some((_, best_primal, best_norm, _)) => {
                    if (primal - best_primal).abs() <= 1e-12 * (1.0 + best_primal.abs()) {
                        // objective tie: prefer the smaller-norm candidate
                        log::debug!(
                            "primal objective tie at {primal}: breaking by smaller RKHS norm"
                        );
                        norm_sq < *best_norm
                    } else {
                        primal < *best_primal
                    }
                }
            };
            if replace {
                best = Some((alpha_rot, primal, norm_sq, *root));
            }
        }
        let (alpha_rot, primal, _, root) = best.expect("multistart reports at least one root");
        Ok((
            alpha_rot,
            SolveReport {
                c0: root.c0,
                residual: root.residual,
                newton_iterations: root.iterations,
                candidate_count: report.roots.len(),
                primal_objective: primal,
            },
        ))
    }
}

/// Fit the variable-exponent model on a training set.
pub fn fit_mrlsr(train: &Dataset, kernel: &KernelSpec, config: &SolverConfig) -> Result<Model> {
    let k = gram(train, kernel);
    let spectrum = decompose(&k, train.targets())?;
    let (alpha_rot, report) = solve_in_eigenbasis(&spectrum, config)?;
    let alpha = to_original_basis(&spectrum, &alpha_rot)?;
    Ok(Model {
        alpha,
        train_inputs: train.features().clone(),
        kernel: *kernel,
        config: *config,
        report,
    })
}

/// Kernel ridge regression: solves `(K + lambda2 n I) alpha = Y` through
/// the same spectral path, identical to [`fit_mrlsr`] with `m = 2`.
pub fn fit_krr(train: &Dataset, kernel: &KernelSpec, lambda2: f64) -> Result<Model> {
    fit_mrlsr(train, kernel, &SolverConfig::new(2.0, lambda2)?)
}

fn check_dual_inputs(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    a: &DVector<f64>,
    lambda: f64,
    m: f64,
) -> Result<()> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "gram matrix shape",
            expected: n,
            got: k.ncols(),
        });
    }
    if y.len() != n || a.len() != n {
        return Err(Error::DimensionMismatch {
            context: "dual objective vectors",
            expected: n,
            got: if y.len() != n { y.len() } else { a.len() },
        });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            requirement: "must be positive and finite",
        });
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m,
            requirement: "must be positive and finite",
        });
    }
    Ok(())
}

/// `(a^T K a)^(m/2 - 1)` with the conventions of the stationarity system:
/// zero when `a = 0`, singular (an error) when `a != 0`, `a^T K a = 0`, and
/// `m < 2`.
fn penalty_power(norm_sq: f64, a: &DVector<f64>, m: f64) -> Result<f64> {
    if norm_sq == 0.0 {
        if a.iter().all(|&v| v == 0.0) {
            Ok(0.0)
        } else if m < 2.0 {
            Err(Error::GradientSingularity { m })
        } else if m == 2.0 {
            Ok(1.0)
        } else {
            Ok(0.0)
        }
    } else {
        Ok(norm_sq.powf(0.5 * m - 1.0))
    }
}

/// Dual objective `(Y - Ka)^T (Y - Ka) + n lambda (a^T K a)^(m/2)`.
pub fn dual_objective(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    a: &DVector<f64>,
    lambda: f64,
    m: f64,
) -> Result<f64> {
    check_dual_inputs(k, y, a, lambda, m)?;
    let n = k.nrows() as f64;
    let ka = k * a;
    let norm_sq = a.dot(&ka).max(0.0);
    let r = y - ka;
    Ok(r.dot(&r) + n * lambda * norm_sq.powf(0.5 * m))
}

/// Gradient of the dual objective:
/// `-2 K (Y - Ka) + lambda m n (a^T K a)^(m/2 - 1) K a`.
///
/// At `a^T K a = 0` the power term is zero for `a = 0`; for `a != 0` with
/// `m < 2` the gradient is singular and reported as an error.
pub fn dual_gradient(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    a: &DVector<f64>,
    lambda: f64,
    m: f64,
) -> Result<DVector<f64>> {
    check_dual_inputs(k, y, a, lambda, m)?;
    let n = k.nrows() as f64;
    let ka = k * a;
    let power = penalty_power(a.dot(&ka).max(0.0), a, m)?;
    let residual = y - &ka;
    Ok(-2.0 * (k * residual) + (lambda * m * n * power) * ka)
}

/// Max-norm of the stationarity defect
/// `Y - K alpha - lambda (m n / 2) (alpha^T K alpha)^(m/2 - 1) alpha`,
/// which vanishes at the minimizer for `m > 1`.
pub fn stationarity_residual(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    alpha: &DVector<f64>,
    lambda: f64,
    m: f64,
) -> Result<f64> {
    check_dual_inputs(k, y, alpha, lambda, m)?;
    let n = k.nrows() as f64;
    let ka = k * alpha;
    let power = penalty_power(alpha.dot(&ka).max(0.0), alpha, m)?;
    let defect = y - ka - (lambda * m * n / 2.0 * power) * alpha;
    Ok(defect.amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;
    use crate::kernel::bandwidth_heuristic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.random::<f64>());
        let y = DVector::from_fn(n, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        Dataset::new(x, y).unwrap()
    }

    fn heuristic_kernel(d: &Dataset) -> KernelSpec {
        KernelSpec::new(bandwidth_heuristic(d).unwrap()).unwrap()
    }

    #[test]
    fn quadratic_exponent_matches_dense_ridge_solve() {
        for (seed, n) in [(1u64, 6), (2, 20), (3, 40)] {
            let d = random_dataset(n, 3, seed);
            let kernel = heuristic_kernel(&d);
            let lambda = 0.25;
            let model = fit_mrlsr(&d, &kernel, &SolverConfig::new(2.0, lambda).unwrap()).unwrap();

            let k = gram(&d, &kernel);
            let system = &k + DMatrix::identity(n, n) * (lambda * n as f64);
            let direct = system.lu().solve(d.targets()).unwrap();
            assert!((model.alpha() - direct).amax() <= 1e-8);
            assert_eq!(model.report().c0, 1.0);
        }
    }

    #[test]
    fn zero_targets_give_zero_model() {
        let x = DMatrix::from_fn(5, 2, |i, j| (i * 2 + j) as f64 * 0.1);
        let d = Dataset::new(x, DVector::zeros(5)).unwrap();
        let kernel = heuristic_kernel(&d);
        for m in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let model = fit_mrlsr(&d, &kernel, &SolverConfig::new(m, 0.1).unwrap()).unwrap();
            assert_eq!(model.alpha().amax(), 0.0);
            let preds = model.predict_dataset(&d).unwrap();
            assert_eq!(preds.amax(), 0.0);
        }
    }

    #[test]
    fn fitted_alpha_is_stationary() {
        for (seed, m) in [(10u64, 1.2), (11, 1.5), (12, 2.0), (13, 3.0)] {
            let d = random_dataset(10, 2, seed);
            let kernel = heuristic_kernel(&d);
            let lambda = 0.05;
            let model = fit_mrlsr(&d, &kernel, &SolverConfig::new(m, lambda).unwrap()).unwrap();
            let k = gram(&d, &kernel);
            let defect = stationarity_residual(&k, d.targets(), model.alpha(), lambda, m).unwrap();
            let bound = 1e-6 * (1.0 + d.targets().amax());
            assert!(defect <= bound, "m={m}: defect {defect} > {bound}");
        }
    }

    #[test]
    fn krr_is_the_m2_special_case() {
        let d = random_dataset(18, 4, 21);
        let kernel = heuristic_kernel(&d);
        let krr = fit_krr(&d, &kernel, 0.3).unwrap();
        let m2 = fit_mrlsr(&d, &kernel, &SolverConfig::new(2.0, 0.3).unwrap()).unwrap();
        assert!((krr.alpha() - m2.alpha()).amax() <= 1e-10);
    }

    #[test]
    fn krr_single_point_identity_kernel() {
        let d = Dataset::new(
            DMatrix::from_element(1, 1, 0.0),
            DVector::from_vec(vec![2.0]),
        )
        .unwrap();
        let kernel = KernelSpec::new(1.0).unwrap();
        // K = [[1]], n = 1, lambda2 = 1: alpha = 2 / (1 + 1) = 1
        let model = fit_krr(&d, &kernel, 1.0).unwrap();
        assert!((model.alpha()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn krr_linear_system_residual_is_small() {
        let d = random_dataset(20, 3, 33);
        let kernel = heuristic_kernel(&d);
        let lambda2 = 0.125;
        let model = fit_krr(&d, &kernel, lambda2).unwrap();
        let k = gram(&d, &kernel);
        let lhs = (&k + DMatrix::identity(20, 20) * (lambda2 * 20.0)) * model.alpha();
        assert!((lhs - d.targets()).amax() <= 1e-8);
    }

    #[test]
    fn predictions_at_training_points_equal_k_alpha() {
        let d = random_dataset(12, 3, 44);
        let kernel = heuristic_kernel(&d);
        let model = fit_mrlsr(&d, &kernel, &SolverConfig::new(1.5, 0.1).unwrap()).unwrap();
        let preds = model.predict_dataset(&d).unwrap();
        let k = gram(&d, &kernel);
        let ka = k * model.alpha();
        assert!((preds - ka).amax() <= 1e-8);
    }

    #[test]
    fn prediction_is_the_hand_evaluated_expansion() {
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        let d = Dataset::new(x, DVector::from_vec(vec![1.0, 2.0, 0.5])).unwrap();
        let kernel = KernelSpec::new(2.0).unwrap();
        let model = fit_mrlsr(&d, &kernel, &SolverConfig::new(2.0, 0.1).unwrap()).unwrap();
        let q = DMatrix::from_row_slice(1, 1, &[0.5]);
        let pred = model.predict(&q).unwrap()[0];
        let a = model.alpha();
        let want = a[0] * (-0.25f64 / 2.0).exp()
            + a[1] * (-0.25f64 / 2.0).exp()
            + a[2] * (-2.25f64 / 2.0).exp();
        assert!((pred - want).abs() < 1e-12);
    }

    #[test]
    fn predict_rejects_dimension_mismatch() {
        let d = random_dataset(6, 3, 50);
        let kernel = heuristic_kernel(&d);
        let model = fit_mrlsr(&d, &kernel, &SolverConfig::new(2.0, 0.1).unwrap()).unwrap();
        let q = DMatrix::zeros(2, 4);
        assert!(matches!(
            model.predict(&q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dual_objective_at_zero_is_y_dot_y() {
        let d = random_dataset(7, 2, 60);
        let k = gram(&d, &heuristic_kernel(&d));
        let zero = DVector::zeros(7);
        let obj = dual_objective(&k, d.targets(), &zero, 0.5, 1.7).unwrap();
        assert!((obj - d.targets().dot(d.targets())).abs() < 1e-12);
    }

    #[test]
    fn dual_objective_quadratic_case_is_explicit() {
        let d = random_dataset(6, 2, 61);
        let k = gram(&d, &heuristic_kernel(&d));
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let a = DVector::from_fn(6, |_, _| rng.random::<f64>() - 0.5);
        let lambda = 0.4;
        let obj = dual_objective(&k, d.targets(), &a, lambda, 2.0).unwrap();
        let r = d.targets() - &k * &a;
        let want = r.dot(&r) + 6.0 * lambda * a.dot(&(&k * &a));
        assert!((obj - want).abs() <= 1e-10 * (1.0 + want.abs()));

        let grad = dual_gradient(&k, d.targets(), &a, lambda, 2.0).unwrap();
        let want_grad = -2.0 * (&k * r) + (lambda * 2.0 * 6.0) * (&k * &a);
        assert!((grad - want_grad).amax() <= 1e-10);
    }

    #[test]
    fn dual_gradient_matches_central_differences() {
        for (seed, m) in [(70u64, 1.4), (71, 2.0), (72, 2.6)] {
            let d = random_dataset(6, 2, seed);
            let k = gram(&d, &heuristic_kernel(&d));
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let a = DVector::from_fn(6, |_, _| rng.random::<f64>() - 0.5);
            let lambda = 0.3;
            let grad = dual_gradient(&k, d.targets(), &a, lambda, m).unwrap();
            for i in 0..6 {
                let h = 1e-6 * (1.0 + a[i].abs());
                let mut ap = a.clone();
                let mut am = a.clone();
                ap[i] += h;
                am[i] -= h;
                let fd = (dual_objective(&k, d.targets(), &ap, lambda, m).unwrap()
                    - dual_objective(&k, d.targets(), &am, lambda, m).unwrap())
                    / (2.0 * h);
                assert!(
                    (fd - grad[i]).abs() <= 1e-5 * (1.0 + grad[i].abs()),
                    "m={m} i={i}: fd={fd} grad={}",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn dual_gradient_singularity_contract() {
        let k = DMatrix::identity(2, 2);
        let y = DVector::from_vec(vec![1.0, 1.0]);
        let zero = DVector::zeros(2);
        // a = 0: power term defined as zero for every m
        let g = dual_gradient(&k, &y, &zero, 1.0, 1.5).unwrap();
        assert!((g - (-2.0 * &k * &y)).amax() < 1e-14);

        // a != 0 with a^T K a = 0 and m < 2: singular
        let k0 = DMatrix::zeros(2, 2);
        let a = DVector::from_vec(vec![1.0, 0.0]);
        assert!(matches!(
            dual_gradient(&k0, &y, &a, 1.0, 1.5),
            Err(Error::GradientSingularity { .. })
        ));
        // same point is fine for m >= 2
        assert!(dual_gradient(&k0, &y, &a, 1.0, 2.0).is_ok());
    }

    #[test]
    fn small_exponent_fit_selects_lowest_primal_candidate() {
        let d = generate_synthetic(25, 5).unwrap();
        let kernel = heuristic_kernel(&d);
        let config = SolverConfig::new(0.5, 0.05).unwrap();
        let model = fit_mrlsr(&d, &kernel, &config).unwrap();
        assert!(model.report().candidate_count >= 1);
        assert!(model.report().residual <= config.tolerance);
        // the reported primal objective beats the zero function's
        let zero_primal = d.targets().dot(d.targets()) / 25.0;
        assert!(model.report().primal_objective <= zero_primal + 1e-9);
    }

    #[test]
    fn fractional_fit_matches_descent_oracle() {
        use crate::oracle::{minimize_dual, OracleConfig};
        let d = random_dataset(15, 2, 8);
        let kernel = heuristic_kernel(&d);
        let (m, lambda) = (1.5, 0.1);
        let model = fit_mrlsr(&d, &kernel, &SolverConfig::new(m, lambda).unwrap()).unwrap();
        let k = gram(&d, &kernel);
        let solver_objective = dual_objective(&k, d.targets(), model.alpha(), lambda, m).unwrap();
        let config = OracleConfig {
            max_steps: 2_000_000,
            ..OracleConfig::default()
        };
        let oracle = minimize_dual(&k, d.targets(), lambda, m, &config).unwrap();
        assert!(
            (oracle.objective - solver_objective).abs() <= 1e-6 * (1.0 + solver_objective.abs()),
            "solver {} vs oracle {}",
            solver_objective,
            oracle.objective
        );
    }

    #[test]
    fn rescaling_targets_moves_the_root_consistently() {
        let d = random_dataset(10, 2, 81);
        let kernel = heuristic_kernel(&d);
        let config = SolverConfig::new(2.6, 0.2).unwrap();
        let base = fit_mrlsr(&d, &kernel, &config).unwrap();

        let s = 3.0;
        let scaled = Dataset::new(d.features().clone(), d.targets() * s).unwrap();
        let scaled_fit = fit_mrlsr(&scaled, &kernel, &config).unwrap();

        // re-solving the scalar equation with the scaled rotated targets
        // must reproduce the fresh fit's root
        let k = gram(&d, &kernel);
        let spectrum = decompose(&k, scaled.targets()).unwrap();
        let problem = RootProblem::new(
            spectrum.eigenvalues().clone(),
            spectrum.rotated_targets().clone(),
            config.lambda,
            config.m,
        )
        .unwrap();
        let fresh = find_root_unique(&problem, config.tolerance, config.max_iter).unwrap();
        assert!(
            (fresh.roots[0].c0 - scaled_fit.report().c0).abs() <= 1e-9 * (1.0 + fresh.roots[0].c0)
        );
        assert!(scaled_fit.report().c0 != base.report().c0);
    }

    #[test]
    fn model_json_round_trips_predictions() {
        let d = random_dataset(9, 3, 90);
        let kernel = heuristic_kernel(&d);
        let model = fit_mrlsr(&d, &kernel, &SolverConfig::new(1.5, 0.07).unwrap()).unwrap();
        let text = model.to_json_string();
        let loaded = Model::from_json_str(&text).unwrap();
        assert_eq!(loaded.config().m, model.config().m);
        assert_eq!(loaded.config().lambda, model.config().lambda);
        assert_eq!(loaded.report().c0, model.report().c0);
        let q = random_dataset(4, 3, 91);
        let a = model.predict_dataset(&q).unwrap();
        let b = loaded.predict_dataset(&q).unwrap();
        assert_eq!(a, b); // bit-identical: the document carries exact floats
    }

    #[test]
    fn model_json_rejects_malformed_documents() {
        assert!(Model::from_json_str("{").is_err());
        // alpha length mismatch
        let bad =
            r#"{"m":2.0,"lambda":0.1,"mu":1.0,"c0":1.0,"alpha":[1.0],"train_x":[[0.0],[1.0]]}"#;
        assert!(matches!(
            Model::from_json_str(bad),
            Err(Error::InvalidModel { .. })
        ));
        // non-finite alpha
        let bad = r#"{"m":2.0,"lambda":0.1,"mu":1.0,"c0":1.0,"alpha":[null],"train_x":[[0.0]]}"#;
        assert!(Model::from_json_str(bad).is_err());
        // schema without the optional residual field still loads
        let ok = r#"{"m":2.0,"lambda":0.1,"mu":1.0,"c0":1.0,"alpha":[0.5],"train_x":[[0.25]]}"#;
        assert!(Model::from_json_str(ok).is_ok());
    }
}
