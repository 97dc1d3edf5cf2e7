//! Gaussian kernel, Gram matrices, and the mean-pairwise-distance bandwidth
//! heuristic.
//!
//! The Gaussian kernel is the only one built in; every caller goes through
//! [`KernelSpec::eval_sq_dist`], so swapping in another radial kernel is a
//! local change.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Gaussian kernel `k(x, x') = exp(-||x - x'||^2 / mu)` with bandwidth
/// `mu > 0` in squared-distance units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    bandwidth: f64,
}

impl KernelSpec {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "bandwidth",
                value: bandwidth,
                requirement: "must be positive and finite",
            });
        }
        Ok(Self { bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Kernel value as a function of the squared distance.
    #[inline]
    pub fn eval_sq_dist(&self, sq_dist: f64) -> f64 {
        (-sq_dist / self.bandwidth).exp()
    }
}

#[inline]
fn sq_dist_rows(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.ncols() {
        let d = a[(i, k)] - b[(j, k)];
        acc += d * d;
    }
    acc
}

/// Mean of all `n^2` pairwise squared distances, diagonal zeros included.
///
/// Computed through the centered second moment
/// `(1/n^2) sum_ij ||x_i - x_j||^2 = (2/n) sum_i ||x_i - mean||^2`,
/// which avoids the quadratic pair loop.
pub fn bandwidth_heuristic(dataset: &Dataset) -> Result<f64> {
    let x = dataset.features();
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            requirement: "bandwidth heuristic needs at least 2 rows",
        });
    }
    let mut total = 0.0;
    for j in 0..x.ncols() {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        total += col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    }
    let mu = 2.0 * total / n as f64;
    if mu <= 0.0 {
        return Err(Error::DegenerateBandwidth);
    }
    Ok(mu)
}

/// Gram matrix `K[i, j] = k(x_i, x_j)` over the dataset rows.
///
/// Only the upper triangle is evaluated and then mirrored, so the result is
/// exactly symmetric; the diagonal is exactly 1.
pub fn gram(dataset: &Dataset, spec: &KernelSpec) -> DMatrix<f64> {
    gram_of_rows(dataset.features(), spec)
}

/// [`gram`] over a bare feature matrix.
pub fn gram_of_rows(x: &DMatrix<f64>, spec: &KernelSpec) -> DMatrix<f64> {
    let n = x.nrows();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let v = spec.eval_sq_dist(sq_dist_rows(x, i, x, j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Kernel values between one query point and every stored input row.
pub fn kernel_vector(
    inputs: &DMatrix<f64>,
    query: &[f64],
    spec: &KernelSpec,
) -> Result<DVector<f64>> {
    if query.len() != inputs.ncols() {
        return Err(Error::DimensionMismatch {
            context: "kernel query dimension",
            expected: inputs.ncols(),
            got: query.len(),
        });
    }
    Ok(DVector::from_fn(inputs.nrows(), |i, _| {
        let mut acc = 0.0;
        for (k, q) in query.iter().enumerate() {
            let d = q - inputs[(i, k)];
            acc += d * d;
        }
        spec.eval_sq_dist(acc)
    }))
}

/// Cross-kernel matrix: `K[q, i] = k(query_q, x_i)` for every query row
/// against every input row.
pub fn cross_gram(
    inputs: &DMatrix<f64>,
    queries: &DMatrix<f64>,
    spec: &KernelSpec,
) -> Result<DMatrix<f64>> {
    if queries.ncols() != inputs.ncols() {
        return Err(Error::DimensionMismatch {
            context: "cross-kernel query dimension",
            expected: inputs.ncols(),
            got: queries.ncols(),
        });
    }
    Ok(DMatrix::from_fn(queries.nrows(), inputs.nrows(), |q, i| {
        spec.eval_sq_dist(sq_dist_rows(queries, q, inputs, i))
    }))
}
