//! Symmetric eigendecomposition of the Gram matrix and the basis changes
//! built on it.
//!
//! The factorization `K = Q D Q^T` is done once per training set; the
//! solver then works coordinate-wise in the eigenbasis. Eigenvalues are
//! reported in descending order and tiny negative values — floating-point
//! noise on a matrix that is positive semidefinite in exact arithmetic —
//! are clamped to zero. Anything below the clamp tolerance is treated as a
//! genuinely non-PSD input and rejected.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigendecomposition of a Gram matrix together with the rotated targets.
#[derive(Debug, Clone)]
pub struct GramSpectrum {
    eigenvectors: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    rotated_targets: DVector<f64>,
}

/// Clamp tolerance for negative eigenvalues of an `n x n` matrix whose
/// largest absolute entry is `max_abs`.
pub fn clamp_tolerance(n: usize, max_abs: f64) -> f64 {
    1e-10 * n as f64 * max_abs
}

impl GramSpectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Orthonormal eigenvector matrix `Q`, column `i` pairing with
    /// eigenvalue `i`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Eigenvalues in descending order, all non-negative.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Targets expressed in the eigenbasis, `y' = Q^T Y`.
    pub fn rotated_targets(&self) -> &DVector<f64> {
        &self.rotated_targets
    }

    /// Rebuild `Q D Q^T`; used by reconstruction checks.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[j];
        }
        scaled * q.transpose()
    }
}

/// Factor a symmetric PSD matrix as `K = Q D Q^T` and rotate the targets.
///
/// Eigenvalues in `[-tol, 0)` with `tol = 1e-10 * n * max|K|` are clamped
/// to zero; an eigenvalue below `-tol` means the input was not a valid
/// kernel matrix and is an error.
pub fn decompose(k: &DMatrix<f64>, y: &DVector<f64>) -> Result<GramSpectrum> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "gram matrix shape",
            expected: n,
            got: k.ncols(),
        });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            context: "targets vs gram size",
            expected: n,
            got: y.len(),
        });
    }

    let max_abs = k.amax();
    let tol = clamp_tolerance(n, max_abs);
    let eigen = SymmetricEigen::try_new(k.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::DecompositionFailed)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .expect("eigenvalues of a real symmetric matrix are not NaN")
    });

    let mut eigenvalues = DVector::zeros(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let value = eigen.eigenvalues[src];
        if value < -tol {
            return Err(Error::NotPositiveSemidefinite {
                eigenvalue: value,
                tolerance: tol,
            });
        }
        eigenvalues[dst] = value.max(0.0);
        eigenvectors
            .column_mut(dst)
            .copy_from(&eigen.eigenvectors.column(src));
    }

    let rotated_targets = eigenvectors.transpose() * y;
    Ok(GramSpectrum {
        eigenvectors,
        eigenvalues,
        rotated_targets,
    })
}

/// Map coefficients from the eigenbasis back to the original basis:
/// `alpha = Q alpha'`.
pub fn to_original_basis(
    spectrum: &GramSpectrum,
    alpha_rot: &DVector<f64>,
) -> Result<DVector<f64>> {
    if alpha_rot.len() != spectrum.n() {
        return Err(Error::DimensionMismatch {
            context: "rotated coefficients",
            expected: spectrum.n(),
            got: alpha_rot.len(),
        });
    }
    Ok(&spectrum.eigenvectors * alpha_rot)
}
