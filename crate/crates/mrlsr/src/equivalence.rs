//! Per-training-set equivalence between the variable-exponent solver and
//! kernel ridge regression, and the experiment showing it does not carry
//! over to other training sets.
//!
//! On a fixed training set, a model fitted with exponent `m > 1` and weight
//! `lambda` coincides with KRR at `lambda2 = (m/2) C0 lambda`, where `C0`
//! is the root the solver found. The pair `(lambda, lambda2)` is calibrated
//! to that one set: refitting both on a different set with the same
//! parameters gives different functions, because the root moves with the
//! data. [`run_z_equivalence_experiment`] measures exactly that across a
//! random partition of a dataset.

use nalgebra::DVector;

use crate::data::{partition, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::kernel::{bandwidth_heuristic, gram, KernelSpec};
use crate::solver::{fit_krr, fit_mrlsr, Model, SolverConfig};

/// The calibration map itself: `lambda2 = (m/2) * C0 * lambda`.
pub fn lambda2_from(m: f64, lambda: f64, c0: f64) -> f64 {
    0.5 * m * c0 * lambda
}

/// Ridge weight that reproduces the fitted model on its own training set.
///
/// Defined for `m > 1` only; the calibration has no meaning for `m <= 1`,
/// where the two problems genuinely differ even on one set. A degenerate
/// fit (zero targets, `C0 = 0`) has no positive ridge weight either.
pub fn equivalent_lambda2(model: &Model) -> Result<f64> {
    let m = model.config().m;
    if m <= 1.0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m,
            requirement: "the ridge calibration exists only for m > 1",
        });
    }
    let c0 = model.report().c0;
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "c0",
            value: c0,
            requirement: "calibration needs a positive root (non-degenerate fit)",
        });
    }
    Ok(lambda2_from(m, model.config().lambda, c0))
}

/// Distances between the two solutions on one part.
#[derive(Debug, Clone, PartialEq)]
pub struct PartDifference {
    /// 1-based part index.
    pub part: usize,
    /// `||alpha_m - alpha_krr||_2`.
    pub alpha_diff: f64,
    /// RKHS-norm difference `sqrt((da)^T K (da))`.
    pub rkhs_diff: f64,
}

/// Outcome of the cross-part calibration experiment.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub m: f64,
    pub lambda: f64,
    /// Ridge weight calibrated on the first part.
    pub lambda2: f64,
    pub parts: Vec<PartDifference>,
}

impl EquivalenceReport {
    /// Flat CSV table, one row per part.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("part,alpha_diff,rkhs_diff\n");
        for p in &self.parts {
            out.push_str(&format!("Z{},{},{}\n", p.part, p.alpha_diff, p.rkhs_diff));
        }
        out
    }
}

/// Split the dataset into `parts` equal pieces, calibrate `lambda2` on the
/// first piece, then fit both algorithms on every piece and record how far
/// apart their solutions are.
///
/// Each part uses its own bandwidth heuristic, so both algorithms always
/// share a kernel. The difference on the calibration part is floating-point
/// noise; on the other parts it is generically positive.
pub fn run_z_equivalence_experiment(
    dataset: &Dataset,
    m: f64,
    lambda: f64,
    parts: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    if m <= 1.0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m,
            requirement: "the experiment needs the m > 1 calibration",
        });
    }
    let pieces = partition(dataset, &SplitSpec::new(0.5, seed, parts))?;

    let config = SolverConfig::new(m, lambda)?;
    let calibration = fit_on_part(&pieces[0], &config)?;
    let lambda2 = equivalent_lambda2(&calibration.0)?;

    let mut differences = Vec::with_capacity(pieces.len());
    for (idx, piece) in pieces.iter().enumerate() {
        let (model_m, kernel) = if idx == 0 {
            calibration.clone()
        } else {
            fit_on_part(piece, &config)?
        };
        let model_krr = fit_krr(piece, &kernel, lambda2)?;
        let delta: DVector<f64> = model_m.alpha() - model_krr.alpha();
        let k = gram(piece, &kernel);
        let rkhs_sq = delta.dot(&(&k * &delta));
        differences.push(PartDifference {
            part: idx + 1,
            alpha_diff: delta.norm(),
            rkhs_diff: rkhs_sq.max(0.0).sqrt(),
        });
    }

    Ok(EquivalenceReport {
        m,
        lambda,
        lambda2,
        parts: differences,
    })
}

fn fit_on_part(part: &Dataset, config: &SolverConfig) -> Result<(Model, KernelSpec)> {
    let kernel = KernelSpec::new(bandwidth_heuristic(part)?)?;
    let model = fit_mrlsr(part, &kernel, config)?;
    Ok((model, kernel))
}
