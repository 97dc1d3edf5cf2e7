//! Datasets, CSV ingestion, synthetic data, and deterministic splitting.
//!
//! Everything here is a pure function of its inputs and an explicit seed;
//! the same `(dataset, spec)` pair always produces the same split.

use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A labeled sample set: an `n x p` feature matrix plus `n` targets.
///
/// Invariants enforced at construction: `n >= 1`, row count matches target
/// length, and every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    targets: DVector<f64>,
    name: Option<String>,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, targets: DVector<f64>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::EmptyInput);
        }
        if features.nrows() != targets.len() {
            return Err(Error::DimensionMismatch {
                context: "dataset rows vs targets",
                expected: features.nrows(),
                got: targets.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "dataset features",
            });
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "dataset targets",
            });
        }
        Ok(Self {
            features,
            targets,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    /// Number of feature columns.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Copy one feature row into a `Vec`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.dim()).map(|j| self.features[(i, j)]).collect()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyInput);
        }
        let p = self.dim();
        let features = DMatrix::from_fn(indices.len(), p, |i, j| self.features[(indices[i], j)]);
        let targets = DVector::from_fn(indices.len(), |i, _| self.targets[indices[i]]);
        let mut out = Self::new(features, targets)?;
        out.name = self.name.clone();
        Ok(out)
    }

    /// Drop row `i`, keeping the remaining rows in order. Errors when only
    /// one row is present.
    pub fn leave_one_out(&self, i: usize) -> Result<Self> {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| k != i).collect();
        self.select_rows(&keep)
    }
}

/// Selects the target column of a CSV file by header name or 0-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(idx) => ColumnSelector::Index(idx),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

/// Tokenized CSV: optional header plus numeric rows tagged with their
/// 1-based file line numbers.
struct RawCsv {
    header: Option<Vec<String>>,
    arity: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

fn tokenize_csv(bytes: &[u8]) -> Result<RawCsv> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::NotUtf8)?;

    let mut lines = Vec::new(); // (1-based line number, cells)
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        lines.push((idx + 1, cells));
    }
    if lines.is_empty() {
        return Err(Error::EmptyInput);
    }

    let first_is_header = lines[0].1.iter().any(|c| c.parse::<f64>().is_err());
    let (header, data_lines) = if first_is_header {
        let names: Vec<String> = lines[0].1.iter().map(|s| s.to_string()).collect();
        (Some(names), &lines[1..])
    } else {
        (None, &lines[..])
    };
    if data_lines.is_empty() {
        return Err(Error::EmptyInput);
    }

    let arity = match &header {
        Some(h) => h.len(),
        None => data_lines[0].1.len(),
    };
    let mut rows = Vec::with_capacity(data_lines.len());
    for (line_no, cells) in data_lines {
        if cells.len() != arity {
            return Err(Error::RaggedRow {
                row: *line_no,
                expected: arity,
                got: cells.len(),
            });
        }
        let mut row = Vec::with_capacity(arity);
        for (j, cell) in cells.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::BadCell {
                row: *line_no,
                col: j + 1,
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::BadCell {
                    row: *line_no,
                    col: j + 1,
                    value: cell.to_string(),
                });
            }
            row.push(value);
        }
        rows.push((*line_no, row));
    }
    Ok(RawCsv {
        header,
        arity,
        rows,
    })
}

/// Parse CSV bytes into a dataset.
///
/// Comma-separated UTF-8 with decimal-point reals. A header line is
/// auto-detected: if any cell of the first non-blank line fails to parse as
/// a number, the line is treated as a header. Row and column numbers in
/// errors are 1-based file positions (the header counts as a row). Blank
/// lines are skipped.
pub fn parse_csv(bytes: &[u8], target: &ColumnSelector) -> Result<Dataset> {
    let raw = tokenize_csv(bytes)?;
    let target_idx = match target {
        ColumnSelector::Index(idx) => {
            if *idx >= raw.arity {
                return Err(Error::TargetColumnNotFound(idx.to_string()));
            }
            *idx
        }
        ColumnSelector::Name(name) => match &raw.header {
            Some(h) => h
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::TargetColumnNotFound(name.clone()))?,
            None => return Err(Error::TargetColumnNotFound(name.clone())),
        },
    };
    if raw.arity < 2 {
        return Err(Error::NoFeatureColumns);
    }

    let n = raw.rows.len();
    let p = raw.arity - 1;
    let mut features = DMatrix::zeros(n, p);
    let mut targets = DVector::zeros(n);
    for (i, (_, row)) in raw.rows.iter().enumerate() {
        let mut j_out = 0;
        for (j, &value) in row.iter().enumerate() {
            if j == target_idx {
                targets[i] = value;
            } else {
                features[(i, j_out)] = value;
                j_out += 1;
            }
        }
    }
    Dataset::new(features, targets)
}

/// Parse CSV bytes where every column is a feature (no target), e.g. query
/// points for prediction. Same format rules as [`parse_csv`].
pub fn parse_csv_features(bytes: &[u8]) -> Result<DMatrix<f64>> {
    let raw = tokenize_csv(bytes)?;
    let n = raw.rows.len();
    Ok(DMatrix::from_fn(n, raw.arity, |i, j| raw.rows[i].1[j]))
}

/// Read a CSV file from disk. See [`parse_csv`] for the accepted format.
pub fn load_csv(path: impl AsRef<Path>, target: &ColumnSelector) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(parse_csv(&bytes, target)?.with_name(name))
}

/// Closed-form response of the synthetic benchmark, without noise.
///
/// `10 sin(pi x1 x2) + 20 (x3 - 1/2)^2 + 10 x4 + 5 x5`; coordinates past the
/// fifth are inert.
pub fn synthetic_response(x: &[f64]) -> f64 {
    assert!(
        x.len() >= 5,
        "synthetic response needs at least 5 coordinates"
    );
    10.0 * (std::f64::consts::PI * x[0] * x[1]).sin()
        + 20.0 * (x[2] - 0.5).powi(2)
        + 10.0 * x[3]
        + 5.0 * x[4]
}

/// Number of input coordinates of the synthetic benchmark.
pub const SYNTHETIC_DIM: usize = 10;

/// Synthetic regression benchmark: 10 inputs i.i.d. uniform on `[0, 1]`,
/// response [`synthetic_response`] plus unit-variance Gaussian noise.
/// Deterministic per seed.
pub fn generate_synthetic(n: usize, seed: u64) -> Result<Dataset> {
    generate_synthetic_with(n, seed, true)
}

/// Same as [`generate_synthetic`] with the noise term optional, which makes
/// targets match the closed-form response exactly.
pub fn generate_synthetic_with(n: usize, seed: u64, noise: bool) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            requirement: "must be at least 1",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = DMatrix::zeros(n, SYNTHETIC_DIM);
    let mut targets = DVector::zeros(n);
    let mut row = vec![0.0; SYNTHETIC_DIM];
    for i in 0..n {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = rng.random::<f64>();
            features[(i, j)] = *slot;
        }
        let eps: f64 = if noise {
            rng.sample(StandardNormal)
        } else {
            0.0
        };
        targets[i] = synthetic_response(&row) + eps;
    }
    Ok(Dataset::new(features, targets)?.with_name("synthetic"))
}

/// How to split a dataset: a train fraction for two-way splits and a fold
/// count for k-fold partitions, both driven by the same seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub fold_count: usize,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64, fold_count: usize) -> Self {
        Self {
            train_fraction,
            seed,
            fold_count,
        }
    }
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order
}

/// Two-way split into `(train, test)`. The train size is
/// `round(n * train_fraction)`, clamped so both parts are non-empty.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let n = dataset.len();
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "train_fraction",
            value: spec.train_fraction,
            requirement: "must lie strictly between 0 and 1",
        });
    }
    if n < 2 {
        return Err(Error::EmptySplit {
            n,
            fraction: spec.train_fraction,
        });
    }
    let n_train = ((n as f64) * spec.train_fraction).round() as usize;
    let n_train = n_train.clamp(1, n - 1);
    let order = permutation(n, spec.seed);
    let train = dataset.select_rows(&order[..n_train])?;
    let test = dataset.select_rows(&order[n_train..])?;
    Ok((train, test))
}

/// Index ranges of the k parts of an n-element partition; remainders go to
/// the earliest parts, so sizes differ by at most one.
fn fold_bounds(n: usize, k: usize) -> Vec<(usize, usize)> {
    let base = n / k;
    let rem = n % k;
    let mut bounds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let size = base + usize::from(i < rem);
        bounds.push((start, start + size));
        start += size;
    }
    bounds
}

/// Partition the dataset into `spec.fold_count` disjoint parts of
/// near-equal size, deterministic per seed.
pub fn partition(dataset: &Dataset, spec: &SplitSpec) -> Result<Vec<Dataset>> {
    let n = dataset.len();
    let k = spec.fold_count;
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "fold_count",
            value: 0.0,
            requirement: "must be at least 1",
        });
    }
    if k > n {
        return Err(Error::FoldCountExceedsSamples { fold_count: k, n });
    }
    let order = permutation(n, spec.seed);
    fold_bounds(n, k)
        .into_iter()
        .map(|(lo, hi)| dataset.select_rows(&order[lo..hi]))
        .collect()
}

/// k-fold split: for every fold, `(train, validation)` where the validation
/// part is the fold and the train part is everything else. Parts are
/// disjoint and exhaustive.
pub fn k_fold(dataset: &Dataset, spec: &SplitSpec) -> Result<Vec<(Dataset, Dataset)>> {
    k_fold_indices(dataset.len(), spec)?
        .into_iter()
        .map(|(train_idx, val_idx)| {
            Ok((
                dataset.select_rows(&train_idx)?,
                dataset.select_rows(&val_idx)?,
            ))
        })
        .collect()
}

/// Index form of [`k_fold`], for callers that reuse precomputed matrices.
pub fn k_fold_indices(n: usize, spec: &SplitSpec) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let k = spec.fold_count;
    if k < 2 {
        return Err(Error::InvalidParameter {
            name: "fold_count",
            value: k as f64,
            requirement: "must be at least 2 for k-fold",
        });
    }
    if k > n {
        return Err(Error::FoldCountExceedsSamples { fold_count: k, n });
    }
    let order = permutation(n, spec.seed);
    let bounds = fold_bounds(n, k);
    let mut folds = Vec::with_capacity(k);
    for (lo, hi) in bounds {
        let val_idx: Vec<usize> = order[lo..hi].to_vec();
        let mut train_idx = Vec::with_capacity(n - (hi - lo));
        train_idx.extend_from_slice(&order[..lo]);
        train_idx.extend_from_slice(&order[hi..]);
        folds.push((train_idx, val_idx));
    }
    Ok(folds)
}

/// Per-column affine map to zero mean and unit variance, fitted on a
/// training split only. Opt-in; nothing in the fitting pipeline applies it
/// by default. Constant columns are left unscaled.
#[derive(Debug, Clone)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &Dataset) -> Self {
        let n = train.len() as f64;
        let p = train.dim();
        let mut mean = vec![0.0; p];
        let mut scale = vec![0.0; p];
        for j in 0..p {
            let col = train.features().column(j);
            let mu = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
            mean[j] = mu;
            scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        if dataset.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                context: "standardizer columns",
                expected: self.mean.len(),
                got: dataset.dim(),
            });
        }
        let features = DMatrix::from_fn(dataset.len(), dataset.dim(), |i, j| {
            (dataset.features()[(i, j)] - self.mean[j]) / self.scale[j]
        });
        let mut out = Dataset::new(features, dataset.targets().clone())?;
        if let Some(name) = dataset.name() {
            out = out.with_name(name);
        }
        Ok(out)
    }
}

/// Derive a per-stage sub-seed from a base seed and a stream tag, so one
/// command-level seed drives every randomized stage independently.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
