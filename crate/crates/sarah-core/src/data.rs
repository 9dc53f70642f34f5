//! In-memory datasets and seeded synthetic generators.
//!
//! A [`Dataset`] is the finite sum's raw material: `n` sparse feature rows
//! with one scalar label each. Parsing and serialization of the on-disk
//! format live in the companion crate; this module owns the invariants and
//! the deterministic generators used by tests, verification suites, and
//! desk-scale experiments.

use crate::linalg::{LinalgError, SparseRow};
use crate::rng::CounterRng;
use alloc::vec::Vec;
use core::fmt;

/// Errors from dataset construction and preprocessing.
#[derive(Clone, Debug, PartialEq)]
pub enum DataError {
    /// Row and label counts differ, or the dataset is empty.
    Shape(&'static str),
    /// A row's support exceeds the declared dimension.
    RowIndexOutOfRange { row: usize, index: usize, d: usize },
    /// Normalization hit a row with no support.
    ZeroRow { row: usize },
    /// A label is NaN or infinite.
    NonFiniteLabel { row: usize },
    /// Underlying vector/row structure error.
    Linalg(LinalgError),
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shape(why) => write!(f, "invalid dataset shape: {why}"),
            Self::RowIndexOutOfRange { row, index, d } => {
                write!(f, "row {row}: index {index} out of range for dimension {d}")
            }
            Self::ZeroRow { row } => write!(f, "row {row} has zero norm and cannot be normalized"),
            Self::NonFiniteLabel { row } => write!(f, "row {row}: non-finite label"),
            Self::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for DataError {}

impl From<LinalgError> for DataError {
    fn from(e: LinalgError) -> Self {
        Self::Linalg(e)
    }
}

/// Sparse feature rows plus labels; the components of the finite sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    rows: Vec<SparseRow>,
    labels: Vec<f64>,
    d: usize,
}

impl Dataset {
    /// Wrap rows and labels under a declared dimension `d`.
    pub fn new(rows: Vec<SparseRow>, labels: Vec<f64>, d: usize) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::Shape("dataset must contain at least one row"));
        }
        if rows.len() != labels.len() {
            return Err(DataError::Shape("row and label counts differ"));
        }
        if d == 0 {
            return Err(DataError::Shape("dimension must be at least 1"));
        }
        for (i, row) in rows.iter().enumerate() {
            if let Some(max) = row.max_index() {
                if max >= d {
                    return Err(DataError::RowIndexOutOfRange {
                        row: i,
                        index: max,
                        d,
                    });
                }
            }
        }
        if let Some(i) = labels.iter().position(|l| !l.is_finite()) {
            return Err(DataError::NonFiniteLabel { row: i });
        }
        Ok(Self { rows, labels, d })
    }

    /// Component count `n`.
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Feature dimension `d`.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &SparseRow {
        &self.rows[i]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// True if every label is -1 or +1.
    pub fn labels_are_binary(&self) -> bool {
        self.labels.iter().all(|&l| l == -1.0 || l == 1.0)
    }

    /// Copy with every row scaled to unit Euclidean norm.
    pub fn normalize_rows(&self) -> Result<Dataset, DataError> {
        let mut rows = Vec::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            let nsq = row.norm_sq();
            if nsq == 0.0 {
                return Err(DataError::ZeroRow { row: i });
            }
            rows.push(row.scaled(1.0 / libm::sqrt(nsq))?);
        }
        Dataset::new(rows, self.labels.clone(), self.d)
    }
}

/// Noise scale applied to synthetic labels and margins.
const SYNTH_NOISE: f64 = 0.1;

/// Draw a dense gaussian row and its planted-margin ingredients.
///
/// Draw order is part of the generator contract (changing it changes every
/// downstream golden value): first `w_true` (d gaussians), then per row: d
/// gaussians for the features followed by one gaussian for the noise term.
/// Each gaussian consumes exactly two raw draws.
fn synth_core(n: usize, d: usize, seed: u64) -> (Vec<SparseRow>, Vec<f64>) {
    assert!(n >= 1 && d >= 1);
    let mut rng = CounterRng::new(seed);
    let w_true: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
    let mut rows = Vec::with_capacity(n);
    let mut margins = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x: Vec<f64> = (0..d).map(|_| rng.next_gaussian()).collect();
        let mut nsq = 0.0;
        for &v in &x {
            nsq += v * v;
        }
        if nsq == 0.0 {
            // Unreachable in practice; keeps the generator total.
            x[0] = 1.0;
            nsq = 1.0;
        }
        let inv = 1.0 / libm::sqrt(nsq);
        let mut margin = 0.0;
        for (xj, &wj) in x.iter_mut().zip(&w_true) {
            *xj *= inv;
            margin += *xj * wj;
        }
        let noise = rng.next_gaussian();
        rows.push(SparseRow::from_dense(&x).expect("finite gaussian row"));
        margins.push(margin + SYNTH_NOISE * noise);
    }
    (rows, margins)
}

/// Deterministic regression dataset: unit-norm gaussian rows, labels
/// `⟨x_i, w_true⟩ + 0.1·noise` for a seeded planted `w_true`.
pub fn synth_ridge(n: usize, d: usize, seed: u64) -> Dataset {
    let (rows, margins) = synth_core(n, d, seed);
    Dataset::new(rows, margins, d).expect("generated dataset is valid")
}

/// Deterministic binary classification dataset: unit-norm gaussian rows,
/// labels `sign(⟨x_i, w_true⟩ + 0.1·noise)` in `{-1, +1}` (zero maps to +1).
pub fn synth_classification(n: usize, d: usize, seed: u64) -> Dataset {
    let (rows, margins) = synth_core(n, d, seed);
    let labels = margins
        .iter()
        .map(|&m| if m < 0.0 { -1.0 } else { 1.0 })
        .collect();
    Dataset::new(rows, labels, d).expect("generated dataset is valid")
}
