//! Dense weight vectors, sparse data rows, and the small set of
//! exact, order-specified operations everything else builds on.
//!
//! Summation order is fixed (increasing index, plain sequential
//! accumulation, no pairwise or compensated summation) so that a run is
//! bit-reproducible given a seed. Reproducibility of traces is worth more
//! here than the last ulp of accuracy; all numerical acceptance checks are
//! tolerance-based.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Errors from vector/row construction and arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinalgError {
    /// Operand lengths disagree.
    DimensionMismatch { expected: usize, got: usize },
    /// A sparse index addresses past the end of a dense vector.
    IndexOutOfRange { index: usize, dim: usize },
    /// A constructed value contains NaN or infinity.
    NonFinite { index: usize },
    /// Sparse row structure violated (ordering, pairing, zeros).
    InvalidSparseRow(&'static str),
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Self::IndexOutOfRange { index, dim } => {
                write!(f, "index {index} out of range for dimension {dim}")
            }
            Self::NonFinite { index } => {
                write!(f, "non-finite value at index {index}")
            }
            Self::InvalidSparseRow(why) => write!(f, "invalid sparse row: {why}"),
        }
    }
}

impl core::error::Error for LinalgError {}

/// Fixed-length dense vector of finite scalars; houses iterates `w` and
/// gradient estimates `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    /// Zero vector of dimension `d`.
    pub fn zeros(d: usize) -> Self {
        Self {
            values: vec![0.0; d],
        }
    }

    /// Wrap values, rejecting NaN/infinity.
    pub fn from_vec(values: Vec<f64>) -> Result<Self, LinalgError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite { index: i });
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `self += alpha * x`, elementwise in index order.
    pub fn axpy_in_place(&mut self, alpha: f64, x: &DenseVector) -> Result<(), LinalgError> {
        if x.len() != self.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        for (y, &xv) in self.values.iter_mut().zip(&x.values) {
            *y += alpha * xv;
        }
        debug_assert!(self.values.iter().all(|v| v.is_finite()));
        Ok(())
    }

    /// `self += alpha * row` over the row's support, in increasing index
    /// order.
    pub fn add_scaled_row(&mut self, alpha: f64, row: &SparseRow) -> Result<(), LinalgError> {
        if let Some(&max) = row.indices.last() {
            if max >= self.len() {
                return Err(LinalgError::IndexOutOfRange {
                    index: max,
                    dim: self.len(),
                });
            }
        }
        for (&i, &v) in row.indices.iter().zip(&row.values) {
            self.values[i] += alpha * v;
        }
        Ok(())
    }

    /// `self *= alpha`, elementwise.
    pub fn scale_in_place(&mut self, alpha: f64) {
        for y in &mut self.values {
            *y *= alpha;
        }
    }
}

/// `y + alpha * x`, elementwise in index order.
pub fn axpy(alpha: f64, x: &DenseVector, y: &DenseVector) -> Result<DenseVector, LinalgError> {
    let mut out = y.clone();
    out.axpy_in_place(alpha, x)?;
    Ok(out)
}

/// Squared Euclidean norm, summed in index order.
pub fn norm_sq(x: &DenseVector) -> f64 {
    let mut acc = 0.0;
    for &v in &x.values {
        acc += v * v;
    }
    acc
}

/// `a - b`.
pub fn sub(a: &DenseVector, b: &DenseVector) -> Result<DenseVector, LinalgError> {
    axpy(-1.0, b, a)
}

/// Dense dot product, summed in index order.
pub fn dense_dot(a: &DenseVector, b: &DenseVector) -> Result<f64, LinalgError> {
    if a.len() != b.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut acc = 0.0;
    for (&x, &y) in a.values.iter().zip(&b.values) {
        acc += x * y;
    }
    Ok(acc)
}

/// Sparse data row: strictly increasing 0-based indices with matching
/// finite nonzero values. Houses one data point `x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRow {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRow {
    /// Wrap (indices, values), validating structure.
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self, LinalgError> {
        if indices.len() != values.len() {
            return Err(LinalgError::InvalidSparseRow(
                "index and value counts differ",
            ));
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(LinalgError::InvalidSparseRow(
                "indices not strictly increasing",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::InvalidSparseRow("non-finite value"));
        }
        if values.iter().any(|&v| v == 0.0) {
            return Err(LinalgError::InvalidSparseRow("explicit zero value"));
        }
        Ok(Self { indices, values })
    }

    /// Build from a dense slice, omitting zero entries.
    pub fn from_dense(dense: &[f64]) -> Result<Self, LinalgError> {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, &v) in dense.iter().enumerate() {
            if !v.is_finite() {
                return Err(LinalgError::NonFinite { index: i });
            }
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Ok(Self { indices, values })
    }

    /// Empty row (no support).
    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest index in the support, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    /// Squared norm of the row, summed in increasing index order.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for &v in &self.values {
            acc += v * v;
        }
        acc
    }

    /// Row scaled by a nonzero finite factor.
    pub fn scaled(&self, factor: f64) -> Result<SparseRow, LinalgError> {
        if !factor.is_finite() || factor == 0.0 {
            return Err(LinalgError::InvalidSparseRow(
                "scale factor must be finite and nonzero",
            ));
        }
        let values = self.values.iter().map(|&v| v * factor).collect::<Vec<_>>();
        SparseRow::new(self.indices.clone(), values)
    }
}

/// `⟨row, w⟩`, summed in increasing index order.
pub fn dot(row: &SparseRow, w: &DenseVector) -> Result<f64, LinalgError> {
    if let Some(max) = row.max_index() {
        if max >= w.len() {
            return Err(LinalgError::IndexOutOfRange {
                index: max,
                dim: w.len(),
            });
        }
    }
    let mut acc = 0.0;
    for (&i, &v) in row.indices.iter().zip(&row.values) {
        acc += v * w.values[i];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dv(values: &[f64]) -> DenseVector {
        DenseVector::from_vec(values.to_vec()).unwrap()
    }

    #[test]
    fn dot_hand_cases() {
        let row = SparseRow::new(vec![0, 2], vec![2.0, -1.0]).unwrap();
        assert_eq!(dot(&row, &dv(&[1.0, 5.0, 3.0])).unwrap(), -1.0);

        let empty = SparseRow::empty();
        assert_eq!(dot(&empty, &dv(&[4.0, 5.0])).unwrap(), 0.0);

        let unit = SparseRow::new(vec![0], vec![1.0]).unwrap();
        assert_eq!(dot(&unit, &dv(&[1.0])).unwrap(), 1.0);
    }

    #[test]
    fn dot_out_of_range() {
        let row = SparseRow::new(vec![3], vec![1.0]).unwrap();
        assert_eq!(
            dot(&row, &dv(&[1.0, 2.0])),
            Err(LinalgError::IndexOutOfRange { index: 3, dim: 2 })
        );
    }

    #[test]
    fn axpy_hand_cases() {
        let y = dv(&[1.0, 2.0]);
        assert_eq!(axpy(0.0, &dv(&[9.0, 9.0]), &y).unwrap(), dv(&[1.0, 2.0]));
        assert_eq!(
            axpy(-0.1, &dv(&[10.0, 0.0]), &dv(&[1.0, 1.0])).unwrap(),
            dv(&[0.0, 1.0])
        );
        assert_eq!(
            axpy(1.0, &dv(&[1.0, 1.0]), &dv(&[0.0, 0.0])).unwrap(),
            dv(&[1.0, 1.0])
        );
    }

    #[test]
    fn axpy_dimension_mismatch() {
        assert_eq!(
            axpy(1.0, &dv(&[1.0]), &dv(&[1.0, 2.0])),
            Err(LinalgError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn norm_sq_hand_cases() {
        assert_eq!(norm_sq(&dv(&[0.0, 0.0, 0.0])), 0.0);
        assert_eq!(norm_sq(&dv(&[3.0, 4.0])), 25.0);
        assert_eq!(norm_sq(&dv(&[1.0])), 1.0);
    }

    #[test]
    fn sparse_row_validation() {
        assert!(SparseRow::new(vec![0, 1], vec![1.0, 2.0]).is_ok());
        assert!(SparseRow::new(vec![1, 0], vec![1.0, 2.0]).is_err());
        assert!(SparseRow::new(vec![0, 0], vec![1.0, 2.0]).is_err());
        assert!(SparseRow::new(vec![0], vec![1.0, 2.0]).is_err());
        assert!(SparseRow::new(vec![0], vec![0.0]).is_err());
        assert!(SparseRow::new(vec![0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn from_dense_skips_zeros() {
        let r = SparseRow::from_dense(&[0.0, 3.0, 0.0, -1.0]).unwrap();
        assert_eq!(r.indices(), &[1, 3]);
        assert_eq!(r.values(), &[3.0, -1.0]);
        assert_eq!(r.norm_sq(), 10.0);
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        assert_eq!(
            DenseVector::from_vec(vec![1.0, f64::INFINITY]),
            Err(LinalgError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn scaled_row() {
        let r = SparseRow::new(vec![0, 2], vec![3.0, 4.0]).unwrap();
        let s = r.scaled(0.2).unwrap();
        assert_eq!(s.values(), &[0.6000000000000001, 0.8]);
        assert!(r.scaled(0.0).is_err());
    }

    #[test]
    fn add_scaled_row_accumulates() {
        let mut w = dv(&[1.0, 1.0, 1.0]);
        let r = SparseRow::new(vec![0, 2], vec![2.0, -1.0]).unwrap();
        w.add_scaled_row(0.5, &r).unwrap();
        assert_eq!(w, dv(&[2.0, 1.0, 0.5]));
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

        #[test]
        fn dot_linear_in_w(
            vals in proptest::collection::vec(-10.0f64..10.0, 1..6),
            w1 in proptest::collection::vec(-10.0f64..10.0, 6),
            w2 in proptest::collection::vec(-10.0f64..10.0, 6),
            a in -5.0f64..5.0,
        ) {
            let idx: Vec<usize> = (0..vals.len()).collect();
            let vals: Vec<f64> = vals.iter().map(|&v| if v == 0.0 { 1.0 } else { v }).collect();
            let row = SparseRow::new(idx, vals).unwrap();
            let w1 = dv(&w1);
            let w2 = dv(&w2);
            let combo = axpy(a, &w1, &w2).unwrap();
            let lhs = dot(&row, &combo).unwrap();
            let rhs = a * dot(&row, &w1).unwrap() + dot(&row, &w2).unwrap();
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn axpy_self_cancellation_is_exact(
            x in proptest::collection::vec(-1e6f64..1e6, 1..8),
        ) {
            let x = dv(&x);
            let zero = axpy(-1.0, &x, &x).unwrap();
            prop_assert_eq!(norm_sq(&zero), 0.0);
        }

        #[test]
        fn operations_deterministic(
            vals in proptest::collection::vec(-10.0f64..10.0, 1..6),
            w in proptest::collection::vec(-10.0f64..10.0, 6),
        ) {
            let idx: Vec<usize> = (0..vals.len()).collect();
            let vals: Vec<f64> = vals.iter().map(|&v| if v == 0.0 { 1.0 } else { v }).collect();
            let row = SparseRow::new(idx, vals).unwrap();
            let w = dv(&w);
            prop_assert_eq!(
                dot(&row, &w).unwrap().to_bits(),
                dot(&row, &w).unwrap().to_bits()
            );
            prop_assert_eq!(norm_sq(&w).to_bits(), norm_sq(&w).to_bits());
        }
    }
}
