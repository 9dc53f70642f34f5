//! Finite-sum objectives `F(w) = (1/n) Σ f_i(w)` with component and full
//! gradients plus smoothness metadata.
//!
//! Three kinds:
//!
//! * `logistic-l2` — `f_i(w) = log(1 + exp(-y_i⟨x_i,w⟩)) + (λ/2)‖w‖²`,
//!   strongly convex for `λ > 0`.
//! * `ridge` — `f_i(w) = ½(⟨x_i,w⟩ - y_i)² + (λ/2)‖w‖²`.
//! * `logistic-nonconvex-reg` — logistic loss plus the bounded nonconvex
//!   regularizer `λ Σ_j w_j²/(1+w_j²)`; exists to exercise the nonconvex
//!   convergence bounds at desk scale.
//!
//! Smoothness constants are valid upper bounds computed from per-component
//! closed forms (`max_i ‖x_i‖²` scaling), not estimates: a sound `L` keeps
//! every theorem-derived step size admissible.

use crate::data::Dataset;
use crate::linalg::{dot, DenseVector, LinalgError};
use core::fmt;
use core::str::FromStr;

/// Objective family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    LogisticL2,
    Ridge,
    LogisticNonconvexReg,
}

impl ProblemKind {
    /// Canonical CLI/file name.
    pub fn name(self) -> &'static str {
        match self {
            Self::LogisticL2 => "logistic-l2",
            Self::Ridge => "ridge",
            Self::LogisticNonconvexReg => "logistic-nonconvex-reg",
        }
    }

    /// True for kinds with convex components.
    pub fn is_convex(self) -> bool {
        !matches!(self, Self::LogisticNonconvexReg)
    }

    /// True for kinds whose labels must be in `{-1, +1}`.
    pub fn needs_binary_labels(self) -> bool {
        !matches!(self, Self::Ridge)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, UnknownKind> {
        match s {
            "logistic-l2" => Ok(Self::LogisticL2),
            "ridge" => Ok(Self::Ridge),
            "logistic-nonconvex-reg" => Ok(Self::LogisticNonconvexReg),
            _ => Err(UnknownKind),
        }
    }
}

/// Parse error for [`ProblemKind`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnknownKind;

impl fmt::Display for UnknownKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown problem kind (expected logistic-l2, ridge, or logistic-nonconvex-reg)")
    }
}

impl core::error::Error for UnknownKind {}

/// Errors from problem construction and evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemError {
    /// λ must be nonnegative and finite.
    BadLambda,
    /// Classification kinds require labels in `{-1, +1}`.
    BadLabels { row: usize },
    /// Component index past `n`.
    ComponentOutOfRange { index: usize, n: usize },
    /// Vector arithmetic failure (dimension mismatch).
    Linalg(LinalgError),
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadLambda => f.write_str("lambda must be finite and nonnegative"),
            Self::BadLabels { row } => {
                write!(f, "row {row}: classification labels must be -1 or +1")
            }
            Self::ComponentOutOfRange { index, n } => {
                write!(f, "component index {index} out of range for n={n}")
            }
            Self::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ProblemError {}

impl From<LinalgError> for ProblemError {
    fn from(e: LinalgError) -> Self {
        Self::Linalg(e)
    }
}

/// Smoothness constants of a problem: `L` (gradient Lipschitz upper bound),
/// `μ` (strong convexity, 0 if none), and `κ = L/μ` when defined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessInfo {
    pub l: f64,
    pub mu: f64,
    pub kappa: Option<f64>,
}

/// A finite-sum objective over a dataset.
#[derive(Clone, Debug)]
pub struct Problem {
    data: Dataset,
    lambda: f64,
    kind: ProblemKind,
}

impl Problem {
    /// Bind a dataset to an objective kind and regularization strength.
    pub fn new(data: Dataset, kind: ProblemKind, lambda: f64) -> Result<Self, ProblemError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(ProblemError::BadLambda);
        }
        if kind.needs_binary_labels() {
            if let Some(row) = data
                .labels()
                .iter()
                .position(|&l| l != -1.0 && l != 1.0)
            {
                return Err(ProblemError::BadLabels { row });
            }
        }
        Ok(Self { data, lambda, kind })
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn d(&self) -> usize {
        self.data.d()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    fn check_component(&self, i: usize) -> Result<(), ProblemError> {
        if i >= self.n() {
            return Err(ProblemError::ComponentOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        Ok(())
    }

    /// Loss term of `f_i` (everything except the regularizer).
    fn loss_value(&self, i: usize, margin: f64) -> f64 {
        match self.kind {
            ProblemKind::LogisticL2 | ProblemKind::LogisticNonconvexReg => {
                softplus(-self.data.label(i) * margin)
            }
            ProblemKind::Ridge => {
                let r = margin - self.data.label(i);
                0.5 * r * r
            }
        }
    }

    /// Derivative of the loss term with respect to the margin `⟨x_i, w⟩`.
    fn loss_slope(&self, i: usize, margin: f64) -> f64 {
        match self.kind {
            ProblemKind::LogisticL2 | ProblemKind::LogisticNonconvexReg => {
                let y = self.data.label(i);
                -y * sigmoid(-y * margin)
            }
            ProblemKind::Ridge => margin - self.data.label(i),
        }
    }

    /// Regularizer value at `w`.
    fn reg_value(&self, w: &DenseVector) -> f64 {
        match self.kind {
            ProblemKind::LogisticL2 | ProblemKind::Ridge => {
                let mut acc = 0.0;
                for &wj in w.as_slice() {
                    acc += wj * wj;
                }
                0.5 * self.lambda * acc
            }
            ProblemKind::LogisticNonconvexReg => {
                let mut acc = 0.0;
                for &wj in w.as_slice() {
                    acc += wj * wj / (1.0 + wj * wj);
                }
                self.lambda * acc
            }
        }
    }

    /// `out += coeff * ∇reg(w)`, elementwise in index order.
    fn add_reg_grad(&self, w: &DenseVector, coeff: f64, out: &mut DenseVector) {
        let scale = coeff * self.lambda;
        match self.kind {
            ProblemKind::LogisticL2 | ProblemKind::Ridge => {
                for (o, &wj) in out.as_mut_slice().iter_mut().zip(w.as_slice()) {
                    *o += scale * wj;
                }
            }
            ProblemKind::LogisticNonconvexReg => {
                for (o, &wj) in out.as_mut_slice().iter_mut().zip(w.as_slice()) {
                    let den = 1.0 + wj * wj;
                    *o += scale * 2.0 * wj / (den * den);
                }
            }
        }
    }

    /// Component value `f_i(w)`.
    pub fn component_value(&self, i: usize, w: &DenseVector) -> Result<f64, ProblemError> {
        self.check_component(i)?;
        let margin = dot(self.data.row(i), w)?;
        Ok(self.loss_value(i, margin) + self.reg_value(w))
    }

    /// `out += coeff * ∇f_i(w)`; the workhorse behind full gradients and
    /// estimator updates. Accumulation order: sparse loss part over the
    /// row's support, then the dense regularizer part.
    pub fn add_component_grad(
        &self,
        i: usize,
        w: &DenseVector,
        coeff: f64,
        out: &mut DenseVector,
    ) -> Result<(), ProblemError> {
        self.check_component(i)?;
        if w.len() != self.d() || out.len() != self.d() {
            return Err(ProblemError::Linalg(LinalgError::DimensionMismatch {
                expected: self.d(),
                got: if w.len() != self.d() {
                    w.len()
                } else {
                    out.len()
                },
            }));
        }
        let margin = dot(self.data.row(i), w)?;
        let slope = self.loss_slope(i, margin);
        out.add_scaled_row(coeff * slope, self.data.row(i))?;
        self.add_reg_grad(w, coeff, out);
        Ok(())
    }

    /// Component gradient `∇f_i(w)`.
    pub fn component_grad(&self, i: usize, w: &DenseVector) -> Result<DenseVector, ProblemError> {
        let mut g = DenseVector::zeros(self.d());
        self.add_component_grad(i, w, 1.0, &mut g)?;
        Ok(g)
    }

    /// `out += coeff * [∇f_i(w_new) − ∇f_i(w_old)]`, with the slope and
    /// regularizer differences taken before scaling so bitwise-identical
    /// points contribute exact zeros and leave `out` unchanged.
    pub fn add_component_grad_diff(
        &self,
        i: usize,
        w_new: &DenseVector,
        w_old: &DenseVector,
        coeff: f64,
        out: &mut DenseVector,
    ) -> Result<(), ProblemError> {
        self.check_component(i)?;
        for v in [w_new, w_old, &*out] {
            if v.len() != self.d() {
                return Err(ProblemError::Linalg(LinalgError::DimensionMismatch {
                    expected: self.d(),
                    got: v.len(),
                }));
            }
        }
        let m_new = dot(self.data.row(i), w_new)?;
        let m_old = dot(self.data.row(i), w_old)?;
        let slope_diff = self.loss_slope(i, m_new) - self.loss_slope(i, m_old);
        out.add_scaled_row(coeff * slope_diff, self.data.row(i))?;
        let scale = coeff * self.lambda;
        match self.kind {
            ProblemKind::LogisticL2 | ProblemKind::Ridge => {
                for (j, o) in out.as_mut_slice().iter_mut().enumerate() {
                    *o += scale * (w_new.as_slice()[j] - w_old.as_slice()[j]);
                }
            }
            ProblemKind::LogisticNonconvexReg => {
                let pull = |u: f64| {
                    let den = 1.0 + u * u;
                    2.0 * u / (den * den)
                };
                for (j, o) in out.as_mut_slice().iter_mut().enumerate() {
                    *o += scale * (pull(w_new.as_slice()[j]) - pull(w_old.as_slice()[j]));
                }
            }
        }
        Ok(())
    }

    /// Objective `F(w)`: mean of component values, accumulated `i = 0..n-1`.
    pub fn objective(&self, w: &DenseVector) -> Result<f64, ProblemError> {
        let mut acc = 0.0;
        for i in 0..self.n() {
            let margin = dot(self.data.row(i), w)?;
            acc += self.loss_value(i, margin);
        }
        Ok(acc / self.n() as f64 + self.reg_value(w))
    }

    /// Full gradient `∇F(w) = (1/n) Σ ∇f_i(w)`, accumulated `i = 0..n-1`.
    pub fn full_grad(&self, w: &DenseVector) -> Result<DenseVector, ProblemError> {
        if w.len() != self.d() {
            return Err(ProblemError::Linalg(LinalgError::DimensionMismatch {
                expected: self.d(),
                got: w.len(),
            }));
        }
        let mut g = DenseVector::zeros(self.d());
        for i in 0..self.n() {
            let margin = dot(self.data.row(i), w)?;
            let slope = self.loss_slope(i, margin);
            g.add_scaled_row(slope, self.data.row(i))?;
        }
        g.scale_in_place(1.0 / self.n() as f64);
        self.add_reg_grad(w, 1.0, &mut g);
        Ok(g)
    }

    /// Smoothness constants from per-component closed forms.
    ///
    /// * logistic-l2: `L = max_i ‖x_i‖²/4 + λ`, `μ = λ`
    /// * ridge: `L = max_i ‖x_i‖² + λ`, `μ = λ`
    /// * logistic-nonconvex-reg: `L = max_i ‖x_i‖²/4 + 2λ`, `μ = 0`
    ///   (the regularizer's Hessian has spectral bound 2)
    pub fn smoothness(&self) -> SmoothnessInfo {
        let mut max_row_sq: f64 = 0.0;
        for row in self.data.rows() {
            let nsq = row.norm_sq();
            if nsq > max_row_sq {
                max_row_sq = nsq;
            }
        }
        let (l, mu) = match self.kind {
            ProblemKind::LogisticL2 => (max_row_sq / 4.0 + self.lambda, self.lambda),
            ProblemKind::Ridge => (max_row_sq + self.lambda, self.lambda),
            ProblemKind::LogisticNonconvexReg => (max_row_sq / 4.0 + 2.0 * self.lambda, 0.0),
        };
        let kappa = (mu > 0.0).then(|| l / mu);
        SmoothnessInfo { l, mu, kappa }
    }
}

/// `log(1 + exp(u))`, stable for large `|u|`.
fn softplus(u: f64) -> f64 {
    let pos = if u > 0.0 { u } else { 0.0 };
    let abs = if u < 0.0 { -u } else { u };
    pos + libm::log1p(libm::exp(-abs))
}

/// `1/(1 + exp(-z))`, stable for large `|z|`.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}
