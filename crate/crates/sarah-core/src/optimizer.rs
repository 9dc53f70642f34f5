//! The SARAH optimizer family: recursive stochastic gradient estimation with
//! periodic full-gradient restarts, plus step-size and budget planners.
//!
//! All variants share one estimator recursion. An outer loop starts from the
//! current restart point, computes the full gradient as the initial estimator
//! `v_0`, and then inner iterations update
//!
//! ```text
//! v_t = (1/b) Σ_{i∈batch} [∇f_i(w_t) − ∇f_i(w_{t−1})] + v_{t−1}
//! w_{t+1} = w_t − η v_t
//! ```
//!
//! The variants differ in how the inner loop ends and how η is chosen:
//!
//! * `sarah` — fixed inner length `m`, restart point is the last iterate.
//! * `sarah-plus` — inner loop exits once `‖v‖²` falls to `γ‖v_0‖²` or below
//!   (strict `>` test before each estimator update).
//! * `sarah-pp` — same `‖v_t‖² ≥ γ‖v_0‖²` test checked before each move,
//!   inner length capped at `m`, and a global budget of `T` total moves
//!   across outer loops.
//! * `sarah-adaptive` — the `sarah-pp` loop with a per-step learning rate
//!   `η_t = (1/L) ‖v_t‖²/‖v_0‖²`.
//! * `gd` — full gradient descent; identical to `sarah` with `m = 0`.
//!
//! Traces record every state a move is taken from (so trace rows with
//! `outer_s ≥ 1` enumerate exactly the iterate distribution the convergence
//! bounds average over), plus an initial row for the start point and a
//! terminal row for the output point. `‖v‖²` and the last-used η appear in
//! every row; `F(w)`, `‖∇F(w)‖²`, and suboptimality are instrumentation
//! computed only at checkpoint rows and never counted in `grad_evals`.
//!
//! Accounting: `grad_evals` grows by `n` per full gradient and `2b` per
//! sampled estimator update, and by nothing else.

use crate::linalg::{norm_sq, DenseVector, LinalgError};
use crate::oracle::ReferenceSolution;
use crate::problems::{Problem, ProblemError};
use crate::rng::CounterRng;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Optimizer variant selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Sarah,
    SarahPlus,
    SarahPp,
    SarahAdaptive,
    Gd,
}

impl Algo {
    /// Canonical CLI/file name.
    pub fn name(self) -> &'static str {
        match self {
            Self::Sarah => "sarah",
            Self::SarahPlus => "sarah-plus",
            Self::SarahPp => "sarah-pp",
            Self::SarahAdaptive => "sarah-adaptive",
            Self::Gd => "gd",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = UnknownAlgo;

    fn from_str(s: &str) -> Result<Self, UnknownAlgo> {
        match s {
            "sarah" => Ok(Self::Sarah),
            "sarah-plus" => Ok(Self::SarahPlus),
            "sarah-pp" => Ok(Self::SarahPp),
            "sarah-adaptive" => Ok(Self::SarahAdaptive),
            "gd" => Ok(Self::Gd),
            _ => Err(UnknownAlgo),
        }
    }
}

/// Parse error for [`Algo`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnknownAlgo;

impl fmt::Display for UnknownAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown algorithm (expected sarah, sarah-plus, sarah-pp, sarah-adaptive, or gd)")
    }
}

impl core::error::Error for UnknownAlgo {}

/// Errors from configuration validation or underlying evaluations.
#[derive(Clone, Debug, PartialEq)]
pub enum OptimizerError {
    InvalidConfig { reason: &'static str },
    Problem(ProblemError),
}

impl fmt::Display for OptimizerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidConfig { reason } => write!(f, "invalid configuration: {reason}"),
            Self::Problem(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for OptimizerError {}

impl From<ProblemError> for OptimizerError {
    fn from(e: ProblemError) -> Self {
        Self::Problem(e)
    }
}

impl From<LinalgError> for OptimizerError {
    fn from(e: LinalgError) -> Self {
        Self::Problem(ProblemError::Linalg(e))
    }
}

fn cfg_err(reason: &'static str) -> OptimizerError {
    OptimizerError::InvalidConfig { reason }
}

/// Full run configuration. Fields irrelevant to the chosen `algo` are
/// ignored (η by `sarah-adaptive`, γ by `sarah` and `gd`, `t_total` by all
/// but `sarah-pp`, `m` by `gd`).
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub algo: Algo,
    /// Learning rate (free mode) or theorem-validated step size.
    pub eta: f64,
    /// Inner loop length (`sarah`) or cap (`sarah-plus`, `sarah-pp`,
    /// `sarah-adaptive`).
    pub m: usize,
    /// Outer loop count (`sarah`, `sarah-plus`, `sarah-adaptive`); step
    /// count for `gd`.
    pub s: usize,
    /// Mini-batch size, sampled without replacement per inner iteration.
    pub b: usize,
    /// Stopping ratio in `(0, 1]` for the `‖v‖²` tests.
    pub gamma: f64,
    /// Total-move budget for `sarah-pp`.
    pub t_total: usize,
    pub seed: u64,
    /// When set, η is checked against the sanctioned step-size bound for
    /// the variant and the run is refused on violation.
    pub theorem_mode: bool,
    /// Stop once `grad_evals` reaches this many component-gradient
    /// evaluations (checked between inner steps and at outer boundaries).
    pub eval_budget: Option<u64>,
    /// Record `F` and `‖∇F‖²` every this many inner steps. Default:
    /// `max(1, n/(2b))`, roughly once per data pass, plus every outer
    /// boundary and the terminal row.
    pub checkpoint_every: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Sarah,
            eta: 0.1,
            m: 0,
            s: 1,
            b: 1,
            gamma: 0.125,
            t_total: 1,
            seed: 0,
            theorem_mode: false,
            eval_budget: None,
            checkpoint_every: None,
        }
    }
}

/// Rounding guard for theorem-mode boundary cases like `γ = L·η`.
pub(crate) const THEOREM_SLACK: f64 = 1.0 + 4.0 * f64::EPSILON;

impl OptimizerConfig {
    /// Check every invariant the chosen variant relies on.
    pub fn validate(&self, p: &Problem) -> Result<(), OptimizerError> {
        if self.b < 1 || self.b > p.n() {
            return Err(cfg_err("batch size b must satisfy 1 <= b <= n"));
        }
        if self.checkpoint_every == Some(0) {
            return Err(cfg_err("checkpoint cadence must be at least 1"));
        }
        if !matches!(self.algo, Algo::SarahAdaptive) && !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(cfg_err("eta must be finite and positive"));
        }
        if matches!(self.algo, Algo::SarahPlus | Algo::SarahPp | Algo::SarahAdaptive)
            && !(self.gamma > 0.0 && self.gamma <= 1.0)
        {
            return Err(cfg_err("gamma must lie in (0, 1]"));
        }
        match self.algo {
            Algo::SarahPp => {
                if self.t_total < 1 {
                    return Err(cfg_err("total-move budget T must be at least 1"));
                }
                if self.m > self.t_total {
                    return Err(cfg_err("inner cap m must not exceed T"));
                }
            }
            _ => {
                if self.s < 1 {
                    return Err(cfg_err("outer loop count S must be at least 1"));
                }
            }
        }
        if self.theorem_mode {
            let l = p.smoothness().l;
            match self.algo {
                Algo::Sarah => {
                    let bound = eta_max_nonconvex(l, self.m, self.b, p.n());
                    if self.eta > bound * THEOREM_SLACK {
                        return Err(cfg_err("theorem mode: eta exceeds the sanctioned bound for sarah"));
                    }
                }
                Algo::Gd => {
                    if self.eta * l > THEOREM_SLACK {
                        return Err(cfg_err("theorem mode: gd requires eta <= 1/L"));
                    }
                }
                Algo::SarahPp => {
                    if self.eta * l > self.gamma * THEOREM_SLACK {
                        return Err(cfg_err("theorem mode: sarah-pp requires eta <= gamma/L"));
                    }
                }
                Algo::SarahAdaptive => {}
                Algo::SarahPlus => {
                    return Err(cfg_err("no convergence theorem covers sarah-plus; run it in free mode"));
                }
            }
        }
        Ok(())
    }
}

/// Inner-loop state shared by all variants. `t` counts completed moves
/// within the current outer loop; `v0_norm_sq` is `‖v_0‖²` of the current
/// outer loop (the stopping tests compare against it).
#[derive(Clone, Debug, PartialEq)]
pub struct InnerLoopState {
    pub w_prev: DenseVector,
    pub w_cur: DenseVector,
    pub v: DenseVector,
    pub t: usize,
    pub v0_norm_sq: f64,
}

impl InnerLoopState {
    /// Fresh state at `w0` with a zero estimator.
    pub fn new(w0: DenseVector) -> Self {
        let d = w0.len();
        Self {
            w_prev: w0.clone(),
            w_cur: w0,
            v: DenseVector::zeros(d),
            t: 0,
            v0_norm_sq: 0.0,
        }
    }
}

/// One move: `w_prev ← w_cur`, `w_cur ← w_cur − η v`, `t += 1`.
pub fn apply_move(st: &mut InnerLoopState, eta: f64) -> Result<(), LinalgError> {
    if st.w_prev.len() != st.w_cur.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: st.w_cur.len(),
            got: st.w_prev.len(),
        });
    }
    st.w_prev
        .as_mut_slice()
        .copy_from_slice(st.w_cur.as_slice());
    st.w_cur.axpy_in_place(-eta, &st.v)?;
    st.t += 1;
    Ok(())
}

/// One estimator update: `v += (1/b) Σ_{i∈batch} [∇f_i(w_cur) − ∇f_i(w_prev)]`.
///
/// Uses the difference accumulator, so a batch whose component gradients
/// agree at both points leaves `v` bitwise unchanged.
pub fn apply_batch_update(
    p: &Problem,
    st: &mut InnerLoopState,
    batch: &[usize],
) -> Result<(), ProblemError> {
    if batch.is_empty() {
        return Err(ProblemError::Linalg(LinalgError::InvalidSparseRow(
            "batch must be nonempty",
        )));
    }
    let inv_b = 1.0 / batch.len() as f64;
    for &i in batch {
        p.add_component_grad_diff(i, &st.w_cur, &st.w_prev, inv_b, &mut st.v)?;
    }
    Ok(())
}

/// One `sarah` inner step: move with the current estimator, then update the
/// estimator on the sampled batch.
pub fn sarah_inner_step(
    p: &Problem,
    st: &mut InnerLoopState,
    eta: f64,
    batch: &[usize],
) -> Result<(), ProblemError> {
    apply_move(st, eta).map_err(ProblemError::Linalg)?;
    apply_batch_update(p, st, batch)
}

/// One checkpointed observation of the run.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// Component-gradient evaluations spent by the optimizer so far.
    pub grad_evals: u64,
    /// `grad_evals / n`, the effective number of data passes.
    pub epoch: f64,
    pub outer_s: usize,
    pub inner_t: usize,
    /// `F(w)`; present only at checkpoint rows.
    pub f_val: Option<f64>,
    /// `F(w) − F*`; present only when a reference solution was supplied.
    pub subopt: Option<f64>,
    /// `‖∇F(w)‖²`; present only at checkpoint rows.
    pub grad_norm_sq: Option<f64>,
    /// `‖v‖²` of the estimator in effect at this state.
    pub v_norm_sq: f64,
    /// η of the most recent completed move; 0 before the first move.
    pub eta_used: f64,
}

/// Full run output.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    /// Inner-loop lengths per outer loop (`sarah-pp`, `sarah-adaptive`).
    pub realized_ts: Vec<usize>,
    /// Number of outer loops entered.
    pub realized_s: usize,
    pub grad_evals: u64,
    /// True only when a full gradient was exactly zero and the run stopped.
    pub converged: bool,
    pub final_w: DenseVector,
}

/// Trace assembly: owns the records, the evaluation counter, and the
/// checkpoint cadence.
struct Recorder<'a> {
    p: &'a Problem,
    f_star: Option<f64>,
    every: usize,
    n_f: f64,
    records: Vec<TraceRecord>,
    grad_evals: u64,
    eta_last: f64,
}

impl<'a> Recorder<'a> {
    fn new(
        p: &'a Problem,
        reference: Option<&ReferenceSolution>,
        cfg: &OptimizerConfig,
    ) -> Self {
        let every = match cfg.checkpoint_every {
            Some(k) => k,
            None => core::cmp::max(1, p.n() / (2 * cfg.b)),
        };
        Self {
            p,
            f_star: reference.map(|r| r.f_star),
            every,
            n_f: p.n() as f64,
            records: Vec::new(),
            grad_evals: 0,
            eta_last: 0.0,
        }
    }

    fn budget_hit(&self, cfg: &OptimizerConfig) -> bool {
        cfg.eval_budget.is_some_and(|bud| self.grad_evals >= bud)
    }

    /// Append a row for state `(s, t)` at `w`. `grad_sq_hint` supplies
    /// `‖∇F(w)‖²` when the caller already holds it (boundaries, where the
    /// estimator IS the full gradient); `force` marks boundary/terminal rows
    /// that checkpoint regardless of cadence.
    fn push(
        &mut self,
        s: usize,
        t: usize,
        w: &DenseVector,
        v_norm_sq: f64,
        grad_sq_hint: Option<f64>,
        force: bool,
    ) -> Result<(), ProblemError> {
        let checkpoint = force || t % self.every == 0;
        let (f_val, subopt, grad_norm_sq) = if checkpoint {
            let f = self.p.objective(w)?;
            let gsq = match grad_sq_hint {
                Some(g) => g,
                None => norm_sq(&self.p.full_grad(w)?),
            };
            (Some(f), self.f_star.map(|fs| f - fs), Some(gsq))
        } else {
            (None, None, None)
        };
        self.records.push(TraceRecord {
            grad_evals: self.grad_evals,
            epoch: self.grad_evals as f64 / self.n_f,
            outer_s: s,
            inner_t: t,
            f_val,
            subopt,
            grad_norm_sq,
            v_norm_sq,
            eta_used: self.eta_last,
        });
        Ok(())
    }
}

fn init_state(p: &Problem, w0: Option<&DenseVector>) -> Result<InnerLoopState, OptimizerError> {
    let w = match w0 {
        Some(w) => {
            if w.len() != p.d() {
                return Err(OptimizerError::Problem(ProblemError::Linalg(
                    LinalgError::DimensionMismatch {
                        expected: p.d(),
                        got: w.len(),
                    },
                )));
            }
            w.clone()
        }
        None => DenseVector::zeros(p.d()),
    };
    Ok(InnerLoopState::new(w))
}

/// Emit the start-point row `(0, 0)` with zero evaluations spent. Its
/// `v_norm_sq` reports `‖∇F(w0)‖²`, the estimator a boundary refresh at
/// this point would install.
fn push_initial(rec: &mut Recorder<'_>, st: &InnerLoopState) -> Result<(), ProblemError> {
    let g0sq = norm_sq(&rec.p.full_grad(&st.w_cur)?);
    rec.push(0, 0, &st.w_cur, g0sq, Some(g0sq), true)
}

/// Boundary refresh: install the full gradient as the estimator and emit
/// the `(s, 0)` row. Returns `‖v_0‖²`.
fn refresh_full_grad(
    rec: &mut Recorder<'_>,
    st: &mut InnerLoopState,
    s: usize,
    push_row: bool,
) -> Result<f64, ProblemError> {
    st.v = rec.p.full_grad(&st.w_cur)?;
    rec.grad_evals += rec.p.n() as u64;
    st.t = 0;
    st.v0_norm_sq = norm_sq(&st.v);
    if push_row {
        rec.push(s, 0, &st.w_cur, st.v0_norm_sq, Some(st.v0_norm_sq), true)?;
    }
    Ok(st.v0_norm_sq)
}

fn assemble(
    mut rec: Recorder<'_>,
    st: InnerLoopState,
    s_last: usize,
    realized_ts: Vec<usize>,
    realized_s: usize,
    converged: bool,
) -> Result<RunTrace, OptimizerError> {
    if st.t > 0 {
        rec.push(s_last, st.t, &st.w_cur, norm_sq(&st.v), None, true)?;
    }
    Ok(RunTrace {
        records: rec.records,
        realized_ts,
        realized_s,
        grad_evals: rec.grad_evals,
        converged,
        final_w: st.w_cur,
    })
}

/// Shared body of `sarah` and `gd`: `s_max` outer loops of a fixed-length
/// inner loop (`m` sampled steps framed by a deterministic first move at
/// `m = 0` semantics: every outer loop ends with a move using the current
/// estimator, so `m = 0` is exactly a full-gradient step).
fn sarah_like(
    p: &Problem,
    cfg: &OptimizerConfig,
    reference: Option<&ReferenceSolution>,
    w0: Option<&DenseVector>,
) -> Result<RunTrace, OptimizerError> {
    let n = p.n();
    let mut rng = CounterRng::new(cfg.seed);
    let mut rec = Recorder::new(p, reference, cfg);
    let mut st = init_state(p, w0)?;
    push_initial(&mut rec, &st)?;
    let mut converged = false;
    let mut s_last = 0;
    for s in 1..=cfg.s {
        if rec.budget_hit(cfg) {
            break;
        }
        s_last = s;
        let v0sq = refresh_full_grad(&mut rec, &mut st, s, true)?;
        if v0sq == 0.0 {
            converged = true;
            break;
        }
        let mut cut = false;
        for _ in 0..cfg.m {
            if rec.budget_hit(cfg) {
                cut = true;
                break;
            }
            let batch = rng.sample_without_replacement(n, cfg.b);
            sarah_inner_step(p, &mut st, cfg.eta, &batch)?;
            rec.grad_evals += 2 * cfg.b as u64;
            rec.eta_last = cfg.eta;
            rec.push(s, st.t, &st.w_cur, norm_sq(&st.v), None, false)?;
        }
        apply_move(&mut st, cfg.eta)?;
        rec.eta_last = cfg.eta;
        if cut {
            break;
        }
    }
    let realized_s = s_last;
    assemble(rec, st, s_last, Vec::new(), realized_s, converged)
}

/// Fixed inner length `m`, `S` outer loops, restart from the last iterate.
pub fn run_sarah(
    p: &Problem,
    cfg: &OptimizerConfig,
    reference: Option<&ReferenceSolution>,
    w0: Option<&DenseVector>,
) -> Result<RunTrace, OptimizerError> {
    if cfg.algo != Algo::Sarah {
        return Err(cfg_err("run_sarah requires algo == sarah"));
    }
    cfg.validate(p)?;
    sarah_like(p, cfg, reference, w0)
}

/// Full gradient descent: `steps` iterations of `w ← w − η ∇F(w)`.
/// Shares the `sarah` code path with `m = 0`, so iterates are bitwise
/// identical to `run_sarah` at equal η and step count. `steps = 0` yields
/// a trace with only the start-point row.
pub fn run_gd(
    p: &Problem,
    eta: f64,
    steps: usize,
    reference: Option<&ReferenceSolution>,
    w0: Option<&DenseVector>,
) -> Result<RunTrace, OptimizerError> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(cfg_err("eta must be finite and positive"));
    }
    let cfg = OptimizerConfig {
        algo: Algo::Gd,
        eta,
        m: 0,
        s: steps,
        ..OptimizerConfig::default()
    };
    sarah_like(p, &cfg, reference, w0)
}

/// Early-exit variant: the inner loop keeps sampling while
/// `‖v_{t−1}‖² > γ‖v_0‖²` (strict) and `t ≤ m`; the first move is
/// unconditional and the restart point is the most recently produced
/// iterate.
pub fn run_sarah_plus(
    p: &Problem,
    cfg: &OptimizerConfig,
    reference: Option<&ReferenceSolution>,
    w0: Option<&DenseVector>,
) -> Result<RunTrace, OptimizerError> {
    if cfg.algo != Algo::SarahPlus {
        return Err(cfg_err("run_sarah_plus requires algo == sarah-plus"));
    }
    cfg.validate(p)?;
    let n = p.n();
    let mut rng = CounterRng::new(cfg.seed);
    let mut rec = Recorder::new(p, reference, cfg);
    let mut st = init_state(p, w0)?;
    push_initial(&mut rec, &st)?;
    let mut converged = false;
    let mut s_last = 0;
    'outer: for s in 1..=cfg.s {
        if rec.budget_hit(cfg) {
            break;
        }
        s_last = s;
        let v0sq = refresh_full_grad(&mut rec, &mut st, s, true)?;
        if v0sq == 0.0 {
            converged = true;
            break;
        }
        apply_move(&mut st, cfg.eta)?;
        rec.eta_last = cfg.eta;
        while st.t <= cfg.m && norm_sq(&st.v) > cfg.gamma * st.v0_norm_sq {
            if rec.budget_hit(cfg) {
                break 'outer;
            }
            let batch = rng.sample_without_replacement(n, cfg.b);
            apply_batch_update(p, &mut st, &batch)?;
            rec.grad_evals += 2 * cfg.b as u64;
            rec.push(s, st.t, &st.w_cur, norm_sq(&st.v), None, false)?;
            apply_move(&mut st, cfg.eta)?;
            rec.eta_last = cfg.eta;
        }
    }
    let realized_s = s_last;
    assemble(rec, st, s_last, Vec::new(), realized_s, converged)
}

/// Inner loop of the `sarah-pp` and `sarah-adaptive` variants. Emits a row
/// for every pre-move state, moves, and (when `m != 0`) samples the next
/// estimator, including the trailing sample consumed by the failing test.
/// `eta_of` maps `(‖v_t‖², ‖v_0‖²)` to the step size. Returns true when
/// the evaluation budget cut the loop short.
fn pp_inner_loop(
    p: &Problem,
    cfg: &OptimizerConfig,
    rec: &mut Recorder<'_>,
    st: &mut InnerLoopState,
    rng: &mut CounterRng,
    s: usize,
    eta_of: impl Fn(f64, f64) -> f64,
) -> Result<bool, OptimizerError> {
    let n = p.n();
    loop {
        let vsq = norm_sq(&st.v);
        if !(st.t <= cfg.m && vsq >= cfg.gamma * st.v0_norm_sq) {
            return Ok(false);
        }
        if rec.budget_hit(cfg) {
            return Ok(true);
        }
        let hint = if st.t == 0 { Some(vsq) } else { None };
        rec.push(s, st.t, &st.w_cur, vsq, hint, st.t == 0)?;
        let eta_t = eta_of(vsq, st.v0_norm_sq);
        apply_move(st, eta_t)?;
        rec.eta_last = eta_t;
        if cfg.m != 0 {
            let batch = rng.sample_without_replacement(n, cfg.b);
            apply_batch_update(p, st, &batch)?;
            rec.grad_evals += 2 * cfg.b as u64;
        }
    }
}

/// Budgeted variant: outer loops run until their inner-loop lengths sum to
/// at least `T`; each inner loop moves while `‖v_t‖² ≥ γ‖v_0‖²` and
/// `t ≤ m`. With `m = 0` every inner loop is a single full-gradient step
/// and the run is bitwise identical to `gd` for `T` steps.
pub fn run_sarah_pp(
    p: &Problem,
    cfg: &OptimizerConfig,
    reference: Option<&ReferenceSolution>,
    w0: Option<&DenseVector>,
) -> Result<RunTrace, OptimizerError> {
    if cfg.algo != Algo::SarahPp {
        return Err(cfg_err("run_sarah_pp requires algo == sarah-pp"));
    }
    cfg.validate(p)?;
    let mut rng = CounterRng::new(cfg.seed);
    let mut rec = Recorder::new(p, reference, cfg);
    let mut st = init_state(p, w0)?;
    push_initial(&mut rec, &st)?;
    let mut realized_ts = Vec::new();
    let mut moves_total = 0usize;
    let mut s = 0;
    let mut converged = false;
    while moves_total < cfg.t_total {
        if rec.budget_hit(cfg) {
            break;
        }
        s += 1;
        let v0sq = refresh_full_grad(&mut rec, &mut st, s, false)?;
        if v0sq == 0.0 {
            rec.push(s, 0, &st.w_cur, 0.0, Some(0.0), true)?;
            converged = true;
            break;
        }
        let eta = cfg.eta;
        let cut = pp_inner_loop(p, cfg, &mut rec, &mut st, &mut rng, s, |_, _| eta)?;
        realized_ts.push(st.t);
        moves_total += st.t;
        if cut {
            break;
        }
    }
    assemble(rec, st, s, realized_ts, s, converged)
}

/// Self-tuning variant: the `sarah-pp` inner loop with `S` outer loops and
/// a per-move step size `η_t = (1/L) ‖v_t‖²/‖v_0‖²`, so the first move of
/// every outer loop uses exactly `1/L`.
pub fn run_sarah_adaptive(
    p: &Problem,
    cfg: &OptimizerConfig,
    reference: Option<&ReferenceSolution>,
    w0: Option<&DenseVector>,
) -> Result<RunTrace, OptimizerError> {
    if cfg.algo != Algo::SarahAdaptive {
        return Err(cfg_err("run_sarah_adaptive requires algo == sarah-adaptive"));
    }
    cfg.validate(p)?;
    let inv_l = 1.0 / p.smoothness().l;
    if !(inv_l.is_finite() && inv_l > 0.0) {
        return Err(cfg_err("sarah-adaptive requires a positive finite smoothness constant"));
    }
    let mut rng = CounterRng::new(cfg.seed);
    let mut rec = Recorder::new(p, reference, cfg);
    let mut st = init_state(p, w0)?;
    push_initial(&mut rec, &st)?;
    let mut realized_ts = Vec::new();
    let mut s_last = 0;
    let mut converged = false;
    for s in 1..=cfg.s {
        if rec.budget_hit(cfg) {
            break;
        }
        s_last = s;
        let v0sq = refresh_full_grad(&mut rec, &mut st, s, false)?;
        if v0sq == 0.0 {
            rec.push(s, 0, &st.w_cur, 0.0, Some(0.0), true)?;
            converged = true;
            break;
        }
        let cut = pp_inner_loop(p, cfg, &mut rec, &mut st, &mut rng, s, |vsq, v0| {
            inv_l * (vsq / v0)
        })?;
        realized_ts.push(st.t);
        if cut {
            break;
        }
    }
    assemble(rec, st, s_last, realized_ts, s_last, converged)
}

/// Dispatch on `cfg.algo`. For `gd`, `cfg.s` is the step count.
pub fn run(
    p: &Problem,
    cfg: &OptimizerConfig,
    reference: Option<&ReferenceSolution>,
    w0: Option<&DenseVector>,
) -> Result<RunTrace, OptimizerError> {
    match cfg.algo {
        Algo::Sarah => run_sarah(p, cfg, reference, w0),
        Algo::SarahPlus => run_sarah_plus(p, cfg, reference, w0),
        Algo::SarahPp => run_sarah_pp(p, cfg, reference, w0),
        Algo::SarahAdaptive => run_sarah_adaptive(p, cfg, reference, w0),
        Algo::Gd => {
            cfg.validate(p)?;
            let mut inner = cfg.clone();
            inner.m = 0;
            sarah_like(p, &inner, reference, w0)
        }
    }
}

/// Largest sanctioned step size for `sarah` at inner length `m` and batch
/// size `b` on `n` components:
/// `2 / (L (√(1 + 4(m/b)·(n−b)/(n−1)) + 1))`, with the variance factor
/// `(n−b)/(n−1)` defined as 0 when `b == n` or `n == 1`. At `m = 0` or
/// `b = n` this is exactly `1/L`.
pub fn eta_max_nonconvex(l: f64, m: usize, b: usize, n: usize) -> f64 {
    let factor = if b == n || n == 1 {
        0.0
    } else {
        (n - b) as f64 / (n - 1) as f64
    };
    let ratio = (m as f64 / b as f64) * factor;
    2.0 / (l * (libm::sqrt(1.0 + 4.0 * ratio) + 1.0))
}

/// A full run plan: inner length, batch size, step size, outer count, and
/// the total component-gradient evaluations it will spend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityPlan {
    pub m: usize,
    pub b: usize,
    pub eta: f64,
    pub s: usize,
    pub total_evals: u64,
}

/// Plan a `sarah` run that drives the average `‖∇F‖²` over all visited
/// states below `eps`, from the smoothness constant and an upper bound
/// `delta_f` on `F(w_0) − F*`.
///
/// Without a batch size: `m = n`, `η = 2/(3L√(m+1))`,
/// `S = ceil(3L·delta_f / (√(m+1)·eps))`. With one: `m = round(n/b)`,
/// η from [`eta_max_nonconvex`], `S = ceil(2·delta_f / (η(m+1)·eps))`.
/// Counts are rounded up and clamped to at least 1 so the plan dominates
/// the bound it is derived from.
pub fn plan_complexity(
    n: usize,
    eps: f64,
    l: f64,
    delta_f: f64,
    b: Option<usize>,
) -> Result<ComplexityPlan, OptimizerError> {
    if n == 0 {
        return Err(cfg_err("n must be positive"));
    }
    if !(eps > 0.0 && l > 0.0 && delta_f > 0.0) || !(eps.is_finite() && l.is_finite() && delta_f.is_finite()) {
        return Err(cfg_err("eps, L, and delta_f must be finite and positive"));
    }
    let (m, b, eta, s_real) = match b {
        None => {
            let m = n;
            let root = libm::sqrt((m + 1) as f64);
            let eta = 2.0 / (3.0 * l * root);
            (m, 1, eta, 3.0 * l * delta_f / (root * eps))
        }
        Some(b) => {
            if b < 1 || b > n {
                return Err(cfg_err("batch size b must satisfy 1 <= b <= n"));
            }
            let m = libm::round(n as f64 / b as f64) as usize;
            let m = m.max(1);
            let eta = eta_max_nonconvex(l, m, b, n);
            (m, b, eta, 2.0 * delta_f / (eta * (m + 1) as f64 * eps))
        }
    };
    let s = (libm::ceil(s_real) as u64).max(1);
    let per_outer = n as u64 + 2 * (b as u64) * (m as u64);
    Ok(ComplexityPlan {
        m,
        b,
        eta,
        s: s.min(usize::MAX as u64) as usize,
        total_evals: s.saturating_mul(per_outer),
    })
}

/// Convexity class selector for [`iteration_budget_convex`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvexKind {
    General,
    Strongly,
}

/// Total-move budget `T` that brings the `sarah-pp` guarantees below
/// `eps`: `ceil(2·delta_f/(η·eps))` for general convex problems,
/// `ceil(log(delta_f/eps)/(−log(1−μη)))` for strongly convex ones.
/// Clamped to at least 1; `μη ≥ 1` is rejected as degenerate.
pub fn iteration_budget_convex(
    kind: ConvexKind,
    eps: f64,
    eta: f64,
    delta_f: f64,
    mu: Option<f64>,
) -> Result<u64, OptimizerError> {
    if !(eps > 0.0 && eta > 0.0 && delta_f > 0.0)
        || !(eps.is_finite() && eta.is_finite() && delta_f.is_finite())
    {
        return Err(cfg_err("eps, eta, and delta_f must be finite and positive"));
    }
    let t = match kind {
        ConvexKind::General => libm::ceil(2.0 * delta_f / (eta * eps)),
        ConvexKind::Strongly => {
            let mu = mu.ok_or_else(|| cfg_err("strongly convex budget requires mu"))?;
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(cfg_err("mu must be finite and positive"));
            }
            let rate = mu * eta;
            if rate >= 1.0 {
                return Err(cfg_err("mu * eta must be below 1 for the linear-rate budget"));
            }
            let ratio = delta_f / eps;
            if ratio <= 1.0 {
                0.0
            } else {
                libm::ceil(libm::log(ratio) / -libm::log1p(-rate))
            }
        }
    };
    Ok((t as u64).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_ridge, Dataset};
    use crate::linalg::SparseRow;
    use crate::problems::ProblemKind;
    use alloc::vec;
    use proptest::prelude::*;

    fn dv(values: &[f64]) -> DenseVector {
        DenseVector::from_vec(values.to_vec()).unwrap()
    }

    fn ridge_1d(xs: &[f64], ys: &[f64], lambda: f64) -> Problem {
        let rows = xs
            .iter()
            .map(|&x| SparseRow::from_dense(&[x]).unwrap())
            .collect();
        let ds = Dataset::new(rows, ys.to_vec(), 1).unwrap();
        Problem::new(ds, ProblemKind::Ridge, lambda).unwrap()
    }

    fn ridge_synth(n: usize, d: usize, seed: u64, lambda: f64) -> Problem {
        Problem::new(synth_ridge(n, d, seed), ProblemKind::Ridge, lambda).unwrap()
    }

    #[test]
    fn inner_step_hand_trace() {
        // Two quadratics with mean gradient 1.5w; eta = 0.1 from w = 1.
        let p = ridge_1d(&[1.0, core::f64::consts::SQRT_2], &[0.0, 0.0], 0.0);
        let mut st = InnerLoopState::new(dv(&[1.0]));
        st.v = p.full_grad(&st.w_cur).unwrap();
        assert!((st.v.as_slice()[0] - 1.5).abs() < 1e-12);
        sarah_inner_step(&p, &mut st, 0.1, &[0]).unwrap();
        assert_eq!(st.w_prev.as_slice(), &[1.0]);
        assert!((st.w_cur.as_slice()[0] - 0.85).abs() < 1e-12);
        assert!((st.v.as_slice()[0] - 1.35).abs() < 1e-12);
        assert_eq!(st.t, 1);
        apply_move(&mut st, 0.1).unwrap();
        assert!((st.w_cur.as_slice()[0] - 0.715).abs() < 1e-12);
        assert_eq!(st.t, 2);
    }

    #[test]
    fn identical_gradients_leave_estimator_unchanged() {
        // w_prev == w_cur makes every batch difference exactly zero.
        let p = ridge_synth(6, 3, 11, 0.4);
        let mut st = InnerLoopState::new(dv(&[0.3, -0.8, 1.2]));
        st.v = dv(&[0.5, -0.25, 0.125]);
        let before = st.v.clone();
        apply_batch_update(&p, &mut st, &[0, 2, 5]).unwrap();
        assert_eq!(st.v, before);
    }

    #[test]
    fn full_batch_update_tracks_full_gradient() {
        let p = ridge_synth(9, 3, 3, 0.2);
        let all: Vec<usize> = (0..9).collect();
        let mut st = InnerLoopState::new(dv(&[1.0, -0.4, 0.6]));
        st.v = p.full_grad(&st.w_cur).unwrap();
        for _ in 0..5 {
            sarah_inner_step(&p, &mut st, 0.05, &all).unwrap();
            let g = p.full_grad(&st.w_cur).unwrap();
            for (a, b) in st.v.as_slice().iter().zip(g.as_slice()) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn conditional_difference_unbiasedness() {
        // Averaging v_new − v_old over all single-sample draws gives
        // the full-gradient difference, even though v itself is biased.
        let p = ridge_synth(8, 3, 17, 0.3);
        let base = {
            let mut st = InnerLoopState::new(dv(&[0.9, -0.2, 0.4]));
            st.w_prev = dv(&[0.1, 0.7, -0.5]);
            st.v = dv(&[0.2, 0.1, -0.3]);
            st
        };
        let mut mean = DenseVector::zeros(3);
        for i in 0..8 {
            let mut st = base.clone();
            apply_batch_update(&p, &mut st, &[i]).unwrap();
            let delta = crate::linalg::sub(&st.v, &base.v).unwrap();
            mean.axpy_in_place(1.0 / 8.0, &delta).unwrap();
        }
        let want = crate::linalg::sub(
            &p.full_grad(&base.w_cur).unwrap(),
            &p.full_grad(&base.w_prev).unwrap(),
        )
        .unwrap();
        for (a, b) in mean.as_slice().iter().zip(want.as_slice()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn run_matches_manual_replay() {
        let p = ridge_1d(&[1.0, 1.4], &[1.0, -0.5], 0.1);
        let cfg = OptimizerConfig {
            algo: Algo::Sarah,
            eta: 0.05,
            m: 2,
            s: 2,
            seed: 123,
            ..OptimizerConfig::default()
        };
        let tr = run_sarah(&p, &cfg, None, None).unwrap();

        let mut rng = CounterRng::new(123);
        let mut w_prev = vec![0.0];
        let mut w_cur = vec![0.0];
        let mut v = vec![0.0];
        for _ in 0..2 {
            v = p.full_grad(&dv(&w_cur)).unwrap().as_slice().to_vec();
            for _ in 0..2 {
                let batch = rng.sample_without_replacement(2, 1);
                w_prev = w_cur.clone();
                w_cur[0] += -0.05 * v[0];
                let mut vd = dv(&v);
                p.add_component_grad_diff(batch[0], &dv(&w_cur), &dv(&w_prev), 1.0, &mut vd)
                    .unwrap();
                v = vd.as_slice().to_vec();
            }
            w_cur[0] += -0.05 * v[0];
        }
        assert_eq!(tr.final_w.as_slice(), &w_cur[..]);
        assert_eq!(tr.grad_evals, 2 * (2 + 2 * 2));
        assert!(!tr.converged);
    }

    #[test]
    fn accounting_and_record_shape() {
        let p = ridge_synth(10, 3, 5, 0.2);
        let cfg = OptimizerConfig {
            algo: Algo::Sarah,
            eta: 0.02,
            m: 4,
            s: 3,
            b: 2,
            seed: 7,
            checkpoint_every: Some(1),
            ..OptimizerConfig::default()
        };
        let tr = run_sarah(&p, &cfg, None, None).unwrap();
        assert_eq!(tr.grad_evals, 3 * (10 + 2 * 2 * 4));
        // initial + S·(m+1) pre-move rows + terminal
        assert_eq!(tr.records.len(), 1 + 3 * 5 + 1);
        let mut prev = 0;
        for r in &tr.records {
            assert!(r.grad_evals >= prev);
            prev = r.grad_evals;
            assert_eq!(r.epoch, r.grad_evals as f64 / 10.0);
            assert!(r.f_val.is_some() && r.grad_norm_sq.is_some());
            assert!(r.subopt.is_none());
        }
        let last = tr.records.last().unwrap();
        assert_eq!((last.outer_s, last.inner_t), (3, 5));
    }

    #[test]
    fn checkpoint_cadence_defaults_to_half_epoch() {
        let p = ridge_synth(20, 2, 9, 0.1);
        let cfg = OptimizerConfig {
            algo: Algo::Sarah,
            eta: 0.01,
            m: 12,
            s: 1,
            seed: 1,
            ..OptimizerConfig::default()
        };
        let tr = run_sarah(&p, &cfg, None, None).unwrap();
        for r in &tr.records {
            let expect = r.inner_t % 10 == 0 || r.inner_t == 13;
            assert_eq!(r.f_val.is_some(), expect, "t={}", r.inner_t);
            assert_eq!(r.grad_norm_sq.is_some(), expect);
        }
    }

    #[test]
    fn seeded_determinism() {
        let p = ridge_synth(12, 4, 2, 0.05);
        for algo in [Algo::Sarah, Algo::SarahPlus, Algo::SarahPp, Algo::SarahAdaptive] {
            let cfg = OptimizerConfig {
                algo,
                eta: 0.05,
                m: 6,
                s: 3,
                b: 3,
                gamma: 0.125,
                t_total: 15,
                seed: 42,
                ..OptimizerConfig::default()
            };
            let a = run(&p, &cfg, None, None).unwrap();
            let b = run(&p, &cfg, None, None).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn gd_equivalences_bit_identical() {
        let p = ridge_synth(10, 3, 8, 0.3);
        let eta = 0.4 / p.smoothness().l;
        let sarah_cfg = OptimizerConfig {
            algo: Algo::Sarah,
            eta,
            m: 0,
            s: 5,
            seed: 9,
            ..OptimizerConfig::default()
        };
        let pp_cfg = OptimizerConfig {
            algo: Algo::SarahPp,
            eta,
            m: 0,
            gamma: 0.5,
            t_total: 5,
            seed: 9,
            ..OptimizerConfig::default()
        };
        let a = run_sarah(&p, &sarah_cfg, None, None).unwrap();
        let b = run_sarah_pp(&p, &pp_cfg, None, None).unwrap();
        let c = run_gd(&p, eta, 5, None, None).unwrap();
        assert_eq!(a.final_w, b.final_w);
        assert_eq!(a.final_w, c.final_w);
        assert_eq!(a.records, b.records);
        assert_eq!(a.records, c.records);
        assert_eq!(b.realized_ts, vec![1; 5]);
    }

    #[test]
    fn gd_one_step_minimizes_quadratic() {
        // F(w) = ½Lw² with L = 4: one step at 1/L lands on the minimizer.
        let p = ridge_1d(&[2.0], &[0.0], 0.0);
        assert_eq!(p.smoothness().l, 4.0);
        let tr = run_gd(&p, 0.25, 1, None, Some(&dv(&[3.7]))).unwrap();
        assert_eq!(tr.final_w.as_slice(), &[0.0]);

        let empty = run_gd(&p, 0.25, 0, None, Some(&dv(&[3.7]))).unwrap();
        assert_eq!(empty.records.len(), 1);
        assert_eq!(empty.final_w.as_slice(), &[3.7]);
    }

    #[test]
    fn converged_at_stationary_start() {
        let p = ridge_1d(&[1.0], &[0.0], 0.0);
        for algo in [Algo::Sarah, Algo::SarahPlus, Algo::SarahPp, Algo::SarahAdaptive] {
            let cfg = OptimizerConfig {
                algo,
                eta: 0.1,
                m: 3,
                s: 4,
                t_total: 10,
                seed: 0,
                ..OptimizerConfig::default()
            };
            let tr = run(&p, &cfg, None, None).unwrap();
            assert!(tr.converged, "{algo}");
            assert_eq!(tr.records.len(), 2, "{algo}");
            assert_eq!(tr.grad_evals, 1, "{algo}");
            assert_eq!(tr.final_w.as_slice(), &[0.0]);
        }
    }

    #[test]
    fn plus_gamma_one_does_single_update() {
        let p = ridge_synth(8, 2, 14, 0.2);
        let cfg = OptimizerConfig {
            algo: Algo::SarahPlus,
            eta: 0.05,
            m: 10,
            s: 1,
            gamma: 1.0,
            seed: 3,
            ..OptimizerConfig::default()
        };
        let tr = run_sarah_plus(&p, &cfg, None, None).unwrap();
        // Full gradient only; the strict test fails at once, so no samples.
        assert_eq!(tr.grad_evals, 8);
        let gd = run_gd(&p, 0.05, 1, None, None).unwrap();
        assert_eq!(tr.final_w, gd.final_w);
    }

    #[test]
    fn pp_stopping_bookkeeping() {
        let p = ridge_synth(12, 3, 6, 0.1);
        let l = p.smoothness().l;
        let cfg = OptimizerConfig {
            algo: Algo::SarahPp,
            eta: 0.125 / l,
            m: 10,
            gamma: 0.125,
            t_total: 25,
            seed: 21,
            ..OptimizerConfig::default()
        };
        let tr = run_sarah_pp(&p, &cfg, None, None).unwrap();
        assert_eq!(tr.realized_ts.len(), tr.realized_s);
        let total: usize = tr.realized_ts.iter().sum();
        assert!(total >= 25);
        assert!(total - tr.realized_ts.last().unwrap() < 25);
        for &ts in &tr.realized_ts {
            assert!((1..=11).contains(&ts));
        }
        let evals: u64 = tr.realized_ts.iter().map(|&ts| 12 + 2 * ts as u64).sum();
        assert_eq!(tr.grad_evals, evals);
    }

    #[test]
    fn adaptive_first_move_uses_inv_l() {
        let p = ridge_synth(10, 3, 4, 0.3);
        let inv_l = 1.0 / p.smoothness().l;
        let cfg = OptimizerConfig {
            algo: Algo::SarahAdaptive,
            eta: -1.0, // ignored by this variant
            m: 8,
            s: 3,
            gamma: 0.01,
            seed: 5,
            checkpoint_every: Some(1),
            ..OptimizerConfig::default()
        };
        let tr = run_sarah_adaptive(&p, &cfg, None, None).unwrap();
        assert!(!tr.realized_ts.is_empty());
        let first_inner = tr
            .records
            .iter()
            .find(|r| r.outer_s == 1 && r.inner_t == 1)
            .expect("inner loop took at least two moves");
        assert_eq!(first_inner.eta_used, inv_l);
        // Convex problem: realized step sizes never exceed 1/L.
        for r in &tr.records {
            assert!(r.eta_used <= inv_l + 1e-12);
        }
    }

    #[test]
    fn budget_truncates_mid_inner_loop() {
        let p = ridge_synth(10, 2, 1, 0.1);
        let cfg = OptimizerConfig {
            algo: Algo::Sarah,
            eta: 0.01,
            m: 5,
            s: 100,
            seed: 8,
            eval_budget: Some(35),
            ..OptimizerConfig::default()
        };
        let tr = run_sarah(&p, &cfg, None, None).unwrap();
        assert_eq!(tr.grad_evals, 36);
        assert_eq!(tr.realized_s, 2);
        let last = tr.records.last().unwrap();
        assert_eq!((last.outer_s, last.inner_t), (2, 4));
    }

    #[test]
    fn w0_is_respected() {
        let p = ridge_synth(6, 2, 12, 0.2);
        let w0 = dv(&[0.5, -1.0]);
        let cfg = OptimizerConfig {
            algo: Algo::Sarah,
            eta: 0.01,
            m: 2,
            s: 1,
            seed: 2,
            ..OptimizerConfig::default()
        };
        let tr = run_sarah(&p, &cfg, None, Some(&w0)).unwrap();
        assert_eq!(tr.records[0].f_val.unwrap(), p.objective(&w0).unwrap());
        assert!(run_sarah(&p, &cfg, None, Some(&dv(&[1.0]))).is_err());
    }

    #[test]
    fn reference_enables_subopt() {
        let p = ridge_1d(&[1.0], &[2.0], 0.0);
        // Minimizer w* = 2, F* = 0.
        let reference = ReferenceSolution {
            w_star: dv(&[2.0]),
            f_star: 0.0,
            grad_norm_sq: 0.0,
            iterations: 1,
            tol: 1e-15,
        };
        let tr = run_gd(&p, 0.5, 3, Some(&reference), None).unwrap();
        for r in &tr.records {
            assert_eq!(r.subopt, r.f_val);
        }
    }

    #[test]
    fn validation_rejections() {
        let p = ridge_synth(5, 2, 3, 0.1);
        let base = OptimizerConfig {
            algo: Algo::Sarah,
            eta: 0.1,
            m: 2,
            s: 1,
            ..OptimizerConfig::default()
        };
        let bad = |f: &dyn Fn(&mut OptimizerConfig)| {
            let mut c = base.clone();
            f(&mut c);
            c.validate(&p).unwrap_err()
        };
        bad(&|c| c.b = 0);
        bad(&|c| c.b = 6);
        bad(&|c| c.eta = 0.0);
        bad(&|c| c.eta = f64::NAN);
        bad(&|c| c.s = 0);
        bad(&|c| c.checkpoint_every = Some(0));
        bad(&|c| {
            c.algo = Algo::SarahPlus;
            c.gamma = 0.0;
        });
        bad(&|c| {
            c.algo = Algo::SarahPp;
            c.gamma = 1.5;
            c.t_total = 10;
        });
        bad(&|c| {
            c.algo = Algo::SarahPp;
            c.t_total = 0;
        });
        bad(&|c| {
            c.algo = Algo::SarahPp;
            c.m = 11;
            c.t_total = 10;
        });
        bad(&|c| {
            c.algo = Algo::SarahPlus;
            c.theorem_mode = true;
        });
        // Adaptive ignores eta entirely.
        let mut c = base.clone();
        c.algo = Algo::SarahAdaptive;
        c.eta = -3.0;
        c.validate(&p).unwrap();
    }

    #[test]
    fn theorem_mode_boundaries() {
        let p = ridge_synth(20, 3, 19, 0.2);
        let l = p.smoothness().l;
        let mut cfg = OptimizerConfig {
            algo: Algo::Sarah,
            eta: eta_max_nonconvex(l, 8, 2, 20),
            m: 8,
            b: 2,
            s: 1,
            theorem_mode: true,
            ..OptimizerConfig::default()
        };
        cfg.validate(&p).unwrap();
        cfg.eta *= 1.01;
        assert!(cfg.validate(&p).is_err());

        // gamma chosen as exactly L·eta sits on the sarah-pp boundary.
        let eta = 0.07 / l;
        let pp = OptimizerConfig {
            algo: Algo::SarahPp,
            eta,
            gamma: l * eta,
            m: 4,
            t_total: 10,
            theorem_mode: true,
            ..OptimizerConfig::default()
        };
        pp.validate(&p).unwrap();
        let mut worse = pp.clone();
        worse.eta *= 1.5;
        assert!(worse.validate(&p).is_err());

        let gd = OptimizerConfig {
            algo: Algo::Gd,
            eta: 1.0 / l,
            s: 3,
            theorem_mode: true,
            ..OptimizerConfig::default()
        };
        gd.validate(&p).unwrap();
        let mut fast = gd.clone();
        fast.eta = 1.2 / l;
        assert!(fast.validate(&p).is_err());
    }

    #[test]
    fn eta_max_checkpoints() {
        for l in [0.3, 1.0, 1.9, 7.0, 1e-3] {
            assert_eq!(eta_max_nonconvex(l, 0, 1, 50), 1.0 / l);
            assert_eq!(eta_max_nonconvex(l, 9, 50, 50), 1.0 / l);
        }
        assert_eq!(eta_max_nonconvex(2.0, 2, 1, 1_000_000), 0.25);
        // b = 1 pins the variance factor at exactly 1 for every n.
        assert_eq!(eta_max_nonconvex(2.0, 2, 1, 7), 0.25);
        let mut last = f64::INFINITY;
        for m in [0, 1, 5, 20, 100] {
            let e = eta_max_nonconvex(1.0, m, 1, 1000);
            assert!(e > 0.0 && e < last);
            last = e;
        }
        let mut lastb = 0.0;
        for b in [1, 5, 50, 500, 1000] {
            let e = eta_max_nonconvex(1.0, 100, b, 1000);
            assert!(e >= lastb);
            lastb = e;
        }
    }

    #[test]
    fn plan_single_batch_closed_form() {
        let plan = plan_complexity(100, 1e-3, 1.0, 1.0, None).unwrap();
        assert_eq!(plan.m, 100);
        assert_eq!(plan.b, 1);
        assert_eq!(plan.s, 299);
        assert_eq!(plan.total_evals, 299 * 300);
        assert!((plan.eta - 2.0 / (3.0 * libm::sqrt(101.0))).abs() < 1e-16);
    }

    #[test]
    fn plan_minibatch_closed_form() {
        let plan = plan_complexity(100, 1e-3, 1.0, 1.0, Some(10)).unwrap();
        assert_eq!(plan.m, 10);
        assert_eq!(plan.b, 10);
        let eta = eta_max_nonconvex(1.0, 10, 10, 100);
        assert_eq!(plan.eta, eta);
        let want = libm::ceil(2.0 / (eta * 11.0 * 1e-3)) as usize;
        assert_eq!(plan.s, want);
        assert_eq!(plan.total_evals, plan.s as u64 * (100 + 2 * 10 * 10));
    }

    #[test]
    fn plan_doubling_scales_by_sqrt2() {
        // In the accuracy-dominated regime total work grows like √n.
        let a = plan_complexity(1_000_000, 1e-6, 1.0, 1.0, None).unwrap();
        let b = plan_complexity(2_000_000, 1e-6, 1.0, 1.0, None).unwrap();
        let ratio = b.total_evals as f64 / a.total_evals as f64;
        assert!((ratio / core::f64::consts::SQRT_2 - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn plan_huge_eps_clamps_to_one_pass() {
        let plan = plan_complexity(50, 1e9, 2.0, 1.0, None).unwrap();
        assert_eq!(plan.s, 1);
        assert_eq!(plan.total_evals, 50 + 2 * 50);
    }

    #[test]
    fn iteration_budget_closed_forms() {
        assert_eq!(
            iteration_budget_convex(ConvexKind::General, 0.5, 1.0, 1.0, None).unwrap(),
            4
        );
        assert_eq!(
            iteration_budget_convex(ConvexKind::Strongly, 0.25, 0.5, 1.0, Some(1.0)).unwrap(),
            2
        );
        assert_eq!(
            iteration_budget_convex(ConvexKind::Strongly, 1.0, 0.5, 1.0, Some(1.0)).unwrap(),
            1
        );
        assert!(iteration_budget_convex(ConvexKind::Strongly, 0.1, 1.0, 1.0, Some(1.0)).is_err());
        assert!(iteration_budget_convex(ConvexKind::Strongly, 0.1, 0.5, 1.0, None).is_err());
        assert!(iteration_budget_convex(ConvexKind::General, 0.0, 1.0, 1.0, None).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_recursion_exactness(
            seed in 0u64..1000,
            lambda in 0.0f64..1.0,
            b in 1usize..=6,
        ) {
            let p = ridge_synth(6, 3, seed, lambda);
            let mut rng = CounterRng::new(seed ^ 0xABCD);
            let rand_vec = |r: &mut CounterRng| {
                dv(&[r.next_gaussian(), r.next_gaussian(), r.next_gaussian()])
            };
            let mut st = InnerLoopState::new(rand_vec(&mut rng));
            st.w_prev = rand_vec(&mut rng);
            st.v = rand_vec(&mut rng);
            let before = st.v.clone();
            let batch = rng.sample_without_replacement(6, b);
            apply_batch_update(&p, &mut st, &batch).unwrap();
            let mut want = DenseVector::zeros(3);
            for &i in &batch {
                let gn = p.component_grad(i, &st.w_cur).unwrap();
                let go = p.component_grad(i, &st.w_prev).unwrap();
                want.axpy_in_place(1.0 / b as f64, &crate::linalg::sub(&gn, &go).unwrap()).unwrap();
            }
            for j in 0..3 {
                let got = st.v.as_slice()[j] - before.as_slice()[j];
                let expect = want.as_slice()[j];
                prop_assert!((got - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
        }

        #[test]
        fn prop_accounting_identity(
            seed in 0u64..500,
            m in 0usize..6,
            s in 1usize..4,
            b in 1usize..=8,
        ) {
            let p = ridge_synth(8, 2, 30, 0.2);
            let cfg = OptimizerConfig {
                algo: Algo::Sarah,
                eta: 0.01,
                m,
                s,
                b,
                seed,
                ..OptimizerConfig::default()
            };
            let tr = run_sarah(&p, &cfg, None, None).unwrap();
            prop_assert_eq!(tr.grad_evals, (s * (8 + 2 * b * m)) as u64);
            let again = run_sarah(&p, &cfg, None, None).unwrap();
            prop_assert_eq!(tr, again);
        }

        #[test]
        fn prop_eta_max_bounds(l in 0.1f64..10.0, m in 0usize..200, b in 1usize..=64) {
            let n = 64;
            let e = eta_max_nonconvex(l, m, b, n);
            prop_assert!(e > 0.0);
            prop_assert!(e <= (1.0 / l) * (1.0 + 1e-15));
            if m > 0 {
                prop_assert!(eta_max_nonconvex(l, m - 1, b, n) >= e);
            }
            if b < n {
                prop_assert!(eta_max_nonconvex(l, m, b + 1, n) >= e);
            }
        }
    }
}
