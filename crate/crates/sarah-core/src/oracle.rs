//! Independent verification engines for the recursion: exact expectations
//! by exhaustive sample-path enumeration on tiny instances, seeded
//! Monte-Carlo estimation at moderate scale, a gradient-descent reference
//! solver, and finite-difference gradient checks.
//!
//! The enumeration walks every equally likely batch sequence itself, using
//! only the component-gradient primitives, so it shares no trajectory code
//! with the runners in [`crate::optimizer`]; agreement between the two is
//! evidence, not tautology. Each identity or bound check produces one
//! [`CheckReport`] that renders as a line
//! `CHECK <name> <instance> <lhs> <rhs> <PASS|FAIL>`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::data::{synth_classification, synth_ridge};
use crate::fmt::g17;
use crate::linalg::{norm_sq, sub, DenseVector};
use crate::optimizer::{
    eta_max_nonconvex, run, Algo, OptimizerConfig, OptimizerError, RunTrace, THEOREM_SLACK,
};
use crate::problems::{Problem, ProblemError, ProblemKind};

/// Maximum number of equally likely sample paths an exact enumeration may
/// visit.
pub const ENUM_PATH_BUDGET: u64 = 1_000_000;

/// Maximum sampling depth of an enumeration; keeps recursion bounded even
/// on single-path instances where the path budget is no constraint.
const MAX_ENUM_DRAWS: u64 = 1024;

/// Default stopping criterion `‖∇F(w)‖² ≤ tol` for reference solves.
pub const REFERENCE_TOL_DEFAULT: f64 = 1e-15;

/// Reference-solve work cap, in component-gradient equivalents (one full
/// gradient costs `n`).
pub const REFERENCE_EVAL_CAP: u64 = 100_000_000;

/// Absolute slack granted to inequality checks; identity checks use the
/// same number relatively.
const CHECK_TOL: f64 = 1e-10;

/// Verification failure modes.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleError {
    /// The instance needs more paths (or nodes, for data-dependent
    /// stopping) than the enumeration budget allows.
    BudgetExceeded { paths: u64 },
    /// The query or config does not make sense for the requested engine.
    InvalidQuery { reason: &'static str },
    /// The check's hypotheses exclude this instance.
    Inapplicable { reason: &'static str },
    Problem(ProblemError),
    Optimizer(OptimizerError),
    Reference(ReferenceError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::BudgetExceeded { paths } => {
                write!(f, "enumeration budget exceeded: {paths} paths > {ENUM_PATH_BUDGET}")
            }
            OracleError::InvalidQuery { reason } => write!(f, "invalid query: {reason}"),
            OracleError::Inapplicable { reason } => write!(f, "check not applicable: {reason}"),
            OracleError::Problem(e) => write!(f, "problem error: {e}"),
            OracleError::Optimizer(e) => write!(f, "optimizer error: {e}"),
            OracleError::Reference(e) => write!(f, "reference solve failed: {e}"),
        }
    }
}

impl core::error::Error for OracleError {}

impl From<ProblemError> for OracleError {
    fn from(e: ProblemError) -> Self {
        OracleError::Problem(e)
    }
}

impl From<crate::linalg::LinalgError> for OracleError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        OracleError::Problem(ProblemError::from(e))
    }
}

impl From<OptimizerError> for OracleError {
    fn from(e: OptimizerError) -> Self {
        OracleError::Optimizer(e)
    }
}

impl From<ReferenceError> for OracleError {
    fn from(e: ReferenceError) -> Self {
        OracleError::Reference(e)
    }
}

/// A high-accuracy minimizer used to report suboptimality in traces and as
/// `F*` in bound checks. Invariant: `grad_norm_sq ≤ tol` on any solution
/// returned successfully.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSolution {
    pub w_star: DenseVector,
    pub f_star: f64,
    /// `‖∇F(w_star)‖²` actually achieved.
    pub grad_norm_sq: f64,
    /// Full-gradient steps taken.
    pub iterations: u64,
    /// Stopping criterion the solve was asked for.
    pub tol: f64,
}

/// Reference-solve failure modes.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceError {
    /// Only convex kinds have a well-defined global reference.
    NotConvex,
    /// Tolerance must be positive (infinity is allowed and vacuous).
    BadTolerance,
    /// Work cap hit before the criterion; carries the best iterate found
    /// so the caller can decide, never a silent approximation.
    CapReached { best: Box<ReferenceSolution> },
    Problem(ProblemError),
}

impl fmt::Display for ReferenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceError::NotConvex => {
                write!(f, "reference solves require a convex problem kind")
            }
            ReferenceError::BadTolerance => write!(f, "tolerance must be positive"),
            ReferenceError::CapReached { best } => write!(
                f,
                "work cap reached after {} iterations with grad norm sq {}",
                best.iterations,
                g17(best.grad_norm_sq)
            ),
            ReferenceError::Problem(e) => write!(f, "problem error: {e}"),
        }
    }
}

impl core::error::Error for ReferenceError {}

impl From<ProblemError> for ReferenceError {
    fn from(e: ProblemError) -> Self {
        ReferenceError::Problem(e)
    }
}

impl From<crate::linalg::LinalgError> for ReferenceError {
    fn from(e: crate::linalg::LinalgError) -> Self {
        ReferenceError::Problem(ProblemError::from(e))
    }
}

/// Quantities whose exact expectation the enumeration can evaluate at a
/// state `(s, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    /// `F(w_t)`
    FVal,
    /// `‖∇F(w_t)‖²`
    GradNormSq,
    /// `‖v_t‖²`
    VNormSq,
    /// `‖∇F(w_t) − v_t‖²`
    GradMinusVNormSq,
    /// `‖v_t − v_{t−1}‖²` (within one outer loop, so `t ≥ 1`)
    VDiffNormSq,
    /// `‖∇F(w_t) − ∇F(w_{t−1})‖²` (within one outer loop, so `t ≥ 1`)
    GradDiffNormSq,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::FVal => "f",
            Statistic::GradNormSq => "grad-norm-sq",
            Statistic::VNormSq => "v-norm-sq",
            Statistic::GradMinusVNormSq => "grad-minus-v-norm-sq",
            Statistic::VDiffNormSq => "v-diff-norm-sq",
            Statistic::GradDiffNormSq => "grad-diff-norm-sq",
        }
    }
}

/// Exact per-state means at one `(s, t)`; all six statistics at once.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StatRow {
    pub f: f64,
    pub grad_sq: f64,
    pub v_sq: f64,
    pub grad_minus_v_sq: f64,
    pub v_diff_sq: f64,
    pub grad_diff_sq: f64,
}

/// Exact expectations for a fixed-length run, indexed by outer loop
/// `s ∈ 1..=S` and inner state `t ∈ 0..=m`, plus the post-final-move
/// output of the last outer loop.
#[derive(Clone, Debug)]
pub struct EnumStats {
    m: usize,
    s_total: usize,
    rows: Vec<Vec<StatRow>>,
    /// `E[F(w_{m+1})]` of the last outer loop (the run output).
    pub final_f: f64,
    /// `E[‖∇F(w_{m+1})‖²]` of the last outer loop.
    pub final_grad_sq: f64,
    /// Number of equally likely full-length sample paths.
    pub path_count: u64,
}

impl EnumStats {
    /// The per-state means at `(s, t)`, `t ≤ m`.
    pub fn row(&self, s: usize, t: usize) -> Option<&StatRow> {
        if s == 0 || s > self.s_total || t > self.m {
            return None;
        }
        Some(&self.rows[s - 1][t])
    }

    /// One statistic at `(s, t)`. `t = m + 1` addresses the outer loop's
    /// post-final-move output and carries only `FVal` and `GradNormSq`;
    /// the difference statistics need `t ≥ 1`.
    pub fn stat(&self, statistic: Statistic, s: usize, t: usize) -> Result<f64, OracleError> {
        if s == 0 || s > self.s_total {
            return Err(OracleError::InvalidQuery { reason: "outer index s out of range" });
        }
        if t > self.m + 1 {
            return Err(OracleError::InvalidQuery { reason: "inner index t out of range" });
        }
        if t == self.m + 1 {
            return match statistic {
                // The output of outer s is the restart point of outer s+1.
                Statistic::FVal => Ok(if s < self.s_total {
                    self.rows[s][0].f
                } else {
                    self.final_f
                }),
                Statistic::GradNormSq => Ok(if s < self.s_total {
                    self.rows[s][0].grad_sq
                } else {
                    self.final_grad_sq
                }),
                _ => Err(OracleError::InvalidQuery {
                    reason: "only f and grad-norm-sq exist past the last inner state",
                }),
            };
        }
        let row = &self.rows[s - 1][t];
        match statistic {
            Statistic::FVal => Ok(row.f),
            Statistic::GradNormSq => Ok(row.grad_sq),
            Statistic::VNormSq => Ok(row.v_sq),
            Statistic::GradMinusVNormSq => Ok(row.grad_minus_v_sq),
            Statistic::VDiffNormSq | Statistic::GradDiffNormSq if t == 0 => {
                Err(OracleError::InvalidQuery {
                    reason: "difference statistics start at t = 1",
                })
            }
            Statistic::VDiffNormSq => Ok(row.v_diff_sq),
            Statistic::GradDiffNormSq => Ok(row.grad_diff_sq),
        }
    }

    /// Average of `E[‖∇F(w_t)‖²]` over the full `(m+1)·S` state grid, the
    /// left side of the sublinear rate bounds.
    pub fn average_grad_norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for outer in &self.rows {
            for row in outer {
                acc += row.grad_sq;
            }
        }
        acc / (((self.m + 1) * self.s_total) as f64)
    }
}

/// All `b`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, b: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if b == 0 || b > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..b).collect();
    loop {
        out.push(cur.clone());
        let mut i = b;
        while i > 0 && cur[i - 1] == n - b + (i - 1) {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..b {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `C(n, k)`, saturating at `u64::MAX`.
fn binomial_saturating(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Multiply-then-divide stays exact: the running value is C(n, i+1).
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// `c^draws` with the enumeration budget enforced.
fn path_budget(c: u64, draws: u64, budget: u64) -> Result<u64, OracleError> {
    if draws > MAX_ENUM_DRAWS {
        return Err(OracleError::InvalidQuery {
            reason: "enumeration depth exceeds the supported sampling depth",
        });
    }
    let mut paths: u64 = 1;
    for _ in 0..draws {
        paths = paths.saturating_mul(c);
        if paths > budget {
            return Err(OracleError::BudgetExceeded { paths });
        }
    }
    Ok(paths)
}

fn u64_pow(c: u64, k: u64) -> u64 {
    let mut acc = 1u64;
    for _ in 0..k {
        acc = acc.saturating_mul(c);
    }
    acc
}

struct SarahEnumCtx<'a> {
    p: &'a Problem,
    eta: f64,
    m: usize,
    s_total: usize,
    inv_b: f64,
    rows: Vec<Vec<StatRow>>,
    final_f: f64,
    final_grad_sq: f64,
}

fn add_sample_update(
    p: &Problem,
    inv_b: f64,
    batch: &[usize],
    w_new: &DenseVector,
    w_old: &DenseVector,
    v: &mut DenseVector,
) -> Result<(), OracleError> {
    // Literal recursion formula, one gradient at each point; deliberately
    // not the runners' fused-difference primitive.
    for &i in batch {
        p.add_component_grad(i, w_new, inv_b, v)?;
        p.add_component_grad(i, w_old, -inv_b, v)?;
    }
    Ok(())
}

fn sarah_dfs(
    ctx: &mut SarahEnumCtx<'_>,
    combos: &[Vec<usize>],
    s: usize,
    t: usize,
    w: &DenseVector,
    v: &DenseVector,
    g: &DenseVector,
) -> Result<(), OracleError> {
    if t == ctx.m {
        // Final unconditional move ends the outer loop.
        let mut w_next = w.clone();
        w_next.axpy_in_place(-ctx.eta, v)?;
        if s == ctx.s_total {
            ctx.final_f += ctx.p.objective(&w_next)?;
            ctx.final_grad_sq += norm_sq(&ctx.p.full_grad(&w_next)?);
            return Ok(());
        }
        // Restart: the estimator is reset to the exact full gradient.
        let g_next = ctx.p.full_grad(&w_next)?;
        let gsq = norm_sq(&g_next);
        let f_next = ctx.p.objective(&w_next)?;
        {
            let row = &mut ctx.rows[s][0];
            row.f += f_next;
            row.grad_sq += gsq;
            row.v_sq += gsq;
            // grad_minus_v_sq is exactly 0 at a restart; the difference
            // statistics are not defined across the boundary.
        }
        let v_next = g_next.clone();
        return sarah_dfs(ctx, combos, s + 1, 0, &w_next, &v_next, &g_next);
    }
    let mut w_next = w.clone();
    w_next.axpy_in_place(-ctx.eta, v)?;
    let f_next = ctx.p.objective(&w_next)?;
    let g_next = ctx.p.full_grad(&w_next)?;
    let gsq_next = norm_sq(&g_next);
    let gdiff = norm_sq(&sub(&g_next, g)?);
    for combo in combos {
        let mut v_next = v.clone();
        add_sample_update(ctx.p, ctx.inv_b, combo, &w_next, w, &mut v_next)?;
        {
            let row = &mut ctx.rows[s - 1][t + 1];
            row.f += f_next;
            row.grad_sq += gsq_next;
            row.v_sq += norm_sq(&v_next);
            row.grad_minus_v_sq += norm_sq(&sub(&g_next, &v_next)?);
            row.v_diff_sq += norm_sq(&sub(&v_next, v)?);
            row.grad_diff_sq += gdiff;
        }
        sarah_dfs(ctx, combos, s, t + 1, &w_next, &v_next, &g_next)?;
    }
    Ok(())
}

/// Exact expectations for the fixed-length recursion (`sarah`, or `gd` as
/// its `m = 0` case) by depth-first enumeration of every batch sequence in
/// lexicographic order. The start point defaults to the origin.
pub fn enumerate_sarah(
    p: &Problem,
    cfg: &OptimizerConfig,
    w0: Option<&DenseVector>,
) -> Result<EnumStats, OracleError> {
    enumerate_sarah_with_budget(p, cfg, w0, ENUM_PATH_BUDGET)
}

/// [`enumerate_sarah`] under a caller-supplied path budget, clamped to the
/// hard cap.
pub fn enumerate_sarah_with_budget(
    p: &Problem,
    cfg: &OptimizerConfig,
    w0: Option<&DenseVector>,
    budget: u64,
) -> Result<EnumStats, OracleError> {
    if !matches!(cfg.algo, Algo::Sarah | Algo::Gd) {
        return Err(OracleError::InvalidQuery {
            reason: "per-state enumeration covers the fixed-length recursion only",
        });
    }
    let mut cfg = cfg.clone();
    if cfg.algo == Algo::Gd {
        cfg.m = 0;
    }
    cfg.validate(p)?;
    let d = p.d();
    let m = cfg.m;
    let s_total = cfg.s;
    let c = binomial_saturating(p.n() as u64, cfg.b as u64);
    let draws = (s_total as u64).saturating_mul(m as u64);
    let path_count = path_budget(c, draws, budget.min(ENUM_PATH_BUDGET))?;
    let w_start = match w0 {
        Some(w) if w.len() == d => w.clone(),
        Some(_) => {
            return Err(OracleError::InvalidQuery {
                reason: "start point dimension must match the problem",
            })
        }
        None => DenseVector::zeros(d),
    };
    let combos = combinations(p.n(), cfg.b);
    let mut ctx = SarahEnumCtx {
        p,
        eta: cfg.eta,
        m,
        s_total,
        inv_b: 1.0 / cfg.b as f64,
        rows: alloc::vec![alloc::vec![StatRow::default(); m + 1]; s_total],
        final_f: 0.0,
        final_grad_sq: 0.0,
    };
    let g0 = p.full_grad(&w_start)?;
    {
        let row = &mut ctx.rows[0][0];
        row.f = p.objective(&w_start)?;
        row.grad_sq = norm_sq(&g0);
        row.v_sq = row.grad_sq;
    }
    let v0 = g0.clone();
    sarah_dfs(&mut ctx, &combos, 1, 0, &w_start, &v0, &g0)?;
    // Each row was visited once per distinct sampling prefix.
    for s in 1..=s_total {
        for t in 0..=m {
            let prefixes = u64_pow(c, ((s - 1) * m + t) as u64) as f64;
            let row = &mut ctx.rows[s - 1][t];
            row.f /= prefixes;
            row.grad_sq /= prefixes;
            row.v_sq /= prefixes;
            row.grad_minus_v_sq /= prefixes;
            row.v_diff_sq /= prefixes;
            row.grad_diff_sq /= prefixes;
        }
    }
    ctx.final_f /= path_count as f64;
    ctx.final_grad_sq /= path_count as f64;
    Ok(EnumStats {
        m,
        s_total,
        rows: ctx.rows,
        final_f: ctx.final_f,
        final_grad_sq: ctx.final_grad_sq,
        path_count,
    })
}

/// One exact mean over all equally likely sample paths of the fixed-length
/// recursion, at inner state `t` of outer loop `s`, from the origin.
pub fn exact_expectation(
    p: &Problem,
    cfg: &OptimizerConfig,
    statistic: Statistic,
    t: usize,
    s: usize,
) -> Result<f64, OracleError> {
    enumerate_sarah(p, cfg, None)?.stat(statistic, s, t)
}

/// Exact expectations over the data-dependent stopping process of the
/// restart-on-small-estimator variant.
#[derive(Clone, Copy, Debug)]
pub struct PpEnumStats {
    /// `E[F(ŵ)]` at the final output.
    pub e_f_final: f64,
    /// `E[(Σ_{s,t<T_s} ‖∇F(w_t^{(s)})‖²) / (T_1+…+T_S)]`, the per-path
    /// average over exactly the states a move was taken from.
    pub e_avg_grad_sq: f64,
    /// Completed sample paths.
    pub path_count: u64,
    /// Total probability mass of the visited paths; 1 up to rounding.
    pub weight_sum: f64,
}

struct PpEnumCtx<'a> {
    p: &'a Problem,
    eta: f64,
    gamma: f64,
    m: usize,
    t_total: u64,
    inv_b: f64,
    c: u64,
    budget: u64,
    nodes: u64,
    e_f: f64,
    e_ratio: f64,
    weight_sum: f64,
    leaves: u64,
}

impl PpEnumCtx<'_> {
    fn bump(&mut self) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(OracleError::BudgetExceeded { paths: self.nodes })
        } else {
            Ok(())
        }
    }

    fn leaf(&mut self, w: &DenseVector, moves: u64, gacc: f64, draws: u64) -> Result<(), OracleError> {
        let weight = 1.0 / u64_pow(self.c, draws) as f64;
        self.e_f += weight * self.p.objective(w)?;
        let ratio = if moves == 0 { 0.0 } else { gacc / moves as f64 };
        self.e_ratio += weight * ratio;
        self.weight_sum += weight;
        self.leaves += 1;
        Ok(())
    }
}

/// Per-path position while walking the stopping process.
#[derive(Clone, Copy)]
struct PpCursor {
    t: usize,
    moves: u64,
    gacc: f64,
    draws: u64,
}

fn pp_outer(
    ctx: &mut PpEnumCtx<'_>,
    combos: &[Vec<usize>],
    w: &DenseVector,
    moves: u64,
    gacc: f64,
    draws: u64,
) -> Result<(), OracleError> {
    ctx.bump()?;
    if moves >= ctx.t_total {
        return ctx.leaf(w, moves, gacc, draws);
    }
    let v0 = ctx.p.full_grad(w)?;
    let v0sq = norm_sq(&v0);
    if v0sq == 0.0 {
        // Exactly stationary restart point: the run stops here.
        return ctx.leaf(w, moves, gacc, draws);
    }
    let g0 = v0.clone();
    pp_inner(ctx, combos, w, &v0, &g0, v0sq, PpCursor { t: 0, moves, gacc, draws })
}

fn pp_inner(
    ctx: &mut PpEnumCtx<'_>,
    combos: &[Vec<usize>],
    w: &DenseVector,
    v: &DenseVector,
    g: &DenseVector,
    v0sq: f64,
    cur: PpCursor,
) -> Result<(), OracleError> {
    ctx.bump()?;
    let vsq = norm_sq(v);
    if !(cur.t <= ctx.m && vsq >= ctx.gamma * v0sq) {
        // Inner stop: T_s = t, the restart point is the current iterate.
        return pp_outer(ctx, combos, w, cur.moves + cur.t as u64, cur.gacc, cur.draws);
    }
    let gacc = cur.gacc + norm_sq(g);
    let mut w_next = w.clone();
    w_next.axpy_in_place(-ctx.eta, v)?;
    let g_next = ctx.p.full_grad(&w_next)?;
    let next = PpCursor { t: cur.t + 1, moves: cur.moves, gacc, draws: cur.draws };
    if ctx.m == 0 {
        // No sampling: the estimator stays the restart full gradient and
        // the next index test ends the loop.
        return pp_inner(ctx, combos, &w_next, v, &g_next, v0sq, next);
    }
    if next.t > ctx.m {
        // The trailing sample is drawn and discarded; it cannot change the
        // stopping decision, so the walk does not branch on it.
        return pp_inner(ctx, combos, &w_next, v, &g_next, v0sq, next);
    }
    for combo in combos {
        let mut v_next = v.clone();
        add_sample_update(ctx.p, ctx.inv_b, combo, &w_next, w, &mut v_next)?;
        let branched = PpCursor { draws: next.draws + 1, ..next };
        pp_inner(ctx, combos, &w_next, &v_next, &g_next, v0sq, branched)?;
    }
    Ok(())
}

/// Exact expectations for the restart-on-small-estimator variant by
/// weighted depth-first enumeration; path weights are `C(n,b)^(−draws)`.
/// The budget is enforced on visited nodes because the stopping times are
/// data dependent. The start point defaults to the origin.
pub fn enumerate_pp(
    p: &Problem,
    cfg: &OptimizerConfig,
    w0: Option<&DenseVector>,
) -> Result<PpEnumStats, OracleError> {
    enumerate_pp_with_budget(p, cfg, w0, ENUM_PATH_BUDGET)
}

/// [`enumerate_pp`] under a caller-supplied node budget, clamped to the
/// hard cap.
pub fn enumerate_pp_with_budget(
    p: &Problem,
    cfg: &OptimizerConfig,
    w0: Option<&DenseVector>,
    budget: u64,
) -> Result<PpEnumStats, OracleError> {
    if cfg.algo != Algo::SarahPp {
        return Err(OracleError::InvalidQuery {
            reason: "stopping-process enumeration covers the sarah-pp variant only",
        });
    }
    cfg.validate(p)?;
    if cfg.t_total as u64 > MAX_ENUM_DRAWS {
        return Err(OracleError::InvalidQuery {
            reason: "enumeration depth exceeds the supported sampling depth",
        });
    }
    let d = p.d();
    let w_start = match w0 {
        Some(w) if w.len() == d => w.clone(),
        Some(_) => {
            return Err(OracleError::InvalidQuery {
                reason: "start point dimension must match the problem",
            })
        }
        None => DenseVector::zeros(d),
    };
    let combos = combinations(p.n(), cfg.b);
    let mut ctx = PpEnumCtx {
        p,
        eta: cfg.eta,
        gamma: cfg.gamma,
        m: cfg.m,
        t_total: cfg.t_total as u64,
        inv_b: 1.0 / cfg.b as f64,
        c: binomial_saturating(p.n() as u64, cfg.b as u64),
        budget: budget.min(ENUM_PATH_BUDGET),
        nodes: 0,
        e_f: 0.0,
        e_ratio: 0.0,
        weight_sum: 0.0,
        leaves: 0,
    };
    pp_outer(&mut ctx, &combos, &w_start, 0, 0.0, 0)?;
    Ok(PpEnumStats {
        e_f_final: ctx.e_f,
        e_avg_grad_sq: ctx.e_ratio,
        path_count: ctx.leaves,
        weight_sum: ctx.weight_sum,
    })
}

/// A seeded-replication estimate: sample mean, standard error of the mean,
/// and the replica count that produced them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub replicas: u32,
}

fn estimate_from(samples: &[f64]) -> McEstimate {
    let r = samples.len();
    let mean = samples.iter().sum::<f64>() / r as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1) as f64;
    McEstimate {
        mean,
        std_err: libm::sqrt(var / r as f64),
        replicas: r as u32,
    }
}

/// Monte-Carlo mean of `f(seed)` over `replicas` consecutive seeds
/// starting at `base_seed`.
pub fn monte_carlo(
    base_seed: u64,
    replicas: u32,
    mut f: impl FnMut(u64) -> f64,
) -> Result<McEstimate, OracleError> {
    if replicas < 2 {
        return Err(OracleError::InvalidQuery {
            reason: "a standard error needs at least two replicas",
        });
    }
    let samples: Vec<f64> = (0..replicas)
        .map(|r| f(base_seed.wrapping_add(r as u64)))
        .collect();
    Ok(estimate_from(&samples))
}

fn mc_samples(
    base_seed: u64,
    replicas: u32,
    mut f: impl FnMut(u64) -> Result<f64, OracleError>,
) -> Result<Vec<f64>, OracleError> {
    let mut samples = Vec::with_capacity(replicas as usize);
    for r in 0..replicas {
        samples.push(f(base_seed.wrapping_add(r as u64))?);
    }
    Ok(samples)
}

/// One verification result, rendered as
/// `CHECK <name> <instance> <lhs> <rhs> <PASS|FAIL>`.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} {} {} {} {}",
            self.name,
            self.instance,
            g17(self.lhs),
            g17(self.rhs),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// One line of a verification suite: a computed check, or an instance
/// skipped because its exact enumeration exceeds the requested budget.
#[derive(Clone, Debug, PartialEq)]
pub enum SuiteLine {
    Check(CheckReport),
    Skip { name: String, instance: String },
}

impl SuiteLine {
    /// Skips do not fail a suite; only a computed FAIL does.
    pub fn failed(&self) -> bool {
        match self {
            SuiteLine::Check(r) => !r.pass,
            SuiteLine::Skip { .. } => false,
        }
    }
}

impl fmt::Display for SuiteLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuiteLine::Check(r) => r.fmt(f),
            SuiteLine::Skip { name, instance } => write!(f, "CHECK {name} {instance} - - SKIP"),
        }
    }
}

fn reports_only(lines: Vec<SuiteLine>) -> Vec<CheckReport> {
    lines
        .into_iter()
        .filter_map(|l| match l {
            SuiteLine::Check(r) => Some(r),
            SuiteLine::Skip { .. } => None,
        })
        .collect()
}

fn instance_label(p: &Problem, cfg: &OptimizerConfig) -> String {
    match cfg.algo {
        Algo::SarahPp | Algo::SarahAdaptive => format!(
            "{}-n{}-d{}-b{}-m{}-T{}-g{:.3}",
            p.kind().name(),
            p.n(),
            p.d(),
            cfg.b,
            cfg.m,
            cfg.t_total,
            cfg.gamma
        ),
        _ => format!(
            "{}-n{}-d{}-b{}-m{}-S{}",
            p.kind().name(),
            p.n(),
            p.d(),
            cfg.b,
            cfg.m,
            cfg.s
        ),
    }
}

/// Verify the telescoping identity for the estimator error at state
/// `(1, t)`:
/// `E‖∇F(w_t) − v_t‖² = Σ_{j≤t} E‖v_j − v_{j−1}‖² − Σ_{j≤t} E‖∇F(w_j) − ∇F(w_{j−1})‖²`.
/// Holds for every step size and batch size; checked by exact enumeration.
pub fn check_lemma_telescoping(
    p: &Problem,
    cfg: &OptimizerConfig,
    t: usize,
) -> Result<CheckReport, OracleError> {
    if t == 0 || t > cfg.m {
        return Err(OracleError::InvalidQuery {
            reason: "the telescoping identity needs 1 <= t <= m",
        });
    }
    let stats = enumerate_sarah(p, cfg, None)?;
    let lhs = stats.stat(Statistic::GradMinusVNormSq, 1, t)?;
    let mut rhs = 0.0;
    for j in 1..=t {
        rhs += stats.stat(Statistic::VDiffNormSq, 1, j)?;
    }
    for j in 1..=t {
        rhs -= stats.stat(Statistic::GradDiffNormSq, 1, j)?;
    }
    Ok(CheckReport {
        name: String::from("lemma-telescoping"),
        instance: format!("{}-t{}", instance_label(p, cfg), t),
        lhs,
        rhs,
        pass: (lhs - rhs).abs() <= CHECK_TOL * (1.0 + rhs.abs()),
    })
}

/// Verify the convex variance-transfer bound at state `(1, t)`:
/// `E‖∇F(w_t) − v_t‖² ≤ (ηL/(2−ηL)) (E‖v_0‖² − E‖v_t‖²)`,
/// stated for single-sample batches with `η < 2/L` on convex kinds.
pub fn check_variance_bound_convex(
    p: &Problem,
    cfg: &OptimizerConfig,
    t: usize,
) -> Result<CheckReport, OracleError> {
    if !p.kind().is_convex() {
        return Err(OracleError::Inapplicable {
            reason: "the variance-transfer bound assumes a convex problem kind",
        });
    }
    if cfg.b != 1 {
        return Err(OracleError::InvalidQuery {
            reason: "the variance-transfer bound is stated for single-sample batches",
        });
    }
    let l = p.smoothness().l;
    let el = cfg.eta * l;
    if !(el < 2.0) {
        return Err(OracleError::InvalidQuery {
            reason: "the variance-transfer bound needs eta < 2/L",
        });
    }
    if t > cfg.m {
        return Err(OracleError::InvalidQuery { reason: "t exceeds the inner length" });
    }
    let stats = enumerate_sarah(p, cfg, None)?;
    let lhs = stats.stat(Statistic::GradMinusVNormSq, 1, t)?;
    let v0 = stats.stat(Statistic::VNormSq, 1, 0)?;
    let vt = stats.stat(Statistic::VNormSq, 1, t)?;
    let rhs = el / (2.0 - el) * (v0 - vt);
    Ok(CheckReport {
        name: String::from("variance-bound-convex"),
        instance: format!("{}-etaL{:.3}-t{}", instance_label(p, cfg), el, t),
        lhs,
        rhs,
        pass: lhs <= rhs + CHECK_TOL,
    })
}

/// Verify the per-step expected descent chain on a convex instance with
/// `η ≤ 1/L`, one report per `t = 0..=m`:
/// `E F(w_{t+1}) ≤ E F(w_t) − (η/2) E‖∇F(w_t)‖² + (η/2)(Lη E‖v_0‖² − E‖v_t‖²)`.
/// The optimum value cancels from both sides, so no reference is needed.
pub fn check_descent_chain(
    p: &Problem,
    cfg: &OptimizerConfig,
) -> Result<Vec<CheckReport>, OracleError> {
    if !p.kind().is_convex() {
        return Err(OracleError::Inapplicable {
            reason: "the descent chain assumes a convex problem kind",
        });
    }
    if cfg.b != 1 {
        return Err(OracleError::InvalidQuery {
            reason: "the descent chain is stated for single-sample batches",
        });
    }
    let l = p.smoothness().l;
    if cfg.eta * l > THEOREM_SLACK {
        return Err(OracleError::InvalidQuery { reason: "the descent chain needs eta <= 1/L" });
    }
    let stats = enumerate_sarah(p, cfg, None)?;
    let v0 = stats.stat(Statistic::VNormSq, 1, 0)?;
    let mut out = Vec::with_capacity(cfg.m + 1);
    for t in 0..=cfg.m {
        let lhs = stats.stat(Statistic::FVal, 1, t + 1)?;
        let f_t = stats.stat(Statistic::FVal, 1, t)?;
        let g_t = stats.stat(Statistic::GradNormSq, 1, t)?;
        let v_t = stats.stat(Statistic::VNormSq, 1, t)?;
        let rhs = f_t - 0.5 * cfg.eta * g_t + 0.5 * cfg.eta * (l * cfg.eta * v0 - v_t);
        out.push(CheckReport {
            name: String::from("descent-chain"),
            instance: format!("{}-t{}", instance_label(p, cfg), t),
            lhs,
            rhs,
            pass: lhs <= rhs + CHECK_TOL,
        });
    }
    Ok(out)
}

/// Which convergence bound to verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremKind {
    /// Sublinear rate of `sarah` with single-sample batches.
    NonconvexT1,
    /// Sublinear rate of `sarah` with mini-batches.
    NonconvexT2,
    /// Averaged-gradient rate of `sarah-pp` on convex kinds.
    ConvexT3,
    /// Linear rate of `sarah-pp` under strong convexity.
    StronglyT4,
}

impl TheoremKind {
    pub fn name(self) -> &'static str {
        match self {
            TheoremKind::NonconvexT1 => "nonconvex-t1",
            TheoremKind::NonconvexT2 => "nonconvex-t2",
            TheoremKind::ConvexT3 => "convex-t3",
            TheoremKind::StronglyT4 => "strongly-t4",
        }
    }
}

/// How much slack a bound check grants the measured left side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlackPolicy {
    /// Absolute `1e-10`, for exact-enumeration results.
    ExactTol,
    /// Three standard errors of the Monte-Carlo mean.
    ThreeSigma,
    /// Pass iff `lhs ≤ rhs·factor`.
    Factor(f64),
}

/// Monte-Carlo fallback controls for [`check_theorem_bound`].
#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    /// Replicas when enumeration is over budget; at least 200 are run.
    pub mc_replicas: u32,
    pub mc_base_seed: u64,
    pub mc_slack: SlackPolicy,
    /// Enumeration budget steering the exact-vs-Monte-Carlo choice;
    /// clamped to the hard cap.
    pub enum_budget: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            mc_replicas: 200,
            mc_base_seed: 1009,
            mc_slack: SlackPolicy::ThreeSigma,
            enum_budget: ENUM_PATH_BUDGET,
        }
    }
}

fn slack_amount(policy: SlackPolicy, rhs: f64, std_err: f64) -> f64 {
    match policy {
        SlackPolicy::ExactTol => CHECK_TOL,
        SlackPolicy::ThreeSigma => 3.0 * std_err,
        SlackPolicy::Factor(f) => rhs * (f - 1.0),
    }
}

/// Average of `‖∇F‖²` over the states a trace visited with the estimator
/// in hand (every non-terminal row of an outer loop); needs per-row
/// instrumentation, so run with a checkpoint cadence of 1.
fn trace_average_grad_sq(tr: &RunTrace) -> f64 {
    let rows = &tr.records[1..tr.records.len() - 1];
    if rows.is_empty() {
        return 0.0;
    }
    let sum: f64 = rows
        .iter()
        .map(|r| r.grad_norm_sq.expect("checkpoint cadence 1 instruments every row"))
        .sum();
    sum / rows.len() as f64
}

/// Verify one of the published convergence bounds on a concrete instance,
/// by exact enumeration when the path budget allows and otherwise by
/// Monte-Carlo over seeded replicas (never fewer than 200). `reference`
/// supplies `F*` for the convex bounds and is solved on demand if absent;
/// the nonconvex bounds use the analytic lower bound 0 of the nonnegative
/// losses. Runs start at the origin; any evaluation budget in `cfg` is
/// ignored so the bound's own index set is realized.
pub fn check_theorem_bound(
    p: &Problem,
    cfg: &OptimizerConfig,
    which: TheoremKind,
    reference: Option<&ReferenceSolution>,
    opts: &CheckOptions,
) -> Result<CheckReport, OracleError> {
    match which {
        TheoremKind::NonconvexT1 | TheoremKind::NonconvexT2 => {
            check_rate_nonconvex(p, cfg, which, opts)
        }
        TheoremKind::ConvexT3 | TheoremKind::StronglyT4 => {
            check_rate_pp(p, cfg, which, reference, opts)
        }
    }
}

fn check_rate_nonconvex(
    p: &Problem,
    cfg: &OptimizerConfig,
    which: TheoremKind,
    opts: &CheckOptions,
) -> Result<CheckReport, OracleError> {
    if cfg.algo != Algo::Sarah {
        return Err(OracleError::InvalidQuery {
            reason: "the sublinear rate bounds cover the sarah config",
        });
    }
    if which == TheoremKind::NonconvexT1 && cfg.b != 1 {
        return Err(OracleError::InvalidQuery {
            reason: "the single-sample rate bound needs b = 1",
        });
    }
    cfg.validate(p)?;
    let l = p.smoothness().l;
    let emax = eta_max_nonconvex(l, cfg.m, cfg.b, p.n());
    if cfg.eta > emax * THEOREM_SLACK {
        return Err(OracleError::InvalidQuery {
            reason: "eta exceeds the sanctioned step size for the rate bound",
        });
    }
    let f0 = p.objective(&DenseVector::zeros(p.d()))?;
    // Lower bound of F: all component losses are nonnegative.
    let rhs = 2.0 / (cfg.eta * ((cfg.m + 1) * cfg.s) as f64) * f0;
    match enumerate_sarah_with_budget(p, cfg, None, opts.enum_budget) {
        Ok(stats) => {
            let lhs = stats.average_grad_norm_sq();
            Ok(CheckReport {
                name: String::from(which.name()),
                instance: format!("{}-exact", instance_label(p, cfg)),
                lhs,
                rhs,
                pass: lhs <= rhs + slack_amount(SlackPolicy::ExactTol, rhs, 0.0),
            })
        }
        Err(OracleError::BudgetExceeded { .. }) => {
            let replicas = opts.mc_replicas.max(200);
            let mut run_cfg = cfg.clone();
            run_cfg.checkpoint_every = Some(1);
            run_cfg.eval_budget = None;
            let samples = mc_samples(opts.mc_base_seed, replicas, |seed| {
                run_cfg.seed = seed;
                Ok(trace_average_grad_sq(&run(p, &run_cfg, None, None)?))
            })?;
            let est = estimate_from(&samples);
            Ok(CheckReport {
                name: String::from(which.name()),
                instance: format!("{}-mc{}", instance_label(p, cfg), replicas),
                lhs: est.mean,
                rhs,
                pass: est.mean <= rhs + slack_amount(opts.mc_slack, rhs, est.std_err),
            })
        }
        Err(e) => Err(e),
    }
}

fn check_rate_pp(
    p: &Problem,
    cfg: &OptimizerConfig,
    which: TheoremKind,
    reference: Option<&ReferenceSolution>,
    opts: &CheckOptions,
) -> Result<CheckReport, OracleError> {
    if cfg.algo != Algo::SarahPp {
        return Err(OracleError::InvalidQuery {
            reason: "the stopping-process rate bounds cover the sarah-pp config",
        });
    }
    if !p.kind().is_convex() {
        return Err(OracleError::Inapplicable {
            reason: "the stopping-process rate bounds assume a convex problem kind",
        });
    }
    cfg.validate(p)?;
    let sm = p.smoothness();
    if cfg.eta * sm.l > cfg.gamma * THEOREM_SLACK {
        return Err(OracleError::InvalidQuery {
            reason: "eta exceeds gamma/L, the sanctioned step size for the rate bound",
        });
    }
    if which == TheoremKind::StronglyT4 && !(sm.mu > 0.0) {
        return Err(OracleError::Inapplicable {
            reason: "the linear rate bound needs strong convexity (mu > 0)",
        });
    }
    let owned;
    let f_star = match reference {
        Some(r) => r.f_star,
        None => {
            owned = solve_reference(p, None, None)?;
            owned.f_star
        }
    };
    let f0 = p.objective(&DenseVector::zeros(p.d()))?;
    let delta = f0 - f_star;
    let rhs = match which {
        TheoremKind::ConvexT3 => 2.0 / (cfg.t_total as f64 * cfg.eta) * delta,
        _ => libm::pow(1.0 - sm.mu * cfg.eta, cfg.t_total as f64) * delta,
    };
    match enumerate_pp_with_budget(p, cfg, None, opts.enum_budget) {
        Ok(stats) => {
            let lhs = match which {
                TheoremKind::ConvexT3 => stats.e_avg_grad_sq,
                _ => stats.e_f_final - f_star,
            };
            Ok(CheckReport {
                name: String::from(which.name()),
                instance: format!("{}-exact", instance_label(p, cfg)),
                lhs,
                rhs,
                pass: lhs <= rhs + slack_amount(SlackPolicy::ExactTol, rhs, 0.0),
            })
        }
        Err(OracleError::BudgetExceeded { .. }) => {
            let replicas = opts.mc_replicas.max(200);
            let mut run_cfg = cfg.clone();
            run_cfg.eval_budget = None;
            if which == TheoremKind::ConvexT3 {
                run_cfg.checkpoint_every = Some(1);
            }
            let samples = mc_samples(opts.mc_base_seed, replicas, |seed| {
                run_cfg.seed = seed;
                let tr = run(p, &run_cfg, None, None)?;
                Ok(match which {
                    TheoremKind::ConvexT3 => trace_average_grad_sq(&tr),
                    _ => p.objective(&tr.final_w)? - f_star,
                })
            })?;
            let est = estimate_from(&samples);
            Ok(CheckReport {
                name: String::from(which.name()),
                instance: format!("{}-mc{}", instance_label(p, cfg), replicas),
                lhs: est.mean,
                rhs,
                pass: est.mean <= rhs + slack_amount(opts.mc_slack, rhs, est.std_err),
            })
        }
        Err(e) => Err(e),
    }
}

/// Full-batch degeneracy: with `b = n` every estimator equals the exact
/// gradient, so `E‖∇F(w_t) − v_t‖²` must vanish at every state.
pub fn check_full_batch_degeneracy(
    p: &Problem,
    cfg: &OptimizerConfig,
) -> Result<CheckReport, OracleError> {
    if cfg.b != p.n() {
        return Err(OracleError::InvalidQuery { reason: "degeneracy check needs b = n" });
    }
    let stats = enumerate_sarah(p, cfg, None)?;
    let mut worst = 0.0f64;
    for s in 1..=cfg.s {
        for t in 0..=cfg.m {
            worst = worst.max(stats.stat(Statistic::GradMinusVNormSq, s, t)?);
        }
    }
    Ok(CheckReport {
        name: String::from("full-batch-degeneracy"),
        instance: instance_label(p, cfg),
        lhs: worst,
        rhs: CHECK_TOL,
        pass: worst <= CHECK_TOL,
    })
}

fn solve_reference_with_cap(
    p: &Problem,
    w0: Option<&DenseVector>,
    tol: f64,
    cap_component_evals: u64,
) -> Result<ReferenceSolution, ReferenceError> {
    if !p.kind().is_convex() {
        return Err(ReferenceError::NotConvex);
    }
    if !(tol > 0.0) {
        return Err(ReferenceError::BadTolerance);
    }
    let d = p.d();
    let mut w = match w0 {
        Some(w) => {
            if w.len() != d {
                return Err(ReferenceError::Problem(ProblemError::from(
                    crate::linalg::LinalgError::DimensionMismatch { expected: d, got: w.len() },
                )));
            }
            w.clone()
        }
        None => DenseVector::zeros(d),
    };
    let eta = 1.0 / p.smoothness().l;
    let max_iters = cap_component_evals / p.n() as u64;
    let mut iterations: u64 = 0;
    loop {
        let g = p.full_grad(&w)?;
        let gsq = norm_sq(&g);
        if gsq <= tol {
            let f_star = p.objective(&w)?;
            return Ok(ReferenceSolution { w_star: w, f_star, grad_norm_sq: gsq, iterations, tol });
        }
        if iterations >= max_iters {
            let f_star = p.objective(&w)?;
            return Err(ReferenceError::CapReached {
                best: Box::new(ReferenceSolution {
                    w_star: w,
                    f_star,
                    grad_norm_sq: gsq,
                    iterations,
                    tol,
                }),
            });
        }
        w.axpy_in_place(-eta, &g)?;
        iterations += 1;
    }
}

/// Full-gradient descent at `η = 1/L` until `‖∇F(w)‖² ≤ tol` (default
/// `1e-15`) from `w0` (default the origin), capped at `10^8`
/// component-gradient equivalents. An infinite tolerance returns the
/// start point untouched; hitting the cap is an explicit error carrying
/// the best iterate.
pub fn solve_reference(
    p: &Problem,
    w0: Option<&DenseVector>,
    tol: Option<f64>,
) -> Result<ReferenceSolution, ReferenceError> {
    let tol = tol.unwrap_or(REFERENCE_TOL_DEFAULT);
    if tol.is_nan() {
        return Err(ReferenceError::BadTolerance);
    }
    solve_reference_with_cap(p, w0, tol, REFERENCE_EVAL_CAP)
}

/// Central-difference gradient of `f_i` (when `i` is given) or of the full
/// objective `F` at `w`: coordinate `j` gets
/// `[f(w + h e_j) − f(w − h e_j)] / (2h)`.
pub fn finite_diff_grad(
    p: &Problem,
    i: Option<usize>,
    w: &DenseVector,
    h: f64,
) -> Result<DenseVector, OracleError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(OracleError::InvalidQuery {
            reason: "finite-difference step must be positive and finite",
        });
    }
    let eval = |x: &DenseVector| -> Result<f64, OracleError> {
        Ok(match i {
            Some(idx) => p.component_value(idx, x)?,
            None => p.objective(x)?,
        })
    };
    let mut probe = w.clone();
    let mut out = DenseVector::zeros(w.len());
    for j in 0..w.len() {
        let orig = w.as_slice()[j];
        probe.as_mut_slice()[j] = orig + h;
        let fp = eval(&probe)?;
        probe.as_mut_slice()[j] = orig - h;
        let fm = eval(&probe)?;
        probe.as_mut_slice()[j] = orig;
        out.as_mut_slice()[j] = (fp - fm) / (2.0 * h);
    }
    Ok(out)
}

// ---- Verification suites -------------------------------------------------
//
// One instance matrix per published identity or bound, shared by the CLI
// `verify` command and the acceptance gate so both see the same evidence.

fn tiny_problem(kind: ProblemKind, n: usize, d: usize, seed: u64) -> Result<Problem, OracleError> {
    let data = match kind {
        ProblemKind::Ridge => synth_ridge(n, d, seed),
        _ => synth_classification(n, d, seed),
    };
    Ok(Problem::new(data, kind, 0.1)?)
}

fn batch_sizes(n: usize) -> Vec<usize> {
    let mut bs = alloc::vec![1usize];
    if n >= 2 {
        bs.push(2);
    }
    if n > 2 {
        bs.push(n);
    }
    bs
}

const TINY_KINDS: [ProblemKind; 3] =
    [ProblemKind::Ridge, ProblemKind::LogisticL2, ProblemKind::LogisticNonconvexReg];

/// Full path count of a fixed-length instance, for budget pre-checks.
fn sarah_paths(p: &Problem, cfg: &OptimizerConfig) -> u64 {
    let c = binomial_saturating(p.n() as u64, cfg.b as u64);
    u64_pow(c, (cfg.s as u64).saturating_mul(cfg.m as u64))
}

/// Telescoping identity over the full tiny matrix
/// (n ≤ 3, m ≤ 3, b ∈ {1, 2, n}, all three kinds), every `1 ≤ t ≤ m`.
pub fn suite_lemma_telescoping() -> Result<Vec<CheckReport>, OracleError> {
    Ok(reports_only(suite_lemma_telescoping_with_budget(ENUM_PATH_BUDGET)?))
}

/// [`suite_lemma_telescoping`] under a path budget; over-budget instances
/// come back as skips instead of reports.
pub fn suite_lemma_telescoping_with_budget(budget: u64) -> Result<Vec<SuiteLine>, OracleError> {
    let mut out = Vec::new();
    for (ki, &kind) in TINY_KINDS.iter().enumerate() {
        for n in 1..=3usize {
            let p = tiny_problem(kind, n, 2, 0x51 + 7 * ki as u64 + n as u64)?;
            let eta = 0.5 / p.smoothness().l;
            for m in 1..=3usize {
                for b in batch_sizes(n) {
                    let cfg = OptimizerConfig {
                        algo: Algo::Sarah,
                        eta,
                        m,
                        s: 1,
                        b,
                        ..OptimizerConfig::default()
                    };
                    let fits = sarah_paths(&p, &cfg) <= budget;
                    for t in 1..=m {
                        out.push(if fits {
                            SuiteLine::Check(check_lemma_telescoping(&p, &cfg, t)?)
                        } else {
                            SuiteLine::Skip {
                                name: String::from("lemma-telescoping"),
                                instance: format!("{}-t{}", instance_label(&p, &cfg), t),
                            }
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Convex variance-transfer bound at `η ∈ {0.5, 1, 1.9}/L`, all
/// `0 ≤ t ≤ m`, on the convex tiny instances.
pub fn suite_convex_variance() -> Result<Vec<CheckReport>, OracleError> {
    Ok(reports_only(suite_convex_variance_with_budget(ENUM_PATH_BUDGET)?))
}

/// [`suite_convex_variance`] under a path budget.
pub fn suite_convex_variance_with_budget(budget: u64) -> Result<Vec<SuiteLine>, OracleError> {
    let mut out = Vec::new();
    for (ki, &kind) in [ProblemKind::Ridge, ProblemKind::LogisticL2].iter().enumerate() {
        for n in 2..=3usize {
            let p = tiny_problem(kind, n, 2, 0x91 + 5 * ki as u64 + n as u64)?;
            let l = p.smoothness().l;
            let m = 3usize;
            for ratio in [0.5, 1.0, 1.9] {
                let cfg = OptimizerConfig {
                    algo: Algo::Sarah,
                    eta: ratio / l,
                    m,
                    s: 1,
                    b: 1,
                    ..OptimizerConfig::default()
                };
                let fits = sarah_paths(&p, &cfg) <= budget;
                for t in 0..=m {
                    out.push(if fits {
                        SuiteLine::Check(check_variance_bound_convex(&p, &cfg, t)?)
                    } else {
                        SuiteLine::Skip {
                            name: String::from("variance-bound-convex"),
                            instance: format!(
                                "{}-etaL{:.3}-t{}",
                                instance_label(&p, &cfg),
                                ratio,
                                t
                            ),
                        }
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Per-step expected descent chain on convex tiny instances at
/// `η ∈ {0.5, 1}/L`.
pub fn suite_descent_chain() -> Result<Vec<CheckReport>, OracleError> {
    Ok(reports_only(suite_descent_chain_with_budget(ENUM_PATH_BUDGET)?))
}

/// [`suite_descent_chain`] under a path budget.
pub fn suite_descent_chain_with_budget(budget: u64) -> Result<Vec<SuiteLine>, OracleError> {
    let mut out = Vec::new();
    for (ki, &kind) in [ProblemKind::Ridge, ProblemKind::LogisticL2].iter().enumerate() {
        let p = tiny_problem(kind, 3, 2, 0xD1 + ki as u64)?;
        let l = p.smoothness().l;
        for ratio in [0.5, 1.0] {
            let cfg = OptimizerConfig {
                algo: Algo::Sarah,
                eta: ratio / l,
                m: 3,
                s: 1,
                b: 1,
                ..OptimizerConfig::default()
            };
            if sarah_paths(&p, &cfg) <= budget {
                out.extend(check_descent_chain(&p, &cfg)?.into_iter().map(SuiteLine::Check));
            } else {
                for t in 0..=cfg.m {
                    out.push(SuiteLine::Skip {
                        name: String::from("descent-chain"),
                        instance: format!("{}-t{}", instance_label(&p, &cfg), t),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Sublinear rate bounds at the largest sanctioned step size: exact
/// enumeration on the tiny matrix (single-sample and mini-batch, with the
/// `b = n` degeneracy), plus seeded Monte-Carlo at `n = 100`.
pub fn suite_theorem_nonconvex() -> Result<Vec<CheckReport>, OracleError> {
    Ok(reports_only(suite_theorem_nonconvex_with_budget(ENUM_PATH_BUDGET)?))
}

/// [`suite_theorem_nonconvex`] under a path budget; rate checks fall back
/// to Monte-Carlo rather than skip when enumeration is over budget.
pub fn suite_theorem_nonconvex_with_budget(budget: u64) -> Result<Vec<SuiteLine>, OracleError> {
    let mut out = Vec::new();
    let opts = CheckOptions { enum_budget: budget, ..CheckOptions::default() };
    for (ki, &kind) in TINY_KINDS.iter().enumerate() {
        for &(n, m, s) in &[(2usize, 1usize, 1usize), (2, 2, 2), (3, 2, 1), (3, 1, 2)] {
            let p = tiny_problem(kind, n, 2, 0xA1 + 11 * ki as u64 + (n * m * s) as u64)?;
            let l = p.smoothness().l;
            let cfg = OptimizerConfig {
                algo: Algo::Sarah,
                eta: eta_max_nonconvex(l, m, 1, n),
                m,
                s,
                b: 1,
                ..OptimizerConfig::default()
            };
            out.push(SuiteLine::Check(check_theorem_bound(
                &p,
                &cfg,
                TheoremKind::NonconvexT1,
                None,
                &opts,
            )?));
        }
        let p = tiny_problem(kind, 3, 2, 0xB3 + ki as u64)?;
        let l = p.smoothness().l;
        for b in [2usize, 3] {
            let cfg = OptimizerConfig {
                algo: Algo::Sarah,
                eta: eta_max_nonconvex(l, 2, b, 3),
                m: 2,
                s: 1,
                b,
                ..OptimizerConfig::default()
            };
            out.push(SuiteLine::Check(check_theorem_bound(
                &p,
                &cfg,
                TheoremKind::NonconvexT2,
                None,
                &opts,
            )?));
            if b == 3 {
                out.push(SuiteLine::Check(check_full_batch_degeneracy(&p, &cfg)?));
            }
        }
    }
    // Moderate scale: seeded replication on the nonconvex kind.
    let data = synth_classification(100, 10, 0xC4);
    let p = Problem::new(data, ProblemKind::LogisticNonconvexReg, 0.1)?;
    let l = p.smoothness().l;
    let mc500 = CheckOptions { mc_replicas: 500, ..opts };
    let cfg = OptimizerConfig {
        algo: Algo::Sarah,
        eta: eta_max_nonconvex(l, 20, 1, 100),
        m: 20,
        s: 3,
        b: 1,
        ..OptimizerConfig::default()
    };
    out.push(SuiteLine::Check(check_theorem_bound(
        &p,
        &cfg,
        TheoremKind::NonconvexT1,
        None,
        &mc500,
    )?));
    for b in [2usize, 10] {
        let cfg = OptimizerConfig {
            algo: Algo::Sarah,
            eta: eta_max_nonconvex(l, 20, b, 100),
            m: 20,
            s: 2,
            b,
            ..OptimizerConfig::default()
        };
        out.push(SuiteLine::Check(check_theorem_bound(
            &p,
            &cfg,
            TheoremKind::NonconvexT2,
            None,
            &opts,
        )?));
    }
    // b = n at moderate scale collapses to one deterministic path.
    let cfg = OptimizerConfig {
        algo: Algo::Sarah,
        eta: eta_max_nonconvex(l, 20, 100, 100),
        m: 20,
        s: 2,
        b: 100,
        ..OptimizerConfig::default()
    };
    out.push(SuiteLine::Check(check_theorem_bound(
        &p,
        &cfg,
        TheoremKind::NonconvexT2,
        None,
        &opts,
    )?));
    out.push(SuiteLine::Check(check_full_batch_degeneracy(&p, &cfg)?));
    Ok(out)
}

/// Averaged-gradient rate of the stopping-process variant on convex
/// instances: exact tiny enumerations and one moderate Monte-Carlo run.
pub fn suite_theorem_convex() -> Result<Vec<CheckReport>, OracleError> {
    Ok(reports_only(suite_theorem_convex_with_budget(ENUM_PATH_BUDGET)?))
}

/// [`suite_theorem_convex`] under a node budget; rate checks fall back to
/// Monte-Carlo rather than skip when enumeration is over budget.
pub fn suite_theorem_convex_with_budget(budget: u64) -> Result<Vec<SuiteLine>, OracleError> {
    let mut out = Vec::new();
    let opts = CheckOptions { enum_budget: budget, ..CheckOptions::default() };
    for (ki, &kind) in [ProblemKind::Ridge, ProblemKind::LogisticL2].iter().enumerate() {
        let p = tiny_problem(kind, 3, 2, 0xE5 + ki as u64)?;
        let l = p.smoothness().l;
        let reference = solve_reference(&p, None, None)?;
        for gamma in [0.5, 1.0] {
            let cfg = OptimizerConfig {
                algo: Algo::SarahPp,
                eta: gamma / l,
                gamma,
                m: 2,
                t_total: 4,
                b: 1,
                ..OptimizerConfig::default()
            };
            out.push(SuiteLine::Check(check_theorem_bound(
                &p,
                &cfg,
                TheoremKind::ConvexT3,
                Some(&reference),
                &opts,
            )?));
        }
    }
    let p = Problem::new(synth_ridge(100, 10, 0xF2), ProblemKind::Ridge, 0.1)?;
    let l = p.smoothness().l;
    let reference = solve_reference(&p, None, None)?;
    let cfg = OptimizerConfig {
        algo: Algo::SarahPp,
        eta: 0.5 / l,
        gamma: 0.5,
        m: 50,
        t_total: 200,
        b: 1,
        ..OptimizerConfig::default()
    };
    out.push(SuiteLine::Check(check_theorem_bound(
        &p,
        &cfg,
        TheoremKind::ConvexT3,
        Some(&reference),
        &opts,
    )?));
    Ok(out)
}

/// Linear rate of the stopping-process variant under strong convexity:
/// exact tiny enumerations, plus the moderate ridge instance
/// (n = 100, d = 10, λ = 0.1, γ = 0.5, T ∈ {50, 200}) over 200 seeds with
/// a 5% slack factor.
pub fn suite_theorem_strongly() -> Result<Vec<CheckReport>, OracleError> {
    Ok(reports_only(suite_theorem_strongly_with_budget(ENUM_PATH_BUDGET)?))
}

/// [`suite_theorem_strongly`] under a node budget; rate checks fall back
/// to Monte-Carlo rather than skip when enumeration is over budget.
pub fn suite_theorem_strongly_with_budget(budget: u64) -> Result<Vec<SuiteLine>, OracleError> {
    let mut out = Vec::new();
    let exact_opts = CheckOptions { enum_budget: budget, ..CheckOptions::default() };
    let p = tiny_problem(ProblemKind::Ridge, 3, 2, 0xF7)?;
    let l = p.smoothness().l;
    let reference = solve_reference(&p, None, None)?;
    for t_total in [3usize, 5] {
        let cfg = OptimizerConfig {
            algo: Algo::SarahPp,
            eta: 0.5 / l,
            gamma: 0.5,
            m: 2,
            t_total,
            b: 1,
            ..OptimizerConfig::default()
        };
        out.push(SuiteLine::Check(check_theorem_bound(
            &p,
            &cfg,
            TheoremKind::StronglyT4,
            Some(&reference),
            &exact_opts,
        )?));
    }
    let p = Problem::new(synth_ridge(100, 10, 0xF2), ProblemKind::Ridge, 0.1)?;
    let l = p.smoothness().l;
    let reference = solve_reference(&p, None, None)?;
    let opts = CheckOptions { mc_slack: SlackPolicy::Factor(1.05), ..exact_opts };
    for t_total in [50usize, 200] {
        let cfg = OptimizerConfig {
            algo: Algo::SarahPp,
            eta: 0.5 / l,
            gamma: 0.5,
            m: 50,
            t_total,
            b: 1,
            ..OptimizerConfig::default()
        };
        out.push(SuiteLine::Check(check_theorem_bound(
            &p,
            &cfg,
            TheoremKind::StronglyT4,
            Some(&reference),
            &opts,
        )?));
    }
    Ok(out)
}
