//! Newton root search for the ℓ∞,1-ball projection.
//!
//! With `X = B − A` and `A` the row-wise projection of `B` onto an ℓ1 ball
//! of common radius `γ`, the projection reduces to the root of
//!
//! ```text
//! f(γ) = Σ_{m : ‖b_m‖1 > γ} λ_m(γ) − τ
//! ```
//!
//! where `λ_m(γ)` is the soft-threshold that puts row `m` on the ℓ1 sphere
//! of radius `γ`. `f` is convex, piecewise linear and decreasing on
//! `[0, max_m ‖b_m‖1]`, so Newton steps taken from the left never cross the
//! root. The slope is estimated as `−Σ 1/n_m` from the per-row supports, and
//! rows whose ℓ1 norm drops below the current `γ` are pruned for good.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::l1ball::{michelot_threshold, shrink_l1};
use crate::matrix::{l1_norm, GroupMatrix};

/// Knobs for [`newton_project`] (also read by the GRF baseline).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `|f(γ)| ≤ tolerance · max(1, τ)`.
    pub tolerance: f64,
    pub max_iter: usize,
    pub use_initial_point: bool,
    pub use_pruning: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iter: 100,
            use_initial_point: true,
            use_pruning: true,
        }
    }
}

impl SolverOptions {
    /// Options with pruning and the initial point disabled.
    pub fn baseline() -> Self {
        Self {
            use_initial_point: false,
            use_pruning: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::invalid(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Projected matrix plus root-search diagnostics.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub x: GroupMatrix,
    /// Root of the search function (the common row ℓ1 radius of `B − X`).
    pub gamma_star: f64,
    /// Outer iterations of the root search.
    pub iterations: usize,
    /// Search-function evaluations, endpoint probes included.
    pub evaluations: usize,
    /// `|f(γ)|` at the returned point.
    pub residual: f64,
    pub elapsed: Duration,
    pub converged: bool,
    /// Every `γ` at which `f` was evaluated by the main iteration, in order.
    pub gamma_trace: Vec<f64>,
    /// Number of rows still in play after each evaluation.
    pub active_trace: Vec<usize>,
}

impl ProjectionResult {
    pub(crate) fn trivial(x: GroupMatrix, started: Instant) -> Self {
        Self {
            x,
            gamma_star: 0.0,
            iterations: 0,
            evaluations: 0,
            residual: 0.0,
            elapsed: started.elapsed(),
            converged: true,
            gamma_trace: Vec::new(),
            active_trace: Vec::new(),
        }
    }

    /// `| ‖X‖∞,1 − τ |`.
    pub fn error(&self, tau: f64) -> f64 {
        (self.x.norm_linf_1() - tau).abs()
    }

    /// Percentage of rows of `X` with a nonzero entry.
    pub fn sparsity_percent(&self) -> f64 {
        100.0 * self.x.nonzero_rows() as f64 / self.x.rows() as f64
    }
}

/// Rows still in play together with their cached norms.
///
/// Row indices live in `indices`; the active ones occupy the prefix
/// `indices[..len]`. Pruning swaps rows past the prefix and shrinks `len`,
/// so a pruned row is never re-admitted.
#[derive(Debug, Clone)]
pub struct ActiveSet {
    indices: Vec<usize>,
    len: usize,
    row_l1: Vec<f64>,
    row_linf: Vec<f64>,
    pruning: bool,
}

impl ActiveSet {
    /// Every row of `b` with pruning enabled.
    pub fn new(b: &GroupMatrix) -> Self {
        Self::build(b, true)
    }

    /// Every row of `b`; evaluations recompute row norms and never prune.
    pub fn unpruned(b: &GroupMatrix) -> Self {
        Self::build(b, false)
    }

    fn build(b: &GroupMatrix, pruning: bool) -> Self {
        Self {
            indices: (0..b.rows()).collect(),
            len: b.rows(),
            row_l1: b.row_l1_norms(),
            row_linf: b.row_linf_norms(),
            pruning,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices[..self.len]
    }

    pub fn row_l1(&self) -> &[f64] {
        &self.row_l1
    }

    pub fn row_linf(&self) -> &[f64] {
        &self.row_linf
    }

    pub fn pruning(&self) -> bool {
        self.pruning
    }

    /// Largest row ℓ1 norm: the right end of the root bracket.
    pub fn max_l1(&self) -> f64 {
        self.row_l1.iter().copied().fold(0.0, f64::max)
    }

    /// Moves rows with `‖b_m‖1 > γ` to the front of the active prefix and
    /// returns how many there are. `len` is left untouched.
    fn partition(&mut self, gamma: f64) -> usize {
        let mut kept = 0;
        for i in 0..self.len {
            let m = self.indices[i];
            if self.row_l1[m] > gamma {
                self.indices.swap(kept, i);
                kept += 1;
            }
        }
        kept
    }
}

/// Value of the search function and the pieces needed for a Newton step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchEval {
    /// `f(γ) = Σ λ_m(γ) − τ`.
    pub f_value: f64,
    /// `Σ 1/n_m` over rows with a positive threshold; `−f'(γ)` estimate.
    pub sum_inv_support: f64,
    /// Original indices of the rows with `‖b_m‖1 > γ`.
    pub rows: Vec<usize>,
    /// `λ_m(γ)` aligned with `rows`.
    pub thresholds: Vec<f64>,
    /// `n_m = #{i : |b_mi| > λ_m}` aligned with `rows`.
    pub supports: Vec<usize>,
}

impl SearchEval {
    pub fn active_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Returns `B` itself when it already lies in the ball and the zero matrix
/// for `τ = 0`; `None` when a root search is needed.
pub fn trivial_check(b: &GroupMatrix, tau: f64) -> Result<Option<ProjectionResult>> {
    let started = Instant::now();
    check_tau(tau)?;
    if tau == 0.0 {
        let (m, n) = b.shape();
        return Ok(Some(ProjectionResult::trivial(
            GroupMatrix::zeros(m, n),
            started,
        )));
    }
    if b.norm_linf_1() <= tau {
        return Ok(Some(ProjectionResult::trivial(b.clone(), started)));
    }
    Ok(None)
}

/// Starting point `γ0 = max_k ‖shrink(b_k, τ)‖1` over rows with `‖b_k‖∞ > τ`,
/// or 0 when no entry exceeds `τ`. Satisfies `f(γ0) ≥ 0`.
pub fn initial_gamma(b: &GroupMatrix, tau: f64) -> f64 {
    initial_gamma_cached(b, &b.row_linf_norms(), tau)
}

fn initial_gamma_cached(b: &GroupMatrix, row_linf: &[f64], tau: f64) -> f64 {
    let mut gamma: f64 = 0.0;
    for (m, &linf) in row_linf.iter().enumerate() {
        if linf > tau {
            gamma = gamma.max(shrink_l1(b.row(m), tau));
        }
    }
    gamma
}

/// Evaluates `f(γ)` over the active rows.
///
/// With pruning enabled, rows with `‖b_m‖1 ≤ γ` are dropped from `active`,
/// but only when `f(γ) ≥ 0`: that certifies `γ ≤ γ*`, and a row pruned
/// there stays inactive at the root. If every row is gone, `f = −τ`.
pub fn eval_search(b: &GroupMatrix, active: &mut ActiveSet, gamma: f64, tau: f64) -> SearchEval {
    let mut scratch = vec![0.0; b.cols()];
    let mut out = SearchEval::default();
    eval_search_into(b, active, gamma, tau, &mut scratch, &mut out);
    out
}

pub(crate) fn eval_search_into(
    b: &GroupMatrix,
    active: &mut ActiveSet,
    gamma: f64,
    tau: f64,
    scratch: &mut [f64],
    out: &mut SearchEval,
) {
    out.rows.clear();
    out.thresholds.clear();
    out.supports.clear();
    let mut lambda_sum = 0.0;
    let mut inv_sum = 0.0;

    let mut row_kernel = |m: usize, l1: f64, out: &mut SearchEval| {
        let row = b.row(m);
        for (s, v) in scratch.iter_mut().zip(row) {
            *s = v.abs();
        }
        let (lambda, support) = michelot_threshold(scratch, l1, gamma, None);
        out.rows.push(m);
        out.thresholds.push(lambda);
        out.supports.push(support);
        lambda_sum += lambda;
        inv_sum += 1.0 / support as f64;
    };

    if active.pruning {
        let kept = active.partition(gamma);
        for i in 0..kept {
            let m = active.indices[i];
            row_kernel(m, active.row_l1[m], out);
        }
        out.f_value = lambda_sum - tau;
        out.sum_inv_support = inv_sum;
        if out.f_value >= 0.0 {
            active.len = kept;
        }
    } else {
        for m in 0..b.rows() {
            let l1 = l1_norm(b.row(m));
            if l1 > gamma {
                row_kernel(m, l1, out);
            }
        }
        out.f_value = lambda_sum - tau;
        out.sum_inv_support = inv_sum;
    }
}

/// `γ + f(γ) / Σ 1/n_m`. Fails when no row is active, which only happens
/// past the root.
pub fn newton_step(gamma: f64, eval: &SearchEval) -> Result<f64> {
    if eval.sum_inv_support.is_nan() || eval.sum_inv_support <= 0.0 {
        return Err(Error::InvalidState(format!(
            "empty active set at γ = {gamma}: the root was overshot"
        )));
    }
    Ok(gamma + eval.f_value / eval.sum_inv_support)
}

/// `X = B − A`: active rows are clamped elementwise to `±λ_m`, every other
/// row is zero.
pub fn assemble(b: &GroupMatrix, rows: &[usize], thresholds: &[f64]) -> GroupMatrix {
    debug_assert_eq!(rows.len(), thresholds.len());
    let mut x = GroupMatrix::zeros(b.rows(), b.cols());
    for (&m, &lambda) in rows.iter().zip(thresholds) {
        for (xi, &bi) in x.row_mut(m).iter_mut().zip(b.row(m)) {
            *xi = bi.abs().min(lambda).copysign(bi);
        }
    }
    x
}

/// Projects `b` onto `{X : ‖X‖∞,1 ≤ τ}` with the safeguarded Newton search.
///
/// A bracket `[lo, hi]` with `f(lo) ≥ 0 > f(hi)` is kept alongside the
/// iterates; a Newton step that leaves it, or that cannot be taken because
/// every row was dropped, is replaced by the bracket midpoint.
pub fn newton_project(b: &GroupMatrix, tau: f64, opts: &SolverOptions) -> Result<ProjectionResult> {
    opts.validate()?;
    let started = Instant::now();
    if let Some(done) = trivial_check(b, tau)? {
        return Ok(done);
    }

    let mut active = if opts.use_pruning {
        ActiveSet::new(b)
    } else {
        ActiveSet::unpruned(b)
    };
    let mut gamma = if opts.use_initial_point {
        initial_gamma_cached(b, active.row_linf(), tau)
    } else {
        0.0
    };
    let mut search = RootSearch::new(active.max_l1(), opts.tolerance * tau.max(1.0));
    let mut scratch = vec![0.0; b.cols()];
    let mut eval = SearchEval::default();
    let mut trace = Trace::default();

    for _ in 0..opts.max_iter {
        eval_search_into(b, &mut active, gamma, tau, &mut scratch, &mut eval);
        trace.record(gamma, &eval);
        if search.observe(gamma, &eval) {
            break;
        }
        let next = newton_step(gamma, &eval)
            .ok()
            .filter(|g| search.inside(*g))
            .unwrap_or_else(|| search.midpoint());
        if next == gamma {
            break;
        }
        gamma = next;
    }

    let iterations = trace.gammas.len();
    Ok(search.finish(b, started, iterations, iterations, trace))
}

/// Bracket bookkeeping and best-iterate tracking shared by the root searches.
pub(crate) struct RootSearch {
    pub lo: f64,
    pub hi: f64,
    threshold: f64,
    best: Option<(f64, SearchEval)>,
    converged: bool,
}

impl RootSearch {
    pub fn new(hi: f64, threshold: f64) -> Self {
        Self {
            lo: 0.0,
            hi,
            threshold,
            best: None,
            converged: false,
        }
    }

    /// Records an evaluation; returns true once the stopping rule holds.
    pub fn observe(&mut self, gamma: f64, eval: &SearchEval) -> bool {
        let f = eval.f_value;
        if f >= 0.0 {
            self.lo = self.lo.max(gamma);
        } else {
            self.hi = self.hi.min(gamma);
        }
        let better = match &self.best {
            None => true,
            Some((_, e)) => f.abs() < e.f_value.abs(),
        };
        if better {
            self.best = Some((gamma, eval.clone()));
        }
        if f.abs() <= self.threshold {
            self.converged = true;
        }
        self.converged
    }

    pub fn inside(&self, gamma: f64) -> bool {
        gamma.is_finite() && gamma > self.lo && gamma < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn mark_converged(&mut self) {
        self.converged = true;
    }

    pub fn finish(
        self,
        b: &GroupMatrix,
        started: Instant,
        iterations: usize,
        evaluations: usize,
        trace: Trace,
    ) -> ProjectionResult {
        let (gamma, eval) = self.best.expect("at least one evaluation");
        let x = assemble(b, &eval.rows, &eval.thresholds);
        ProjectionResult {
            x,
            gamma_star: gamma,
            iterations,
            evaluations,
            residual: eval.f_value.abs(),
            elapsed: started.elapsed(),
            converged: self.converged,
            gamma_trace: trace.gammas,
            active_trace: trace.active,
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct Trace {
    pub gammas: Vec<f64>,
    pub active: Vec<usize>,
}

impl Trace {
    pub fn record(&mut self, gamma: f64, eval: &SearchEval) {
        self.gammas.push(gamma);
        self.active.push(eval.active_rows());
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "ball radius τ must be finite and nonnegative, got {tau}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::data::gen_uniform;
    use crate::oracle::{bisect_project, check_kkt};
    use proptest::prelude::*;

    fn example() -> GroupMatrix {
        GroupMatrix::from_rows(&[[0.5, 0.2], [0.1, 0.1]]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn trivial_cases() {
        let b = GroupMatrix::from_rows(&[[0.3, -0.1], [0.05, 0.1]]).unwrap();
        let r = trivial_check(&b, 0.5).unwrap().unwrap();
        assert_eq!(r.x, b);
        assert_eq!(r.iterations, 0);

        let r = trivial_check(&b, 0.0).unwrap().unwrap();
        assert_eq!(r.x, GroupMatrix::zeros(2, 2));

        let b = GroupMatrix::from_rows(&[[0.5, 0.2], [0.3, 0.1]]).unwrap();
        assert!(trivial_check(&b, 0.3).unwrap().is_none());
        assert!(trivial_check(&b, -1.0).is_err());
    }

    #[test]
    fn initial_gamma_examples() {
        // Row 1: shrink([0.5, 0.2], 0.3) = [0.2, 0]; row 2 has ‖·‖∞ = 0.1 ≤ 0.3.
        let g0 = initial_gamma(&example(), 0.3);
        assert!(close(g0, 0.2, 1e-15));
        let mut active = ActiveSet::new(&example());
        assert!(eval_search(&example(), &mut active, g0, 0.3).f_value >= -1e-15);

        let b = GroupMatrix::from_rows(&[[0.2, 0.1], [0.1, 0.25]]).unwrap();
        assert_eq!(initial_gamma(&b, 0.3), 0.0);

        let b = GroupMatrix::from_rows(&[[1.0, 0.4]]).unwrap();
        assert!(close(initial_gamma(&b, 0.5), 0.5, 1e-15));
    }

    #[test]
    fn eval_search_examples() {
        let b = example();
        let mut active = ActiveSet::new(&b);
        let e = eval_search(&b, &mut active, 0.0, 0.3);
        assert!(close(e.f_value, 0.3, 1e-15));
        // Row 2 has two entries tied at its maximum, so both enter the support.
        assert_eq!(e.supports, vec![1, 2]);
        assert_eq!(active.len(), 2);

        let e = eval_search(&b, &mut active, 0.2, 0.3);
        assert!(close(e.f_value, 0.0, 1e-15));
        assert_eq!(e.rows, vec![0]);
        assert!(close(e.thresholds[0], 0.3, 1e-15));
        assert_eq!(active.len(), 1);

        let mut fresh = ActiveSet::new(&b);
        let e = eval_search(&b, &mut fresh, 0.7, 0.3);
        assert!(close(e.f_value, -0.3, 1e-15));
        assert_eq!(e.active_rows(), 0);
        assert_eq!(e.sum_inv_support, 0.0);
        // f < 0: nothing is committed.
        assert_eq!(fresh.len(), 2);
    }

    #[test]
    fn unpruned_evaluation_matches_pruned() {
        let b = gen_uniform(40, 7, 3);
        let tau = 0.05 * b.norm_linf_1();
        for g in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let mut p = ActiveSet::new(&b);
            let mut u = ActiveSet::unpruned(&b);
            let ep = eval_search(&b, &mut p, g, tau);
            let eu = eval_search(&b, &mut u, g, tau);
            assert!(close(ep.f_value, eu.f_value, 1e-12));
            assert!(close(ep.sum_inv_support, eu.sum_inv_support, 1e-12));
            assert_eq!(u.len(), b.rows());
        }
    }

    #[test]
    fn newton_step_examples() {
        let e = SearchEval {
            f_value: 0.3,
            sum_inv_support: 1.5,
            ..Default::default()
        };
        assert!(close(newton_step(0.1, &e).unwrap(), 0.3, 1e-15));
        let at_root = SearchEval {
            f_value: 0.0,
            sum_inv_support: 2.0,
            ..Default::default()
        };
        assert_eq!(newton_step(0.42, &at_root).unwrap(), 0.42);
        assert!(newton_step(1.0, &SearchEval::default()).is_err());

        // From γ = 0 on the worked example: f = 0.3, supports {1, 2}, so
        // Σ 1/n = 1.5 and the step lands on the bisection root 0.2.
        let b = example();
        let mut active = ActiveSet::new(&b);
        let e0 = eval_search(&b, &mut active, 0.0, 0.3);
        let g1 = newton_step(0.0, &e0).unwrap();
        let root = bisect_project(&b, 0.3, None).unwrap().gamma_star;
        assert!(close(g1, 0.2, 1e-15));
        assert!(close(g1, root, 1e-12));
        assert!(g1 <= root + 1e-15);
        let e1 = eval_search(&b, &mut active, g1, 0.3);
        assert!(close(e1.f_value, 0.0, 1e-15));

        // Underestimating the support keeps the step short of the root:
        // with supports {1, 1} the step from 0 reaches only 0.15.
        let short = SearchEval {
            f_value: 0.3,
            sum_inv_support: 2.0,
            ..Default::default()
        };
        let g = newton_step(0.0, &short).unwrap();
        assert!(close(g, 0.15, 1e-15) && g < root);
        let mut fresh = ActiveSet::new(&b);
        assert!(eval_search(&b, &mut fresh, g, 0.3).f_value > 0.0);
    }

    #[test]
    fn assemble_examples() {
        let b = example();
        let x = assemble(&b, &[0], &[0.3]);
        assert_eq!(
            x,
            GroupMatrix::from_rows(&[[0.3, 0.2], [0.0, 0.0]]).unwrap()
        );
        assert!(close(x.norm_linf_1(), 0.3, 1e-15));

        let b = GroupMatrix::from_rows(&[[1.0, -0.4, 0.7, -2.0]]).unwrap();
        let x = assemble(&b, &[0], &[0.5]);
        assert_eq!(x.row(0), &[0.5, -0.4, 0.5, -0.5]);
    }

    #[test]
    fn worked_example_projection() {
        let r = newton_project(&example(), 0.3, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!(close(r.gamma_star, 0.2, 1e-12));
        let expect = GroupMatrix::from_rows(&[[0.3, 0.2], [0.0, 0.0]]).unwrap();
        assert!(r.x.distance(&expect) < 1e-12);

        let zero_start = SolverOptions {
            use_initial_point: false,
            ..Default::default()
        };
        let r = newton_project(&example(), 0.3, &zero_start).unwrap();
        assert_eq!(r.gamma_trace.len(), 2);
        assert!(r.x.distance(&expect) < 1e-12);

        let inside = newton_project(&example(), 1.0, &SolverOptions::default()).unwrap();
        assert_eq!(inside.x, example());
        assert_eq!(inside.iterations, 0);
    }

    #[test]
    fn degenerate_shapes() {
        // One group: the ball is an ℓ∞ ball, so the projection clamps.
        let b = GroupMatrix::from_rows(&[[1.0, -0.4, 0.9, -2.0]]).unwrap();
        let r = newton_project(&b, 0.5, &SolverOptions::default()).unwrap();
        let expect = GroupMatrix::from_rows(&[[0.5, -0.4, 0.5, -0.5]]).unwrap();
        assert!(r.x.distance(&expect) < 1e-12);

        // One column: ℓ1-ball projection of that column.
        let col = [0.5, -0.3, 0.2, 0.05];
        let b = GroupMatrix::from_vec(4, 1, col.to_vec()).unwrap();
        let r = newton_project(&b, 0.6, &SolverOptions::default()).unwrap();
        let l1 = crate::l1ball::project_l1_sort(&col, 0.6).unwrap();
        for (x, y) in r.x.as_slice().iter().zip(&l1.projected) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn zero_rows_stay_zero() {
        let b = GroupMatrix::from_rows(&[[0.5, -0.2], [0.0, 0.0], [0.3, 0.4]]).unwrap();
        let r = newton_project(
            &b,
            0.2,
            &SolverOptions {
                use_initial_point: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.x.row(1), &[0.0, 0.0]);
        assert_eq!(r.active_trace[0], 2);
    }

    #[test]
    fn max_iter_exhaustion_returns_best_iterate() {
        let b = gen_uniform(200, 20, 11);
        let tau = 1e-3 * b.norm_linf_1();
        let opts = SolverOptions {
            max_iter: 1,
            use_initial_point: false,
            ..Default::default()
        };
        let r = newton_project(&b, tau, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.residual > 0.0);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let opts = SolverOptions::default();
        assert!(newton_project(&example(), -0.1, &opts).is_err());
        assert!(newton_project(&example(), f64::NAN, &opts).is_err());
        let bad = SolverOptions {
            tolerance: 0.0,
            ..opts
        };
        assert!(newton_project(&example(), 0.3, &bad).is_err());
        let bad = SolverOptions {
            max_iter: 0,
            ..opts
        };
        assert!(newton_project(&example(), 0.3, &bad).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let b = gen_uniform(60, 8, 5);
        let tau = 0.02 * b.norm_linf_1();
        let f = |g: f64| {
            let mut a = ActiveSet::unpruned(&b);
            eval_search(&b, &mut a, g, tau)
        };
        let root = bisect_project(&b, tau, None).unwrap().gamma_star;
        let h = 1e-7;
        let mut checked = 0;
        for k in 1..40 {
            let g = root * k as f64 / 40.0;
            let (lo, mid, hi) = (f(g - h), f(g), f(g + h));
            // Skip samples that straddle a breakpoint.
            if lo.supports != mid.supports || hi.supports != mid.supports || lo.rows != hi.rows {
                continue;
            }
            let fd = -(hi.f_value - lo.f_value) / (2.0 * h);
            assert!(
                (fd - mid.sum_inv_support).abs() <= 1e-4 * mid.sum_inv_support,
                "γ={g}: fd {fd} vs {}",
                mid.sum_inv_support
            );
            checked += 1;
        }
        assert!(checked > 20);
    }

    fn instance() -> impl Strategy<Value = (GroupMatrix, f64)> {
        (1usize..50, 1usize..20, any::<u64>(), -4.0f64..-0.5).prop_map(|(m, n, seed, la)| {
            let b = gen_uniform(m, n, seed);
            let tau = 10f64.powf(la) * b.norm_linf_1();
            (b, tau)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn agrees_with_bisection((b, tau) in instance()) {
            let r = newton_project(&b, tau, &SolverOptions::default()).unwrap();
            let o = bisect_project(&b, tau, None).unwrap();
            prop_assert!(r.converged);
            prop_assert!(r.x.distance(&o.x) <= 1e-8 * b.frobenius_norm());
            prop_assert!(r.error(tau) <= 1e-12 * tau.max(1.0));
            let report = check_kkt(&b, tau, &r.x, 1e-9 * tau.max(1.0));
            prop_assert!(report.passed(), "{:?}", report);
        }

        #[test]
        fn gamma_iterates_monotone((b, tau) in instance(), use_init in any::<bool>()) {
            let opts = SolverOptions { use_initial_point: use_init, ..Default::default() };
            let r = newton_project(&b, tau, &opts).unwrap();
            for w in r.gamma_trace.windows(2) {
                prop_assert!(w[0] <= w[1], "trace {:?}", r.gamma_trace);
            }
            let tol = opts.tolerance * tau.max(1.0);
            for &g in &r.gamma_trace {
                let mut a = ActiveSet::unpruned(&b);
                prop_assert!(eval_search(&b, &mut a, g, tau).f_value >= -tol);
            }
        }

        #[test]
        fn initial_point_is_left_of_root((b, tau) in instance()) {
            let g0 = initial_gamma(&b, tau);
            let mut a = ActiveSet::unpruned(&b);
            // Exact value is ≥ 0; rows inside the γ0 ball make it exactly 0.
            prop_assert!(eval_search(&b, &mut a, g0, tau).f_value >= -1e-12 * tau.max(1.0));
        }

        #[test]
        fn output_rows_are_clamps((b, tau) in instance()) {
            let r = newton_project(&b, tau, &SolverOptions::default()).unwrap();
            let mut level_sum = 0.0;
            for m in 0..b.rows() {
                let x = r.x.row(m);
                let level = crate::matrix::linf_norm(x);
                level_sum += level;
                for (xi, bi) in x.iter().zip(b.row(m)) {
                    let want = if level > 0.0 { bi.abs().min(level).copysign(*bi) } else { 0.0 };
                    prop_assert_eq!(*xi, want);
                }
            }
            prop_assert!((level_sum - tau).abs() <= 1e-12 * tau.max(1.0));
        }

        #[test]
        fn scale_equivariant((b, tau) in instance(), c in 0.1f64..10.0) {
            let opts = SolverOptions::default();
            let base = newton_project(&b, tau, &opts).unwrap();
            let scaled = newton_project(&b.scaled(c), c * tau, &opts).unwrap();
            prop_assert!(scaled.x.distance(&base.x.scaled(c)) <= 1e-9 * c * b.frobenius_norm().max(1.0));
        }

        #[test]
        fn row_permutation_equivariant((b, tau) in instance(), rot in 0usize..64) {
            let m = b.rows();
            let k = rot % m;
            let rows: Vec<Vec<f64>> = (0..m).map(|i| b.row((i + k) % m).to_vec()).collect();
            let permuted = GroupMatrix::from_rows(&rows).unwrap();
            let opts = SolverOptions::default();
            let base = newton_project(&b, tau, &opts).unwrap();
            let perm = newton_project(&permuted, tau, &opts).unwrap();
            for i in 0..m {
                for (p, q) in perm.x.row(i).iter().zip(base.x.row((i + k) % m)) {
                    prop_assert!((p - q).abs() <= 1e-12);
                }
            }
        }
    }
}
