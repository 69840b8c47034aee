//! Reference root searches on the same scalar search function.
//!
//! * GRF: a Brent-style bracketing hybrid (bisection, secant, inverse
//!   quadratic interpolation) over `[0, max_m ‖b_m‖1]`. By default it starts
//!   from zero and evaluates every row on every call.
//! * SRF: Steffensen iteration with an adaptively perturbed second point,
//!   sharing the initial point and pruning of the Newton projector. Each
//!   iteration costs two evaluations of the search function.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linf1::{
    eval_search_into, trivial_check, ActiveSet, ProjectionResult, RootSearch, SearchEval,
    SolverOptions, Trace,
};
use crate::matrix::GroupMatrix;

/// Parameters of the Steffensen search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteffensenOptions {
    /// Precision floor; the search stops once `|f| ≤ tol_c · max(1, τ)`.
    pub tol_c: f64,
    /// User tolerance setting the perturbation `α_n |f(x_n)|` of the
    /// auxiliary point.
    pub tol_u: f64,
    pub max_iter: usize,
    pub use_initial_point: bool,
    pub use_pruning: bool,
}

impl Default for SteffensenOptions {
    fn default() -> Self {
        Self {
            tol_c: 1e-12,
            tol_u: 1e-8,
            max_iter: 100,
            use_initial_point: true,
            use_pruning: true,
        }
    }
}

impl SteffensenOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.tol_c) || !ok(self.tol_u) || self.tol_c >= self.tol_u {
            return Err(Error::invalid(format!(
                "need 0 < tol_c < tol_u, got tol_c = {}, tol_u = {}",
                self.tol_c, self.tol_u
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }

    /// Perturbation multiplier `α_n = 0.75 · tol_u / |f(x_n)|`, inside the
    /// open band `(tol_u / 2|f|, tol_u / |f|)`.
    pub fn alpha(&self, f: f64) -> f64 {
        0.75 * self.tol_u / f.abs()
    }
}

/// Search-function evaluator with a call counter.
struct Evaluator<'a> {
    b: &'a GroupMatrix,
    tau: f64,
    active: ActiveSet,
    scratch: Vec<f64>,
    calls: usize,
}

impl<'a> Evaluator<'a> {
    fn new(b: &'a GroupMatrix, tau: f64, pruning: bool) -> Self {
        let active = if pruning {
            ActiveSet::new(b)
        } else {
            ActiveSet::unpruned(b)
        };
        Self {
            b,
            tau,
            active,
            scratch: vec![0.0; b.cols()],
            calls: 0,
        }
    }

    fn eval(&mut self, gamma: f64, out: &mut SearchEval) -> f64 {
        self.calls += 1;
        eval_search_into(
            self.b,
            &mut self.active,
            gamma,
            self.tau,
            &mut self.scratch,
            out,
        );
        out.f_value
    }
}

/// Projection by Brent's method on the search function.
///
/// Stops when `|f| ≤ tolerance · max(1, τ)`, or when the bracket has shrunk
/// to a few ulps of the right end and cannot be narrowed further. `opts.use_initial_point` moves the left
/// end of the bracket to the shrink-based starting point.
pub fn grf_project(b: &GroupMatrix, tau: f64, opts: &SolverOptions) -> Result<ProjectionResult> {
    opts.validate()?;
    let started = Instant::now();
    if let Some(done) = trivial_check(b, tau)? {
        return Ok(done);
    }

    let mut ev = Evaluator::new(b, tau, opts.use_pruning);
    let right = ev.active.max_l1();
    let left = if opts.use_initial_point {
        crate::linf1::initial_gamma(b, tau)
    } else {
        0.0
    };
    let xtol = 4.0 * f64::EPSILON * right.max(1.0);
    let mut search = RootSearch::new(right, opts.tolerance * tau.max(1.0));
    let mut trace = Trace::default();
    let mut cur = SearchEval::default();

    let mut xa = left;
    let mut fa = ev.eval(xa, &mut cur);
    trace.record(xa, &cur);
    if search.observe(xa, &cur) {
        return Ok(search.finish(b, started, 0, ev.calls, trace));
    }
    let mut xb = right;
    let mut fb = ev.eval(xb, &mut cur);
    trace.record(xb, &cur);
    if search.observe(xb, &cur) {
        return Ok(search.finish(b, started, 0, ev.calls, trace));
    }
    if fa.is_sign_negative() == fb.is_sign_negative() {
        return Err(Error::InvalidState(format!(
            "search function does not change sign on [{xa}, {xb}]: f = {fa}, {fb}"
        )));
    }

    let (mut xc, mut fc) = (xb, fb);
    let (mut d, mut e) = (xb - xa, xb - xa);
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            xc = xa;
            fc = fa;
            d = xb - xa;
            e = d;
        }
        if fc.abs() < fb.abs() {
            xa = xb;
            xb = xc;
            xc = xa;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * xb.abs() + 0.5 * xtol;
        let xm = 0.5 * (xc - xb);
        if xm.abs() <= tol1 || fb == 0.0 {
            search.mark_converged();
            break;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if xa == xc {
                // secant
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (xb - xa) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        xa = xb;
        fa = fb;
        xb += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = ev.eval(xb, &mut cur);
        iterations += 1;
        trace.record(xb, &cur);
        if search.observe(xb, &cur) {
            break;
        }
    }

    Ok(search.finish(b, started, iterations, ev.calls, trace))
}

/// Projection by the modified Steffensen iteration
/// `x_{n+1} = x_n − f(x_n) / δF(x_n, y_n)` with `y_n = x_n + α_n |f(x_n)|`.
///
/// Both `f(x_n)` and `f(y_n)` are evaluated on every iteration. Steps that
/// leave the current sign bracket, or whose secant slope is not negative,
/// fall back to bisection.
pub fn srf_project(
    b: &GroupMatrix,
    tau: f64,
    opts: &SteffensenOptions,
) -> Result<ProjectionResult> {
    opts.validate()?;
    let started = Instant::now();
    if let Some(done) = trivial_check(b, tau)? {
        return Ok(done);
    }

    let mut ev = Evaluator::new(b, tau, opts.use_pruning);
    let mut x = if opts.use_initial_point {
        crate::linf1::initial_gamma(b, tau)
    } else {
        0.0
    };
    let mut search = RootSearch::new(ev.active.max_l1(), opts.tol_c * tau.max(1.0));
    let mut trace = Trace::default();
    let mut at_x = SearchEval::default();
    let mut at_y = SearchEval::default();
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let fx = ev.eval(x, &mut at_x);
        let y = if fx == 0.0 {
            x + 0.75 * opts.tol_u
        } else {
            x + opts.alpha(fx) * fx.abs()
        };
        let fy = ev.eval(y, &mut at_y);
        iterations += 1;
        trace.record(x, &at_x);

        let done_x = search.observe(x, &at_x);
        if done_x || search.observe(y, &at_y) {
            break;
        }
        let slope = (fy - fx) / (y - x);
        let next = Some(x - fx / slope)
            .filter(|g| slope < 0.0 && search.inside(*g))
            .unwrap_or_else(|| search.midpoint());
        if next == x {
            break;
        }
        x = next;
    }

    Ok(search.finish(b, started, iterations, ev.calls, trace))
}
