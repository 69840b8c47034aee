//! Multi-task LASSO by projected gradient descent.
//!
//! Minimises `½ Σ_k ‖D w_k − y_k‖²` over coefficient matrices `W`
//! (features × tasks) subject to `Σ_m max_k |W_mk| ≤ τ`. Each iteration
//! takes a gradient step column by column and hands the whole matrix to a
//! [`Projector`].

use std::time::Duration;

use crate::error::{Error, Result};
use crate::matrix::GroupMatrix;
use crate::Projector;

#[derive(Debug, Clone)]
pub struct MtlProblem {
    /// `samples × features`.
    pub design: GroupMatrix,
    /// `samples × tasks`, one column per task.
    pub targets: GroupMatrix,
    /// Radius of the ℓ∞,1 ball.
    pub radius: f64,
}

impl MtlProblem {
    pub fn new(design: GroupMatrix, targets: GroupMatrix, radius: f64) -> Result<Self> {
        if design.rows() != targets.rows() {
            return Err(Error::invalid(format!(
                "design has {} samples but targets have {}",
                design.rows(),
                targets.rows()
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            design,
            targets,
            radius,
        })
    }

    pub fn features(&self) -> usize {
        self.design.cols()
    }

    pub fn tasks(&self) -> usize {
        self.targets.cols()
    }

    fn check_coeffs(&self, coeffs: &GroupMatrix) -> Result<()> {
        if coeffs.shape() != (self.features(), self.tasks()) {
            return Err(Error::invalid(format!(
                "coefficients are {:?}, expected {:?}",
                coeffs.shape(),
                (self.features(), self.tasks())
            )));
        }
        Ok(())
    }

    fn residual(&self, coeffs: &GroupMatrix) -> Result<GroupMatrix> {
        self.check_coeffs(coeffs)?;
        let mut r = self.design.matmul(coeffs)?;
        for (ri, yi) in r.as_mut_slice().iter_mut().zip(self.targets.as_slice()) {
            *ri -= yi;
        }
        Ok(r)
    }
}

/// `½ ‖D W − Y‖_F²`.
pub fn objective(problem: &MtlProblem, coeffs: &GroupMatrix) -> Result<f64> {
    let r = problem.residual(coeffs)?;
    Ok(0.5 * r.as_slice().iter().map(|v| v * v).sum::<f64>())
}

/// `Dᵀ (D W − Y)`.
pub fn gradient(problem: &MtlProblem, coeffs: &GroupMatrix) -> Result<GroupMatrix> {
    let r = problem.residual(coeffs)?;
    problem.design.tr_matmul(&r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    /// `1.01 · λ_max(DᵀD)`, or 1.0 for an all-zero design.
    pub value: f64,
    /// Set when the design annihilated the power-iteration vector.
    pub degenerate: bool,
}

/// Power iteration on `DᵀD` from the normalised all-ones vector.
pub fn lipschitz_estimate(design: &GroupMatrix, iters: usize) -> Result<LipschitzEstimate> {
    if iters == 0 {
        return Err(Error::invalid("power iteration needs at least one step"));
    }
    let n = design.cols();
    let mut v = GroupMatrix::from_vec(n, 1, vec![1.0 / (n as f64).sqrt(); n])?;
    let mut rayleigh = 0.0;
    for _ in 0..iters {
        let dv = design.matmul(&v)?;
        rayleigh = dv.as_slice().iter().map(|x| x * x).sum::<f64>();
        let w = design.tr_matmul(&dv)?;
        let norm = w.frobenius_norm();
        if norm == 0.0 {
            return Ok(LipschitzEstimate {
                value: 1.0,
                degenerate: true,
            });
        }
        v = w.scaled(1.0 / norm);
    }
    let dv = design.matmul(&v)?;
    rayleigh = rayleigh.max(dv.as_slice().iter().map(|x| x * x).sum::<f64>());
    Ok(LipschitzEstimate {
        value: 1.01 * rayleigh,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    /// Constant step `1/L` from [`lipschitz_estimate`].
    InverseLipschitz,
    /// Constant user-supplied step.
    Fixed(f64),
    /// Backtracking along the projection arc, starting from `2/L` and
    /// halving until `F(W⁺) ≤ F(W) + c ⟨∇F(W), W⁺ − W⟩`.
    Armijo {
        sufficient_decrease: f64,
        max_backtracks: usize,
    },
}

impl StepPolicy {
    pub fn armijo() -> Self {
        StepPolicy::Armijo {
            sufficient_decrease: 1e-4,
            max_backtracks: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PgdOptions {
    pub step: StepPolicy,
    pub max_iter: usize,
    /// Stop once `‖W_k − W_{k−1}‖_F < tol`.
    pub tol: f64,
    /// Starting point; the zero matrix when `None`.
    pub initial: Option<GroupMatrix>,
    pub power_iters: usize,
    /// Keep every iterate in the result (for diagnostics and tests).
    pub record_iterates: bool,
}

impl Default for PgdOptions {
    fn default() -> Self {
        Self {
            step: StepPolicy::armijo(),
            max_iter: 500,
            tol: 1e-8,
            initial: None,
            power_iters: 100,
            record_iterates: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MtlResult {
    /// `features × tasks`.
    pub coefficients: GroupMatrix,
    /// Objective after every iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Wall time of every projector call.
    pub projection_times: Vec<Duration>,
    /// Largest `Σ_m max_k |W_mk| − τ` seen over the iterates (≤ 0 when all
    /// were feasible).
    pub max_violation: f64,
    pub iterates: Vec<GroupMatrix>,
}

impl MtlResult {
    pub fn total_projection_time(&self) -> Duration {
        self.projection_times.iter().sum()
    }
}

pub fn pgd_solve(
    problem: &MtlProblem,
    projector: &dyn Projector,
    opts: &PgdOptions,
) -> Result<MtlResult> {
    let tau = problem.radius;
    if opts.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let lipschitz = lipschitz_estimate(&problem.design, opts.power_iters)?.value;
    let mut projection_times = Vec::new();
    let mut project = |a: &GroupMatrix| -> Result<GroupMatrix> {
        let r = projector.project(a, tau)?;
        projection_times.push(r.elapsed);
        if !r.converged {
            return Err(Error::NotConverged {
                iterations: r.iterations,
                residual: r.residual,
            });
        }
        Ok(r.x)
    };

    let mut w = match &opts.initial {
        Some(w0) => {
            problem.check_coeffs(w0)?;
            if w0.norm_linf_1() > tau {
                project(w0)?
            } else {
                w0.clone()
            }
        }
        None => GroupMatrix::zeros(problem.features(), problem.tasks()),
    };
    let mut f = objective(problem, &w)?;
    let mut trace = Vec::new();
    let mut iterates = Vec::new();
    let mut max_violation = w.norm_linf_1() - tau;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iter {
        let g = gradient(problem, &w)?;
        if let Some(bad) = g.as_slice().iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient entry {bad} at iteration {}",
                iterations + 1
            )));
        }
        let step_to = |alpha: f64| -> GroupMatrix {
            let mut a = w.clone();
            for (ai, gi) in a.as_mut_slice().iter_mut().zip(g.as_slice()) {
                *ai -= alpha * gi;
            }
            a
        };

        let (next, f_next) = match opts.step {
            StepPolicy::InverseLipschitz | StepPolicy::Fixed(_) => {
                let alpha = match opts.step {
                    StepPolicy::Fixed(a) => a,
                    _ => 1.0 / lipschitz,
                };
                let next = project(&step_to(alpha))?;
                let f_next = objective(problem, &next)?;
                (next, f_next)
            }
            StepPolicy::Armijo {
                sufficient_decrease,
                max_backtracks,
            } => {
                let mut alpha = 2.0 / lipschitz;
                let mut accepted = None;
                for _ in 0..=max_backtracks {
                    let cand = project(&step_to(alpha))?;
                    let f_cand = objective(problem, &cand)?;
                    let slope: f64 = g
                        .as_slice()
                        .iter()
                        .zip(cand.as_slice().iter().zip(w.as_slice()))
                        .map(|(gi, (c, wi))| gi * (c - wi))
                        .sum();
                    if f_cand <= f + sufficient_decrease * slope {
                        accepted = Some((cand, f_cand));
                        break;
                    }
                    alpha *= 0.5;
                }
                match accepted {
                    Some(a) => a,
                    None => break,
                }
            }
        };

        iterations += 1;
        max_violation = max_violation.max(next.norm_linf_1() - tau);
        let moved = next.distance(&w);
        w = next;
        f = f_next;
        trace.push(f);
        if opts.record_iterates {
            iterates.push(w.clone());
        }
        if moved < opts.tol {
            converged = true;
            break;
        }
    }

    Ok(MtlResult {
        coefficients: w,
        objective_trace: trace,
        iterations,
        converged,
        projection_times,
        max_violation,
        iterates,
    })
}
