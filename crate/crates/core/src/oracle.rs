//! Slow reference solver and optimality checker.
//!
//! Only the sort-based ℓ1 threshold is shared with the rest of the crate;
//! the Michelot kernel and the Newton machinery are never touched here.

use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::l1ball::sort_threshold;
use crate::linf1::{check_tau, ProjectionResult};
use crate::matrix::{l1_norm, linf_norm, GroupMatrix};

/// Pure bisection on the search function over `[0, max_m ‖b_m‖1]`.
///
/// `eps` is the final bracket width; defaults to `1e-13 · max_m ‖b_m‖1`.
pub fn bisect_project(b: &GroupMatrix, tau: f64, eps: Option<f64>) -> Result<ProjectionResult> {
    let started = Instant::now();
    check_tau(tau)?;
    if tau == 0.0 {
        let mut r = ProjectionResult::trivial(GroupMatrix::zeros(b.rows(), b.cols()), started);
        r.elapsed = started.elapsed();
        return Ok(r);
    }
    if b.norm_linf_1() <= tau {
        return Ok(ProjectionResult::trivial(b.clone(), started));
    }

    let row_l1 = b.row_l1_norms();
    let mut hi = row_l1.iter().copied().fold(0.0, f64::max);
    let mut lo = 0.0;
    let eps = eps.unwrap_or(1e-13 * hi);
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::invalid(format!(
            "bisection width must be positive, got {eps}"
        )));
    }

    let search = |gamma: f64| -> f64 {
        let mut sum = 0.0;
        for (m, &l1) in row_l1.iter().enumerate() {
            if l1 > gamma {
                sum += sort_threshold(b.row(m), gamma).0;
            }
        }
        sum - tau
    };

    let mut iterations = 0;
    let mut trace = Vec::new();
    while hi - lo > eps {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        trace.push(mid);
        if search(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let residual = search(gamma).abs();

    let mut x = GroupMatrix::zeros(b.rows(), b.cols());
    for (m, &l1) in row_l1.iter().enumerate() {
        if l1 > gamma {
            let lambda = sort_threshold(b.row(m), gamma).0;
            for (xi, &bi) in x.row_mut(m).iter_mut().zip(b.row(m)) {
                *xi = bi.abs().min(lambda).copysign(bi);
            }
        }
    }

    Ok(ProjectionResult {
        x,
        gamma_star: gamma,
        iterations,
        evaluations: iterations + 1,
        residual,
        elapsed: started.elapsed(),
        converged: true,
        gamma_trace: trace,
        active_trace: Vec::new(),
    })
}

/// Optimality condition checked by [`check_kkt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktClause {
    /// (a) `| ‖X‖∞,1 − τ | ≤ tol` (or `X = B` when `B` is inside the ball).
    Feasibility,
    /// (b) every row is zero or `sign(b) ⊙ min(|b|, c_m)` for its level `c_m`.
    ClampStructure,
    /// (c) the clamp levels `c_m` add up to `τ`.
    LevelSum,
    /// (d) `‖b_m − x_m‖1` is the same `γ` on every nonzero row and zero rows
    /// have `‖b_m‖1 ≤ γ`.
    CommonRadius,
}

impl fmt::Display for KktClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            KktClause::Feasibility => "(a) feasibility",
            KktClause::ClampStructure => "(b) clamp structure",
            KktClause::LevelSum => "(c) level sum",
            KktClause::CommonRadius => "(d) common radius",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// First violated clause with a description, if any.
    pub violation: Option<(KktClause, String)>,
    /// `γ` recovered from the nonzero rows.
    pub gamma: f64,
}

impl KktReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }

    pub fn clause(&self) -> Option<KktClause> {
        self.violation.as_ref().map(|(c, _)| *c)
    }

    fn fail(clause: KktClause, msg: String, gamma: f64) -> Self {
        Self {
            violation: Some((clause, msg)),
            gamma,
        }
    }
}

impl fmt::Display for KktReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.violation {
            None => write!(f, "pass (γ = {:e})", self.gamma),
            Some((c, msg)) => write!(f, "fail {c}: {msg}"),
        }
    }
}

/// Checks that `x` is the projection of `b` onto the ball of radius `tau`.
pub fn check_kkt(b: &GroupMatrix, tau: f64, x: &GroupMatrix, tol: f64) -> KktReport {
    use KktClause::*;

    if b.shape() != x.shape() {
        return KktReport::fail(
            Feasibility,
            format!("shape {:?} does not match input {:?}", x.shape(), b.shape()),
            0.0,
        );
    }
    if b.norm_linf_1() <= tau {
        let d = b
            .as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        return if d <= tol {
            KktReport {
                violation: None,
                gamma: 0.0,
            }
        } else {
            KktReport::fail(
                Feasibility,
                format!("input is inside the ball but X differs by {d:e}"),
                0.0,
            )
        };
    }

    let norm = x.norm_linf_1();
    if norm > tau + tol {
        return KktReport::fail(
            Feasibility,
            format!("‖X‖∞,1 = {norm} exceeds τ = {tau} by {:e}", norm - tau),
            0.0,
        );
    }

    let mut level_sum = 0.0;
    for m in 0..b.rows() {
        let (bm, xm) = (b.row(m), x.row(m));
        let level = linf_norm(xm);
        level_sum += level;
        if level > linf_norm(bm) + tol {
            return KktReport::fail(
                ClampStructure,
                format!("row {m} level {level} exceeds its input ℓ∞ norm"),
                0.0,
            );
        }
        for (i, (&xi, &bi)) in xm.iter().zip(bm).enumerate() {
            let want = bi.abs().min(level).copysign(bi);
            if (xi - want).abs() > tol {
                return KktReport::fail(
                    ClampStructure,
                    format!("entry ({m}, {i}) = {xi} is not the clamp {want} of {bi} at {level}"),
                    0.0,
                );
            }
        }
    }
    if (level_sum - tau).abs() > tol {
        return KktReport::fail(
            LevelSum,
            format!("clamp levels sum to {level_sum}, expected τ = {tau}"),
            0.0,
        );
    }

    let radii: Vec<Option<f64>> = (0..b.rows())
        .map(|m| {
            let xm = x.row(m);
            xm.iter()
                .any(|&v| v != 0.0)
                .then(|| b.row(m).iter().zip(xm).map(|(p, q)| (p - q).abs()).sum())
        })
        .collect();
    let gamma = radii.iter().flatten().copied().fold(0.0, f64::max);
    let rtol = tol * gamma.max(1.0);
    for (m, r) in radii.iter().enumerate() {
        match r {
            Some(r) if (gamma - r) > rtol => {
                return KktReport::fail(
                    CommonRadius,
                    format!("row {m} has ‖b − x‖1 = {r}, other rows reach γ = {gamma}"),
                    gamma,
                );
            }
            None if l1_norm(b.row(m)) > gamma + rtol => {
                return KktReport::fail(
                    CommonRadius,
                    format!(
                        "row {m} is zero but ‖b_m‖1 = {} exceeds γ = {gamma}",
                        l1_norm(b.row(m))
                    ),
                    gamma,
                );
            }
            _ => {}
        }
    }

    KktReport {
        violation: None,
        gamma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linf1::{newton_project, SolverOptions};

    fn example() -> GroupMatrix {
        GroupMatrix::from_rows(&[[0.5, 0.2], [0.1, 0.1]]).unwrap()
    }

    #[test]
    fn bisection_examples() {
        let r = bisect_project(&example(), 0.3, None).unwrap();
        assert!((r.gamma_star - 0.2).abs() <= 1e-12);
        let expect = GroupMatrix::from_rows(&[[0.3, 0.2], [0.0, 0.0]]).unwrap();
        assert!(r.x.distance(&expect) < 1e-12);

        let r = bisect_project(&example(), 2.0, None).unwrap();
        assert_eq!(r.x, example());

        let b = GroupMatrix::from_rows(&[[1.0, 0.4]]).unwrap();
        let r = bisect_project(&b, 0.5, None).unwrap();
        assert!(r.x.distance(&GroupMatrix::from_rows(&[[0.5, 0.4]]).unwrap()) < 1e-12);
    }

    #[test]
    fn bisection_is_deterministic() {
        let b = crate::harness::data::gen_uniform(30, 6, 99);
        let tau = 0.01 * b.norm_linf_1();
        let a = bisect_project(&b, tau, None).unwrap();
        let c = bisect_project(&b, tau, None).unwrap();
        assert_eq!(a.x, c.x);
        assert_eq!(a.gamma_star.to_bits(), c.gamma_star.to_bits());
    }

    #[test]
    fn kkt_accepts_solver_output() {
        let r = newton_project(&example(), 0.3, &SolverOptions::default()).unwrap();
        let rep = check_kkt(&example(), 0.3, &r.x, 1e-9);
        assert!(rep.passed(), "{rep}");
        assert!((rep.gamma - 0.2).abs() < 1e-12);
    }

    #[test]
    fn kkt_rejects_unprojected_input() {
        let rep = check_kkt(&example(), 0.3, &example(), 1e-9);
        assert_eq!(rep.clause(), Some(KktClause::Feasibility));
    }

    #[test]
    fn kkt_identifies_perturbations() {
        let b = crate::harness::data::gen_uniform(50, 10, 4);
        let tau = 0.01 * b.norm_linf_1();
        let x = newton_project(&b, tau, &SolverOptions::default())
            .unwrap()
            .x;
        let (m, _) = (0..b.rows())
            .map(|m| (m, linf_norm(x.row(m))))
            .find(|&(_, l)| l > 0.0)
            .unwrap();
        let level = linf_norm(x.row(m));

        // Raising a clamped entry breaks feasibility.
        let i_clamped = x.row(m).iter().position(|v| v.abs() == level).unwrap();
        let mut up = x.clone();
        up[(m, i_clamped)] += 1e-3 * up[(m, i_clamped)].signum();
        assert_eq!(
            check_kkt(&b, tau, &up, 1e-9).clause(),
            Some(KktClause::Feasibility)
        );

        // Lowering it keeps the norm below τ but the row is no longer a clamp
        // or the levels no longer add up.
        let mut down = x.clone();
        down[(m, i_clamped)] -= 1e-3 * down[(m, i_clamped)].signum();
        let clause = check_kkt(&b, tau, &down, 1e-9).clause();
        assert!(matches!(
            clause,
            Some(KktClause::ClampStructure | KktClause::LevelSum)
        ));

        // Perturbing a zero row breaks the clamp structure.
        let zero = (0..b.rows()).find(|&k| linf_norm(x.row(k)) == 0.0).unwrap();
        let mut z = x.clone();
        z[(zero, 0)] = 1e-3 * b[(zero, 0)].signum();
        let rep = check_kkt(&b, tau, &z, 1e-9);
        assert!(!rep.passed(), "{rep}");
    }

    #[test]
    fn kkt_flags_wrong_radius() {
        // Row levels sum to τ and each row is a clamp, but the ℓ1 radii differ.
        let b = GroupMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        let x = GroupMatrix::from_rows(&[[0.5, 0.0], [0.0, 0.0]]).unwrap();
        let rep = check_kkt(&b, 0.5, &x, 1e-9);
        assert_eq!(rep.clause(), Some(KktClause::CommonRadius));
        let good = GroupMatrix::from_rows(&[[0.25, 0.0], [0.25, 0.0]]).unwrap();
        assert!(check_kkt(&b, 0.5, &good, 1e-9).passed());
    }
}
