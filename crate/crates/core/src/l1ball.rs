//! Projection of a single vector onto an ℓ1 ball.
//!
//! Every ℓ1 projection reduces to finding the soft-threshold `λ` with
//! `Σ max(|u_i| − λ, 0) = radius`. Two routes are provided: an exact sort
//! over the magnitudes ([`project_l1_sort`]) and the Michelot fixed-point
//! iteration with in-place pruning ([`project_l1_michelot`]), which is the
//! kernel the matrix projectors call once per row.

use crate::error::{Error, Result};
use crate::matrix::l1_norm;

/// Result of projecting one vector onto an ℓ1 ball.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Projection {
    pub projected: Vec<f64>,
    /// Soft-threshold applied to every entry; zero when the input was
    /// already inside the ball.
    pub threshold: f64,
    /// Number of entries with `|u_i| > threshold` (zero for interior inputs).
    pub support_size: usize,
}

/// Soft-thresholding `sign(v) ⊙ max(|v| − κ, 0)`.
pub fn shrink(v: &[f64], kappa: f64) -> Result<Vec<f64>> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::invalid(format!(
            "shrink threshold must be finite and nonnegative, got {kappa}"
        )));
    }
    check_finite(v)?;
    Ok(v.iter().map(|&x| shrink_scalar(x, kappa)).collect())
}

#[inline]
pub(crate) fn shrink_scalar(x: f64, kappa: f64) -> f64 {
    let m = x.abs() - kappa;
    if m > 0.0 {
        m.copysign(x)
    } else {
        0.0
    }
}

/// ℓ1 norm of `shrink(v, κ)` without materialising the vector.
#[inline]
pub(crate) fn shrink_l1(v: &[f64], kappa: f64) -> f64 {
    v.iter().map(|x| (x.abs() - kappa).max(0.0)).sum()
}

/// Reference projection: sort magnitudes in decreasing order and take the
/// last breakpoint `l` where `(Σ_{n≤l} v_n − radius)/l < v_l`.
pub fn project_l1_sort(u: &[f64], radius: f64) -> Result<L1Projection> {
    check_radius(radius)?;
    check_finite(u)?;
    if l1_norm(u) <= radius {
        return Ok(interior(u));
    }
    let (threshold, support_size) = sort_threshold(u, radius);
    Ok(L1Projection {
        projected: u.iter().map(|&x| shrink_scalar(x, threshold)).collect(),
        threshold,
        support_size,
    })
}

/// Michelot iteration `λ_{k+1} = (Σ_{|u_i|>λ_k} |u_i| − radius) / #{|u_i| > λ_k}`,
/// started from the full support and stopped once the support stops shrinking.
pub fn project_l1_michelot(u: &[f64], radius: f64) -> Result<L1Projection> {
    michelot_impl(u, radius, None)
}

/// Same as [`project_l1_michelot`], also returning every threshold iterate.
pub fn project_l1_michelot_traced(u: &[f64], radius: f64) -> Result<(L1Projection, Vec<f64>)> {
    let mut trace = Vec::new();
    let proj = michelot_impl(u, radius, Some(&mut trace))?;
    Ok((proj, trace))
}

fn michelot_impl(u: &[f64], radius: f64, trace: Option<&mut Vec<f64>>) -> Result<L1Projection> {
    check_radius(radius)?;
    check_finite(u)?;
    let total = l1_norm(u);
    if total <= radius {
        return Ok(interior(u));
    }
    let mut work: Vec<f64> = u.iter().map(|x| x.abs()).collect();
    let (threshold, _) = michelot_threshold(&mut work, total, radius, trace);
    // Ties at the threshold contribute nothing; count strictly above it.
    let support_size = u.iter().filter(|x| x.abs() > threshold).count();
    Ok(L1Projection {
        projected: u.iter().map(|&x| shrink_scalar(x, threshold)).collect(),
        threshold,
        support_size,
    })
}

/// Michelot threshold over a buffer of magnitudes whose sum is `total > radius`.
///
/// Survivors are compacted to the front of `work` by swapping; the buffer is
/// reordered but never reallocated. Returns `(λ, support)` where `support`
/// is the length of the final surviving prefix.
pub(crate) fn michelot_threshold(
    work: &mut [f64],
    total: f64,
    radius: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> (f64, usize) {
    debug_assert!(total > radius);
    let mut len = work.len();
    let mut lambda = (total - radius) / len as f64;
    loop {
        if let Some(t) = trace.as_deref_mut() {
            t.push(lambda);
        }
        let mut kept = 0;
        let mut sum = 0.0;
        for i in 0..len {
            let v = work[i];
            if v > lambda {
                work.swap(kept, i);
                kept += 1;
                sum += v;
            }
        }
        if kept == len || kept == 0 {
            break;
        }
        len = kept;
        lambda = (sum - radius) / len as f64;
    }
    (lambda, len)
}

/// Sort-based threshold for `‖u‖1 > radius`. Returns `(λ*, #{|u_i| > λ*})`.
pub fn sort_threshold(u: &[f64], radius: f64) -> (f64, usize) {
    let mut v: Vec<f64> = u.iter().map(|x| x.abs()).collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut threshold = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        cumsum += vi;
        let candidate = (cumsum - radius) / (i + 1) as f64;
        if candidate < vi {
            threshold = candidate;
        } else {
            break;
        }
    }
    let threshold = threshold.max(0.0);
    let support = v.iter().take_while(|&&x| x > threshold).count();
    (threshold, support)
}

fn interior(u: &[f64]) -> L1Projection {
    L1Projection {
        projected: u.to_vec(),
        threshold: 0.0,
        support_size: 0,
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "ℓ1 ball radius must be positive and finite, got {radius}"
        )))
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(format!("entry {i} is {}", v[i]))),
        None => Ok(()),
    }
}
