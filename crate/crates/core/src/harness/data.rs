//! Seeded synthetic matrices.
//!
//! All generators draw from ChaCha8 (`rand_chacha`) seeded through
//! `seed_from_u64`, so a seed names the same stream on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal, Uniform};

use crate::matrix::GroupMatrix;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows × cols` matrix with i.i.d. entries uniform on `[−0.5, 0.5]`.
///
/// # Panics
/// If either dimension is zero.
pub fn gen_uniform(rows: usize, cols: usize, seed: u64) -> GroupMatrix {
    let mut rng = rng(seed);
    let dist = Uniform::new_inclusive(-0.5, 0.5);
    let data = (0..rows * cols).map(|_| dist.sample(&mut rng)).collect();
    GroupMatrix::from_vec(rows, cols, data).expect("dimensions must be positive")
}

/// Rows with uniformly drawn directions whose ℓ1 norms are exponentially
/// distributed with mean `scale`. Most rows are small, a few are large, so
/// row pruning removes the bulk of the matrix early.
///
/// # Panics
/// If either dimension is zero or `scale` is not positive.
pub fn gen_laplacian_rows(rows: usize, cols: usize, seed: u64, scale: f64) -> GroupMatrix {
    assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
    let mut rng = rng(seed);
    let dir = Uniform::new_inclusive(-0.5, 0.5);
    let radius = Exp::new(1.0 / scale).expect("positive rate");
    let mut data = Vec::with_capacity(rows * cols);
    let mut row = vec![0.0f64; cols];
    for _ in 0..rows {
        let l1 = loop {
            for v in row.iter_mut() {
                *v = dir.sample(&mut rng);
            }
            let l1: f64 = row.iter().map(|v| v.abs()).sum();
            if l1 > 0.0 {
                break l1;
            }
        };
        let r: f64 = radius.sample(&mut rng);
        data.extend(row.iter().map(|v| v * r / l1));
    }
    GroupMatrix::from_vec(rows, cols, data).expect("dimensions must be positive")
}

/// Seed for one benchmark trial, mixed with SplitMix64 so neighbouring
/// trials get unrelated streams.
pub fn trial_seed(base: u64, size_index: usize, trial: usize) -> u64 {
    let mut z = base
        ^ (size_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Multi-task regression instance with a known row-sparse coefficient matrix.
#[derive(Debug, Clone)]
pub struct MtlInstance {
    /// `samples × features`, Gaussian entries scaled by `1/√samples`.
    pub design: GroupMatrix,
    /// `samples × tasks`.
    pub targets: GroupMatrix,
    /// `features × tasks` ground truth.
    pub truth: GroupMatrix,
    /// Nonzero rows of `truth`, ascending.
    pub support: Vec<usize>,
}

/// Draws `support` feature rows at random, fills them with entries of
/// magnitude in `[1, 2]` and random sign, and sets
/// `targets = design · truth + noise · N(0, 1)`.
///
/// # Panics
/// If any dimension is zero or `support > features`.
pub fn gen_mtl_instance(
    samples: usize,
    features: usize,
    tasks: usize,
    support: usize,
    noise: f64,
    seed: u64,
) -> MtlInstance {
    assert!(support <= features, "support larger than feature count");
    let mut rng = rng(seed);
    let scale = 1.0 / (samples as f64).sqrt();
    let data = (0..samples * features)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let design = GroupMatrix::from_vec(samples, features, data).expect("positive dimensions");

    let mut rows: Vec<usize> = rand::seq::index::sample(&mut rng, features, support).into_vec();
    rows.sort_unstable();
    let mut truth = GroupMatrix::zeros(features, tasks);
    for &m in &rows {
        for v in truth.row_mut(m) {
            let mag = rng.gen_range(1.0..=2.0);
            *v = if rng.gen::<bool>() { mag } else { -mag };
        }
    }
    let mut targets = design.matmul(&truth).expect("conformant shapes");
    for v in targets.as_mut_slice() {
        *v += noise * rng.sample::<f64, _>(StandardNormal);
    }
    MtlInstance {
        design,
        targets,
        truth,
        support: rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_deterministic_and_in_range() {
        assert_eq!(gen_uniform(2, 2, 17), gen_uniform(2, 2, 17));
        assert_ne!(gen_uniform(2, 2, 17), gen_uniform(2, 2, 18));
        let b = gen_uniform(2000, 100, 5);
        assert!(b.as_slice().iter().all(|v| (-0.5..=0.5).contains(v)));
    }

    #[test]
    fn laplacian_rows_have_exponential_l1_norms() {
        assert_eq!(
            gen_laplacian_rows(5, 4, 1, 2.0),
            gen_laplacian_rows(5, 4, 1, 2.0)
        );
        let scale = 3.0;
        let b = gen_laplacian_rows(10_000, 20, 42, scale);
        let norms = b.row_l1_norms();
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        assert!((mean - scale).abs() <= 0.05 * scale, "mean {mean}");
    }

    #[test]
    fn trial_seeds_differ() {
        let a = trial_seed(1, 0, 0);
        assert_ne!(a, trial_seed(1, 0, 1));
        assert_ne!(a, trial_seed(1, 1, 0));
        assert_eq!(a, trial_seed(1, 0, 0));
    }

    #[test]
    fn mtl_instance_support() {
        let inst = gen_mtl_instance(40, 30, 3, 4, 0.0, 9);
        assert_eq!(inst.support.len(), 4);
        assert_eq!(inst.truth.nonzero_rows(), 4);
        let fit = inst.design.matmul(&inst.truth).unwrap();
        assert_eq!(fit, inst.targets);
    }
}
