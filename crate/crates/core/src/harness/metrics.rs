use crate::matrix::GroupMatrix;

/// Quality of a projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `| ‖X‖∞,1 − τ |`.
    pub error: f64,
    /// `100 · (rows of X with a nonzero entry) / M`.
    pub sparsity_percent: f64,
}

/// A row counts as nonzero only if some entry differs from exactly 0.
pub fn metrics(x: &GroupMatrix, _b: &GroupMatrix, tau: f64) -> Metrics {
    Metrics {
        error: (x.norm_linf_1() - tau).abs(),
        sparsity_percent: 100.0 * x.nonzero_rows() as f64 / x.rows() as f64,
    }
}
