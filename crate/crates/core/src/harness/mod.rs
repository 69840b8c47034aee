//! Reproducibility surface: synthetic data, metrics, matrix files and the
//! benchmark driver used by the CLI.

pub mod bench;
pub mod data;
pub mod io;
pub mod metrics;

pub use bench::{
    run_bench, summarize, write_csv, BenchConfig, BenchRecord, BenchSummary, Distribution,
};
pub use data::{gen_laplacian_rows, gen_mtl_instance, gen_uniform, MtlInstance};
pub use io::{read_matrix, write_matrix, MatrixFormat};
pub use metrics::{metrics, Metrics};
