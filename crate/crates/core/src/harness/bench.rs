//! Benchmark driver: generate `B`, set `τ = α ‖B‖∞,1`, project, record.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::data::{gen_laplacian_rows, gen_uniform, trial_seed};
use crate::harness::metrics::metrics;
use crate::matrix::GroupMatrix;
use crate::{Method, MethodProjector, Projector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Uniform,
    LaplacianRows,
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Distribution::Uniform),
            "laplacian-rows" | "laplacian" => Ok(Distribution::LaplacianRows),
            other => Err(Error::invalid(format!("unknown distribution `{other}`"))),
        }
    }
}

fn default_trials() -> usize {
    1
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_distribution() -> Distribution {
    Distribution::Uniform
}
fn default_scale() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

/// Benchmark grid. Deserializable from TOML, e.g.
///
/// ```toml
/// sizes = [[2000, 100]]
/// alphas = [1e-4, 5e-4, 1e-3]
/// trials = 100
/// seed = 1
/// methods = ["newton", "grf", "srf"]
/// distribution = "uniform"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub sizes: Vec<(usize, usize)>,
    pub alphas: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_distribution")]
    pub distribution: Distribution,
    /// Mean row ℓ1 norm for `laplacian-rows`.
    #[serde(default = "default_scale")]
    pub laplacian_scale: f64,
    /// Pruning for the Newton and Steffensen projectors (GRF never prunes).
    #[serde(default = "yes")]
    pub pruning: bool,
    /// Shrink-based starting point for Newton and Steffensen.
    #[serde(default = "yes")]
    pub initial_point: bool,
    /// Run trials on the rayon pool. Refused while `timing` is on.
    #[serde(default)]
    pub parallel: bool,
    #[serde(default = "yes")]
    pub timing: bool,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl BenchConfig {
    pub fn new(sizes: Vec<(usize, usize)>, alphas: Vec<f64>) -> Self {
        Self {
            sizes,
            alphas,
            trials: 1,
            seed: 0,
            methods: default_methods(),
            distribution: Distribution::Uniform,
            laplacian_scale: 1.0,
            pruning: true,
            initial_point: true,
            parallel: false,
            timing: true,
            output_path: None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::invalid(format!("bench config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            location: e
                .span()
                .map(|s| format!("byte {}", s.start))
                .unwrap_or_else(|| "config".into()),
            message: e.message().to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&(m, n)| m == 0 || n == 0) {
            return Err(Error::invalid(
                "sizes must be a nonempty list of positive (M, N)",
            ));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::invalid(
                "alphas must be a nonempty list of values in (0, 1)",
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method is required"));
        }
        if !(self.laplacian_scale > 0.0 && self.laplacian_scale.is_finite()) {
            return Err(Error::invalid("laplacian_scale must be positive"));
        }
        if self.parallel && self.timing {
            return Err(Error::invalid(
                "parallel trials distort wall-clock timing; disable timing to run in parallel",
            ));
        }
        Ok(())
    }

    /// The matrix used for `trial` at size index `size_index`.
    pub fn matrix(&self, size_index: usize, trial: usize) -> GroupMatrix {
        let (m, n) = self.sizes[size_index];
        let seed = trial_seed(self.seed, size_index, trial);
        match self.distribution {
            Distribution::Uniform => gen_uniform(m, n, seed),
            Distribution::LaplacianRows => gen_laplacian_rows(m, n, seed, self.laplacian_scale),
        }
    }

    fn projector(&self, method: Method) -> MethodProjector {
        let p = MethodProjector::new(method);
        match method {
            Method::Grf => p,
            _ => p
                .with_pruning(self.pruning)
                .with_initial_point(self.initial_point),
        }
    }
}

/// One measurement. Only the first nine fields are written to CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub size_m: usize,
    pub size_n: usize,
    pub alpha: f64,
    pub method: Method,
    pub trial: usize,
    /// `| ‖X‖∞,1 − τ |`.
    pub error: f64,
    pub iterations: usize,
    pub elapsed_s: f64,
    pub sparsity_pct: f64,
    #[serde(skip)]
    pub evaluations: usize,
    #[serde(skip)]
    pub converged: bool,
    /// Rows removed by the first search-function evaluation.
    #[serde(skip)]
    pub first_pruned: usize,
}

pub const CSV_HEADER: &str =
    "size_m,size_n,alpha,method,trial,error,iterations,elapsed_s,sparsity_pct";

/// Runs the whole grid; records come out ordered by size, α, trial, method.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize, usize)> = (0..cfg.sizes.len())
        .flat_map(|s| {
            (0..cfg.alphas.len()).flat_map(move |a| (0..cfg.trials).map(move |t| (s, a, t)))
        })
        .collect();
    let run = |&(s, a, t): &(usize, usize, usize)| run_job(cfg, s, a, t);
    let chunks: Vec<Vec<BenchRecord>> = if cfg.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };
    let records: Vec<BenchRecord> = chunks.into_iter().flatten().collect();

    if let Some(path) = &cfg.output_path {
        write_csv(path, &records)?;
    }
    Ok(records)
}

fn run_job(
    cfg: &BenchConfig,
    size_index: usize,
    alpha_index: usize,
    trial: usize,
) -> Result<Vec<BenchRecord>> {
    let b = cfg.matrix(size_index, trial);
    let alpha = cfg.alphas[alpha_index];
    let tau = alpha * b.norm_linf_1();
    if b.norm_linf_1() <= tau {
        return Err(Error::InvalidState(format!(
            "‖B‖∞,1 = {} does not exceed τ = {tau}",
            b.norm_linf_1()
        )));
    }
    let mut out = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let projector = cfg.projector(method);
        let started = Instant::now();
        let result = projector.project(&b, tau)?;
        let elapsed = started.elapsed().as_secs_f64();
        let m = metrics(&result.x, &b, tau);
        out.push(BenchRecord {
            size_m: b.rows(),
            size_n: b.cols(),
            alpha,
            method,
            trial,
            error: m.error,
            iterations: result.iterations,
            elapsed_s: if cfg.timing { elapsed } else { 0.0 },
            sparsity_pct: m.sparsity_percent,
            evaluations: result.evaluations,
            converged: result.converged,
            first_pruned: result
                .active_trace
                .first()
                .map(|&a| b.rows() - a)
                .unwrap_or(0),
        });
    }
    Ok(out)
}

pub fn write_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e.into()))?;
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))
            .map_err(|e| Error::io(format!("writing {}", path.display()), e.into()))?;
    }
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::io(format!("writing {}", path.display()), e.into()))?;
    }
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Aggregate over the trials of one `(size, α, method)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub size: (usize, usize),
    pub alpha: f64,
    pub method: Method,
    pub trials: usize,
    pub mean_error: f64,
    pub max_error: f64,
    pub mean_iterations: f64,
    pub mean_evaluations: f64,
    pub mean_elapsed_s: f64,
    pub median_elapsed_s: f64,
    pub mean_sparsity_pct: f64,
    pub converged: usize,
    /// Mean GRF time over mean time of this method, when GRF ran in the same
    /// cell. Machine-relative.
    pub speedup_vs_grf: Option<f64>,
}

pub fn summarize(records: &[BenchRecord]) -> Vec<BenchSummary> {
    let mut cells: BTreeMap<(usize, usize, u64, usize), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.size_m, r.size_n, r.alpha.to_bits(), method_rank(r.method));
        cells.entry(key).or_default().push(r);
    }
    let mut out: Vec<BenchSummary> = cells
        .into_values()
        .map(|rs| {
            let n = rs.len() as f64;
            let mean = |f: &dyn Fn(&BenchRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
            let mut times: Vec<f64> = rs.iter().map(|r| r.elapsed_s).collect();
            times.sort_by(f64::total_cmp);
            let median = if times.len() % 2 == 1 {
                times[times.len() / 2]
            } else {
                0.5 * (times[times.len() / 2 - 1] + times[times.len() / 2])
            };
            BenchSummary {
                size: (rs[0].size_m, rs[0].size_n),
                alpha: rs[0].alpha,
                method: rs[0].method,
                trials: rs.len(),
                mean_error: mean(&|r| r.error),
                max_error: rs.iter().map(|r| r.error).fold(0.0, f64::max),
                mean_iterations: mean(&|r| r.iterations as f64),
                mean_evaluations: mean(&|r| r.evaluations as f64),
                mean_elapsed_s: mean(&|r| r.elapsed_s),
                median_elapsed_s: median,
                mean_sparsity_pct: mean(&|r| r.sparsity_pct),
                converged: rs.iter().filter(|r| r.converged).count(),
                speedup_vs_grf: None,
            }
        })
        .collect();

    let grf_times: BTreeMap<(usize, usize, u64), f64> = out
        .iter()
        .filter(|s| s.method == Method::Grf)
        .map(|s| ((s.size.0, s.size.1, s.alpha.to_bits()), s.mean_elapsed_s))
        .collect();
    for s in &mut out {
        if let Some(&g) = grf_times.get(&(s.size.0, s.size.1, s.alpha.to_bits())) {
            if s.mean_elapsed_s > 0.0 {
                s.speedup_vs_grf = Some(g / s.mean_elapsed_s);
            }
        }
    }
    out
}

fn method_rank(m: Method) -> usize {
    match m {
        Method::Grf => 0,
        Method::Srf => 1,
        Method::Newton => 2,
    }
}
