use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linfball::harness::{
    gen_mtl_instance, metrics, read_matrix, run_bench, summarize, write_csv, write_matrix,
    BenchConfig, Distribution, MatrixFormat,
};
use linfball::mtl::{pgd_solve, MtlProblem, PgdOptions, StepPolicy};
use linfball::oracle::{bisect_project, check_kkt};
use linfball::{Error, Method, MethodProjector, Projector};

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "linfball",
    version,
    about = "Projection onto the ℓ∞,1 ball and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a matrix file onto the ℓ∞,1 ball.
    Project(ProjectArgs),
    /// Run a benchmark grid and write one CSV row per measurement.
    Bench(BenchArgs),
    /// Solve a synthetic multi-task LASSO instance by projected gradient.
    Mtl(MtlArgs),
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Ball radius.
    #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
    tau: Option<f64>,
    /// Radius as a fraction of ‖B‖∞,1.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value = "newton")]
    method: Method,
    #[arg(long)]
    no_pruning: bool,
    #[arg(long)]
    no_initial_point: bool,
    #[arg(long)]
    output: PathBuf,
    /// Matrix format for input and output (default: from the extension).
    #[arg(long)]
    format: Option<MatrixFormat>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the bisection reference and the optimality check.
    #[arg(long, hide = true)]
    oracle: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML file with the benchmark grid; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Matrix sizes as MxN, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_size)]
    sizes: Option<Vec<(usize, usize)>>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    distribution: Option<Distribution>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_pruning: bool,
    #[arg(long)]
    no_initial_point: bool,
    /// Run trials in parallel; requires --no-timing.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct MtlArgs {
    /// Number of features (rows of the coefficient matrix).
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Number of samples.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Number of tasks.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Rows of the ground truth that are nonzero.
    #[arg(long, default_value_t = 5)]
    support: usize,
    /// τ as a fraction of the ground truth's ‖·‖∞,1.
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    #[arg(long, default_value = "newton")]
    method: Method,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Constant 1/L step instead of Armijo backtracking.
    #[arg(long)]
    fixed_step: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{s}` is not of the form MxN"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(m)?, parse(n)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Project(a) => project(a),
        Command::Bench(a) => bench(a),
        Command::Mtl(a) => mtl(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidArgument(_) | Error::NonFinite(_) | Error::Parse { .. } => {
                    EXIT_INVALID
                }
                Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
                _ => EXIT_FAILURE,
            })
        }
    }
}

fn project(a: ProjectArgs) -> Result<u8, Error> {
    let in_fmt = a
        .format
        .unwrap_or_else(|| MatrixFormat::from_path(&a.input));
    let out_fmt = a
        .format
        .unwrap_or_else(|| MatrixFormat::from_path(&a.output));
    let b = read_matrix(&a.input, in_fmt)?;
    let tau = match (a.tau, a.alpha) {
        (Some(t), _) => t,
        (None, Some(alpha)) => alpha * b.norm_linf_1(),
        (None, None) => unreachable!("clap requires one of --tau/--alpha"),
    };
    let projector = MethodProjector::new(a.method)
        .with_pruning(!a.no_pruning && a.method != Method::Grf)
        .with_initial_point(!a.no_initial_point && a.method != Method::Grf);
    let r = projector.project(&b, tau)?;
    write_matrix(&a.output, &r.x, out_fmt)?;
    let m = metrics(&r.x, &b, tau);
    println!(
        "method={} size={}x{} tau={tau:e} gamma={:e} iterations={} evaluations={} error={:e} sparsity_pct={:.4} elapsed_s={:.6} converged={}",
        a.method,
        b.rows(),
        b.cols(),
        r.gamma_star,
        r.iterations,
        r.evaluations,
        m.error,
        m.sparsity_percent,
        r.elapsed.as_secs_f64(),
        r.converged,
    );
    if a.oracle {
        let o = bisect_project(&b, tau, None)?;
        let kkt = check_kkt(&b, tau, &r.x, 1e-9 * tau.max(1.0));
        println!(
            "oracle gamma={:e} distance={:e} kkt: {kkt}",
            o.gamma_star,
            r.x.distance(&o.x)
        );
    }
    Ok(if r.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn bench(a: BenchArgs) -> Result<u8, Error> {
    let mut cfg = match &a.config {
        Some(path) => BenchConfig::from_file(path)?,
        None => BenchConfig::new(
            a.sizes.clone().unwrap_or_else(|| vec![(2000, 100)]),
            a.alphas.clone().unwrap_or_else(|| vec![1e-4, 5e-4, 1e-3]),
        ),
    };
    if let Some(s) = a.sizes {
        cfg.sizes = s;
    }
    if let Some(al) = a.alphas {
        cfg.alphas = al;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(m) = a.methods {
        cfg.methods = m;
    }
    if let Some(d) = a.distribution {
        cfg.distribution = d;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.out.is_some() {
        cfg.output_path = a.out;
    }
    cfg.pruning &= !a.no_pruning;
    cfg.initial_point &= !a.no_initial_point;
    cfg.parallel |= a.parallel;
    cfg.timing &= !a.no_timing;

    let out_path = cfg.output_path.take();
    let records = run_bench(&cfg)?;
    if let Some(path) = &out_path {
        write_csv(path, &records)?;
    }

    println!(
        "{:>11} {:>8} {:>7} {:>6} {:>10} {:>8} {:>8} {:>11} {:>11} {:>8} {:>9}",
        "size",
        "alpha",
        "method",
        "trials",
        "mean_err",
        "iters",
        "evals",
        "mean_s",
        "median_s",
        "sparse%",
        "speedup"
    );
    for s in summarize(&records) {
        println!(
            "{:>11} {:>8.1e} {:>7} {:>6} {:>10.2e} {:>8.2} {:>8.2} {:>11.3e} {:>11.3e} {:>8.3} {:>9}",
            format!("{}x{}", s.size.0, s.size.1),
            s.alpha,
            s.method.as_str(),
            s.trials,
            s.mean_error,
            s.mean_iterations,
            s.mean_evaluations,
            s.mean_elapsed_s,
            s.median_elapsed_s,
            s.mean_sparsity_pct,
            s.speedup_vs_grf
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into()),
        );
    }
    if cfg.timing {
        println!("(speedups are relative to GRF on this machine)");
    }
    let failed = records.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        eprintln!("{failed} runs did not converge");
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

fn mtl(a: MtlArgs) -> Result<u8, Error> {
    if a.m == 0 || a.n == 0 || a.k == 0 || a.support > a.m {
        return Err(Error::InvalidArgument(
            "need m, n, k ≥ 1 and support ≤ m".into(),
        ));
    }
    if a.alpha.is_nan() || a.alpha <= 0.0 {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    let inst = gen_mtl_instance(a.n, a.m, a.k, a.support, a.noise, a.seed);
    let tau = a.alpha * inst.truth.norm_linf_1();
    let problem = MtlProblem::new(inst.design, inst.targets, tau)?;
    let opts = PgdOptions {
        step: if a.fixed_step {
            StepPolicy::InverseLipschitz
        } else {
            StepPolicy::armijo()
        },
        max_iter: a.max_iter,
        tol: a.tol,
        ..Default::default()
    };
    let r = pgd_solve(&problem, &MethodProjector::new(a.method), &opts)?;
    let selected: Vec<usize> = (0..r.coefficients.rows())
        .filter(|&m| r.coefficients.row(m).iter().any(|&v| v != 0.0))
        .collect();
    let recovered = inst.support.iter().all(|m| selected.contains(m));
    println!(
        "method={} tau={tau:e} iterations={} converged={} objective={:e} projector_s={:.6} selected_rows={} true_rows={:?} support_recovered={}",
        a.method,
        r.iterations,
        r.converged,
        r.objective_trace.last().copied().unwrap_or(f64::NAN),
        r.total_projection_time().as_secs_f64(),
        selected.len(),
        inst.support,
        recovered,
    );
    Ok(if r.converged { 0 } else { EXIT_NOT_CONVERGED })
}
