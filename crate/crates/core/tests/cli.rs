use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use linfball::harness::{read_matrix, MatrixFormat};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linfball"))
        .args(args)
        .output()
        .expect("spawning linfball")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn project_worked_example_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("b.csv");
    let output = dir.path().join("x.csv");
    fs::write(&input, "0.5,0.2\n0.1,0.1\n").unwrap();

    let o = run(&[
        "project",
        "--input",
        p(&input),
        "--tau",
        "0.3",
        "--output",
        p(&output),
        "--oracle",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = stdout(&o);
    assert!(out.contains("method=newton"), "{out}");
    assert!(out.contains("converged=true"), "{out}");
    assert!(out.contains("kkt: pass"), "{out}");

    let x = read_matrix(&output, MatrixFormat::Csv).unwrap();
    assert!((x[(0, 0)] - 0.3).abs() < 1e-12 && (x[(0, 1)] - 0.2).abs() < 1e-12);
    assert_eq!((x[(1, 0)], x[(1, 1)]), (0.0, 0.0));
}

#[test]
fn project_raw_round_trip_with_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("b.bin");
    let output = dir.path().join("x.bin");
    let b = linfball::harness::gen_uniform(30, 8, 5);
    linfball::harness::write_matrix(&input, &b, MatrixFormat::Raw).unwrap();

    for method in ["newton", "grf", "srf"] {
        let o = run(&[
            "project",
            "--input",
            p(&input),
            "--alpha",
            "0.01",
            "--method",
            method,
            "--output",
            p(&output),
        ]);
        assert_eq!(o.status.code(), Some(0), "{method}");
        let x = read_matrix(&output, MatrixFormat::Raw).unwrap();
        let tau = 0.01 * b.norm_linf_1();
        assert!(
            (x.norm_linf_1() - tau).abs() <= 1e-12 * tau.max(1.0),
            "{method}"
        );
    }
}

#[test]
fn invalid_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "0.5,x\n").unwrap();
    let out = dir.path().join("x.csv");

    let o = run(&[
        "project",
        "--input",
        p(&bad),
        "--tau",
        "1",
        "--output",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1, column 2"));

    fs::write(&bad, "0.5,1\n").unwrap();
    let o = run(&[
        "project",
        "--input",
        p(&bad),
        "--tau",
        "-1",
        "--output",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));

    // Unknown method is rejected by the argument parser.
    let o = run(&[
        "project",
        "--input",
        p(&bad),
        "--tau",
        "1",
        "--method",
        "bogus",
        "--output",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "project",
        "--input",
        p(&dir.path().join("nope.csv")),
        "--tau",
        "1",
        "--output",
        p(&dir.path().join("x.csv")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = run(&[
        "bench",
        "--sizes",
        "50x10,20x5",
        "--alphas",
        "1e-3,1e-2",
        "--trials",
        "2",
        "--out",
        p(&csv),
        "--seed",
        "3",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "size_m,size_n,alpha,method,trial,error,iterations,elapsed_s,sparsity_pct"
    );
    // 2 sizes × 2 alphas × 2 trials × 3 methods.
    assert_eq!(lines.count(), 24);
}

#[test]
fn bench_config_file_and_parallel_guard() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.toml");
    fs::write(
        &cfg,
        "sizes = [[40, 6]]\nalphas = [0.001]\ntrials = 3\nmethods = [\"newton\"]\ndistribution = \"laplacian-rows\"\n",
    )
    .unwrap();
    let o = run(&["bench", "--config", p(&cfg), "--parallel", "--no-timing"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("newton"));

    // Parallel runs with timing enabled would skew the measurements.
    let o = run(&["bench", "--config", p(&cfg), "--parallel"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mtl_recovers_support() {
    let o = run(&["mtl", "--seed", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("support_recovered=true"), "{out}");
    assert!(out.contains("converged=true"), "{out}");

    let o = run(&["mtl", "--support", "500"]);
    assert_eq!(o.status.code(), Some(2));
}
