use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_betagraph");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("spawn betagraph")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn generate(dir: &Path, n: usize, seed: u64) -> (String, String) {
    let m = dir.join(format!("w_{n}_{seed}.csv"));
    let p = dir.join(format!("p_{n}_{seed}.csv"));
    let (m, p) = (
        m.to_str().unwrap().to_owned(),
        p.to_str().unwrap().to_owned(),
    );
    let out = run(&[
        "generate",
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out-matrix",
        &m,
        "--out-params",
        &p,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (m, p)
}

#[test]
fn single_vertex_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("w.csv");
    let p = dir.path().join("p.csv");
    let out = run(&[
        "generate",
        "--n",
        "1",
        "--out-matrix",
        m.to_str().unwrap(),
        "--out-params",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!m.exists() && !p.exists());
    assert_eq!(code(&run(&["estimate"])), 2);
    assert_eq!(code(&run(&["bogus"])), 2);
}

#[test]
fn generate_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, d) = (dir.path().join("a"), dir.path().join("b"));
    std::fs::create_dir_all(&a).unwrap();
    std::fs::create_dir_all(&d).unwrap();
    let (m1, p1) = generate(&a, 15, 42);
    let (m2, p2) = generate(&d, 15, 42);
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    let (m3, _) = generate(&a, 15, 43);
    assert_ne!(std::fs::read(&m1).unwrap(), std::fs::read(&m3).unwrap());
}

#[test]
fn estimate_writes_parameters_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = generate(dir.path(), 20, 7);
    let est = dir.path().join("est.csv");
    let out = run(&["estimate", "--input", &m, "--out", est.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("converged"));
    let text = std::fs::read_to_string(&est).unwrap();
    let doc = betagraph::ingest::parse_params(&text).unwrap();
    assert_eq!(doc.theta.n(), 20);
    assert_eq!(doc.report_value("converged"), Some("true"));
    let jac: f64 = doc.report_value("jacobian_l1").unwrap().parse().unwrap();
    assert!(jac < 1.0);
}

#[test]
fn unit_weight_is_a_validation_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "0,1.0,0.5\n0.5,0,0.5\n0.5,0.5,0\n").unwrap();
    let est = dir.path().join("est.csv");
    let out = run(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--out",
        est.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("w[1,2]"));
    assert!(!est.exists());
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.csv");
    let out = run(&[
        "estimate",
        "--input",
        "/no/such/file.csv",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 5);
}

#[test]
fn non_convergence_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = generate(dir.path(), 10, 1);
    let est = dir.path().join("est.csv");
    let out = run(&[
        "estimate",
        "--input",
        &m,
        "--max-iters",
        "3",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    assert!(!est.exists());
}

#[test]
fn bundled_counts_pipeline() {
    let data = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/data/synthetic_migration_34.csv"
    );
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.csv");
    let out = run(&[
        "estimate",
        "--input",
        data,
        "--format",
        "counts",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = betagraph::ingest::parse_params(&std::fs::read_to_string(&est).unwrap()).unwrap();
    assert_eq!(doc.labels.len(), 34);
    assert!(doc.labels.iter().any(|l| l == "Germany"));
    assert!(doc.theta.iter().all(|x| x.is_finite() && x > 0.0));

    let out = run(&["validate", "--input", data, "--format", "counts"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn experiment_at_smallest_size_reports_every_seed() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("exp");
    let out = run(&[
        "experiment",
        "--n",
        "2",
        "--seeds",
        "5",
        "--max-iters",
        "2000",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert!(matches!(code(&out), 0 | 4));
    let summary = std::fs::read_to_string(outdir.join("summary.tsv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 1 + 5 + 1);
    for seed in 0..5 {
        assert!(lines[1 + seed].starts_with(&format!("{seed}\t")));
    }
    assert!(lines[6].starts_with("median\t"));
}

#[test]
fn experiment_writes_scatter_data() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("exp");
    let out = run(&[
        "experiment",
        "--n",
        "12",
        "--seeds",
        "3",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    for seed in 0..3 {
        for block in ["a", "b"] {
            let text =
                std::fs::read_to_string(outdir.join(format!("seed_{seed}_{block}.dat"))).unwrap();
            let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
            assert_eq!(rows.len(), 12);
            assert!(rows.iter().all(|r| r
                .split_whitespace()
                .filter_map(|x| x.parse::<f64>().ok())
                .count()
                == 2));
        }
    }
    assert!(stdout(&out).contains("median MSE_a="));
}

#[test]
fn validate_is_permutation_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = generate(dir.path(), 12, 9);
    let w = betagraph::ingest::load_weights(&m, betagraph::MatrixFormat::Weights)
        .unwrap()
        .matrix;
    let perm = [3, 0, 11, 5, 1, 2, 9, 4, 10, 8, 6, 7];
    let permuted = dir.path().join("perm.csv");
    betagraph::ingest::save_matrix(&permuted, &w.permuted(&perm).unwrap(), None).unwrap();

    let a = run(&["validate", "--input", &m]);
    let b = run(&["validate", "--input", permuted.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let scalars = |o: &Output| -> Vec<String> { stdout(o).lines().map(str::to_owned).collect() };
    assert_eq!(scalars(&a), scalars(&b));
}

#[test]
fn validate_rejects_all_half_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("half.csv");
    std::fs::write(&input, "0,0.5,0.5\n0.5,0,0.5\n0.5,0.5,0\n").unwrap();
    let out = run(&["validate", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("FAIL"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}
