//! Subcommands of the `betagraph` binary.
//!
//! Exit codes: 0 success, 2 usage, 3 validation, 4 non-convergence,
//! 5 I/O. Summary lines go to stdout, diagnostics to stderr.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use betagraph::estimator::EstimationReport;
use betagraph::generator::generate_instance;
use betagraph::ingest::{format_params, load_weights, save_matrix, write_atomic, LabeledWeights};
use betagraph::{
    compute_m, estimate, recovery_experiment, sufficient_stats, weight_bound_margin, Error,
    EstimatorConfig, GeneratorConfig, MatrixFormat,
};
use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_NONCONVERGENCE: u8 = 4;
pub const EXIT_IO: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "betagraph",
    version,
    about = "Estimate beta-weighted directed graph models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random graph and write its weights and true parameters.
    Generate(GenerateArgs),
    /// Estimate parameters from a weights or counts matrix.
    Estimate(EstimateArgs),
    /// Repeat generate-then-estimate over several seeds and score the fits.
    Experiment(ExperimentArgs),
    /// Estimate and check every convergence diagnostic.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = parse_vertex_count)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub param_low: f64,
    #[arg(long, default_value_t = 5.0)]
    pub param_high: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_matrix: PathBuf,
    #[arg(long)]
    pub out_params: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
}

impl SolverArgs {
    fn config(&self) -> EstimatorConfig {
        EstimatorConfig {
            tol: self.tol,
            residual_tol: self.residual_tol,
            max_iters: self.max_iters,
            record_trace: false,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "weights")]
    pub format: MatrixFormat,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_parser = parse_vertex_count)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub param_low: f64,
    #[arg(long, default_value_t = 5.0)]
    pub param_high: f64,
    /// Number of seeds to run.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// First seed; seeds run from here upward.
    #[arg(long, default_value_t = 0)]
    pub seed_start: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory for per-seed scatter data and the summary table.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "weights")]
    pub format: MatrixFormat,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn parse_vertex_count(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 2 {
        Err(format!("n must be at least 2, got {n}"))
    } else {
        Ok(n)
    }
}

/// Maps a library error to the documented exit code.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::NonConvergence { .. } | Error::Divergence { .. } | Error::Numeric { .. } => {
            EXIT_NONCONVERGENCE
        }
        Error::Domain { .. }
        | Error::InvalidWeight { .. }
        | Error::InvalidCount { .. }
        | Error::Dimension(_)
        | Error::DegenerateStats { .. }
        | Error::DegenerateInput(_)
        | Error::Parse { .. } => EXIT_VALIDATION,
    }
}

/// Output sinks, injectable for tests.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

pub fn run(cli: Cli, io: &mut Io<'_>) -> u8 {
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(&args, io),
        Command::Estimate(args) => cmd_estimate(&args, io),
        Command::Experiment(args) => cmd_experiment(&args, io),
        Command::Validate(args) => cmd_validate(&args, io),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load(input: &Path, format: MatrixFormat, io: &mut Io<'_>) -> Result<LabeledWeights, Error> {
    let w = load_weights(input, format)?;
    for warning in &w.warnings {
        let _ = writeln!(io.err, "warning: {warning}");
    }
    Ok(w)
}

pub fn cmd_generate(args: &GenerateArgs, io: &mut Io<'_>) -> Result<u8, Error> {
    let cfg = GeneratorConfig {
        n: args.n,
        param_low: args.param_low,
        param_high: args.param_high,
        seed: args.seed,
    };
    let (theta, w) = generate_instance(&cfg)?;
    save_matrix(&args.out_matrix, &w, None)?;
    write_atomic(
        &args.out_params,
        format_params(&theta, None, None).as_bytes(),
    )?;
    let _ = writeln!(
        io.out,
        "generated n={} seed={} -> {} , {}",
        args.n,
        args.seed,
        args.out_matrix.display(),
        args.out_params.display()
    );
    Ok(EXIT_OK)
}

pub fn cmd_estimate(args: &EstimateArgs, io: &mut Io<'_>) -> Result<u8, Error> {
    let w = load(&args.input, args.format, io)?;
    let stats = sufficient_stats(&w.matrix);
    let rep = estimate(&stats, &args.solver.config())?;
    let doc = format_params(&rep.theta_hat, w.labels.as_deref(), Some(&rep));
    write_atomic(&args.out, doc.as_bytes())?;
    let _ = writeln!(
        io.out,
        "converged n={} iterations={} final_residual={:.3e} jacobian_l1={:.6} -> {}",
        stats.n(),
        rep.iterations,
        rep.final_residual,
        rep.jacobian_l1,
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn scatter(truth: &[f64], est: &[f64]) -> String {
    let mut s = String::from("# true estimated\n");
    for (t, e) in truth.iter().zip(est) {
        let _ = writeln!(s, "{t:.16e} {e:.16e}");
    }
    s
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

pub fn cmd_experiment(args: &ExperimentArgs, io: &mut Io<'_>) -> Result<u8, Error> {
    std::fs::create_dir_all(&args.out).map_err(|source| Error::Io {
        path: args.out.clone(),
        source,
    })?;
    let est = args.solver.config();
    let mut summary = String::from("seed\tmse_a\tmse_b\titerations\tjacobian_l1\tstatus\n");
    let (mut mse_a, mut mse_b) = (Vec::new(), Vec::new());
    let mut failures = 0;
    for seed in args.seed_start..args.seed_start + args.seeds {
        let cfg = GeneratorConfig {
            n: args.n,
            param_low: args.param_low,
            param_high: args.param_high,
            seed,
        };
        match recovery_experiment(&cfg, &est) {
            Ok(r) => {
                let theta = &r.estimate.theta_hat;
                write_atomic(
                    args.out.join(format!("seed_{seed}_a.dat")),
                    scatter(r.truth.a(), theta.a()).as_bytes(),
                )?;
                write_atomic(
                    args.out.join(format!("seed_{seed}_b.dat")),
                    scatter(r.truth.b(), theta.b()).as_bytes(),
                )?;
                let _ = writeln!(
                    summary,
                    "{seed}\t{:.6e}\t{:.6e}\t{}\t{:.6}\tok",
                    r.mse_a, r.mse_b, r.estimate.iterations, r.estimate.jacobian_l1
                );
                let _ = writeln!(
                    io.out,
                    "seed {seed}: MSE_a={:.6} MSE_b={:.6} iterations={}",
                    r.mse_a, r.mse_b, r.estimate.iterations
                );
                mse_a.push(r.mse_a);
                mse_b.push(r.mse_b);
            }
            Err(e) if matches!(e, Error::Io { .. }) => return Err(e),
            Err(e) => {
                failures += 1;
                let _ = writeln!(summary, "{seed}\tnan\tnan\t-\t-\tfailed: {e}");
                let _ = writeln!(io.err, "seed {seed}: {e}");
            }
        }
    }
    let (ma, mb) = (median(&mut mse_a), median(&mut mse_b));
    let cell = |x: f64| {
        if x.is_nan() {
            "nan".to_string()
        } else {
            format!("{x:.6e}")
        }
    };
    let _ = writeln!(
        summary,
        "median\t{}\t{}\t-\t-\t{} of {} ok",
        cell(ma),
        cell(mb),
        mse_a.len(),
        args.seeds
    );
    write_atomic(args.out.join("summary.tsv"), summary.as_bytes())?;
    let _ = writeln!(
        io.out,
        "median MSE_a={ma:.6} MSE_b={mb:.6} ({} of {} seeds converged)",
        mse_a.len(),
        args.seeds
    );
    Ok(if failures == 0 {
        EXIT_OK
    } else {
        EXIT_NONCONVERGENCE
    })
}

/// One line of the validation report.
struct Check {
    name: &'static str,
    value: String,
    pass: bool,
}

pub fn cmd_validate(args: &ValidateArgs, io: &mut Io<'_>) -> Result<u8, Error> {
    let w = load(&args.input, args.format, io)?;
    let stats = sufficient_stats(&w.matrix);
    let margin = weight_bound_margin(&w.matrix);
    let m = compute_m(&stats);
    let mut checks = vec![
        Check {
            name: "bound_margin",
            value: format!("{margin:.9e}"),
            pass: margin > 0.0,
        },
        Check {
            name: "M",
            value: format!("{m:.12e}"),
            pass: m > std::f64::consts::LN_2,
        },
    ];
    let cfg = args.solver.config();
    let (report, failure): (Option<EstimationReport>, Option<Error>) = match estimate(&stats, &cfg)
    {
        Ok(r) => (Some(r), None),
        Err(Error::NonConvergence { report }) => {
            let e = Error::NonConvergence {
                report: report.clone(),
            };
            (Some(*report), Some(e))
        }
        Err(e) => (None, Some(e)),
    };
    if let Some(r) = &report {
        checks.extend([
            Check {
                name: "epsilon",
                value: format!("{:.12e}", r.epsilon),
                pass: r.epsilon > 0.0,
            },
            Check {
                name: "iterations",
                value: r.iterations.to_string(),
                pass: r.converged,
            },
            Check {
                name: "monotone",
                value: r.monotone.to_string(),
                pass: r.monotone,
            },
            Check {
                name: "final_residual",
                value: format!("{:.3e}", r.final_residual),
                pass: r.final_residual <= cfg.residual_tol,
            },
            Check {
                name: "jacobian_l1",
                value: format!("{:.9}", r.jacobian_l1),
                pass: r.jacobian_l1 < 1.0,
            },
        ]);
    }
    for c in &checks {
        let _ = writeln!(
            io.out,
            "{:<20} {:<24} {}",
            c.name,
            c.value,
            if c.pass { "ok" } else { "FAIL" }
        );
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if let Some(e) = &failure {
        let _ = writeln!(io.err, "estimation failed: {e}");
    }
    if failed.is_empty() && failure.is_none() {
        let _ = writeln!(io.out, "all checks passed");
        return Ok(EXIT_OK);
    }
    let _ = writeln!(io.err, "failed checks: {}", failed.join(", "));
    Ok(match &failure {
        Some(e) => exit_code(e),
        None => EXIT_VALIDATION,
    })
}
