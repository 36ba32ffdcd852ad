//! `eigenbox` — guaranteed eigenvalue bounds for planar Schrödinger
//! operators, from the command line.
//!
//! `eigenbox run` sweeps a mesh hierarchy and prints a CSV bound table;
//! `eigenbox aitken` extrapolates a convergent sequence read from a file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eigenbox::driver::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "eigenbox", version, about = "Guaranteed eigenvalue bounds for −Δu + Vu = λu")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one benchmark sweep and print the bound table as CSV.
    Run(RunArgs),
    /// Aitken-extrapolate the limit of a sequence (one number per line).
    Aitken(AitkenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (`key = value` lines); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Domain: square8, lshape8, or unitsquare.
    #[arg(long)]
    domain: Option<String>,
    /// Potential: zero, harmonic, lattice, or anderson.
    #[arg(long)]
    potential: Option<String>,
    /// Seed of the random (anderson) potential.
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated methods: cr, ecr, mcr, rt, scr, s1.
    #[arg(long)]
    methods: Option<String>,
    /// Eigenpairs per method and level.
    #[arg(long)]
    k: Option<String>,
    /// Number of refinement levels (a cap in adaptive mode).
    #[arg(long)]
    levels: Option<String>,
    /// Refinement mode: uniform or adaptive (estimator-steered bisection).
    #[arg(long)]
    mode: Option<String>,
    /// Marking fraction for adaptive refinement, in (0, 1].
    #[arg(long)]
    theta: Option<String>,
    /// Adaptive budget: stop once the estimator space has this many dofs.
    #[arg(long)]
    max_dofs: Option<String>,
    /// Ignore boundary-edge tangential slopes in the error estimator.
    #[arg(long)]
    no_boundary_jumps: bool,
    /// Method whose first eigenpair drives adaptive refinement.
    #[arg(long)]
    estimator: Option<String>,
    /// Matrix size below which the solver densifies.
    #[arg(long)]
    dense_threshold: Option<String>,
    /// Residual tolerance of the iterative eigensolver.
    #[arg(long)]
    residual_tol: Option<String>,
    /// Seed of the eigensolver's starting block.
    #[arg(long)]
    solver_seed: Option<String>,
    /// Write each level's mesh into this directory.
    #[arg(long)]
    dump_mesh: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long = "out", alias = "output")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AitkenArgs {
    /// Sequence file: one number per line, `#` comments allowed.
    #[arg(long = "in")]
    input: PathBuf,
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ExperimentConfig::parse_text(&text)
                .map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    let overrides: [(&str, Option<&String>); 13] = [
        ("domain", args.domain.as_ref()),
        ("potential", args.potential.as_ref()),
        ("seed", args.seed.as_ref()),
        ("methods", args.methods.as_ref()),
        ("k", args.k.as_ref()),
        ("levels", args.levels.as_ref()),
        ("mode", args.mode.as_ref()),
        ("theta", args.theta.as_ref()),
        ("max_dofs", args.max_dofs.as_ref()),
        ("estimator", args.estimator.as_ref()),
        ("dense_threshold", args.dense_threshold.as_ref()),
        ("residual_tol", args.residual_tol.as_ref()),
        ("solver_seed", args.solver_seed.as_ref()),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            config.set(key, value).map_err(|e| e.to_string())?;
        }
    }
    if args.no_boundary_jumps {
        config
            .set("boundary_jumps", "false")
            .map_err(|e| e.to_string())?;
    }
    if let Some(dir) = &args.dump_mesh {
        config.dump_mesh = Some(dir.clone());
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn cmd_run(args: &RunArgs) -> Result<(), String> {
    let config = build_config(args)?;
    let out = driver::run(&config).map_err(|e| e.to_string())?;
    let csv = driver::render_csv(&out.reports);
    match &args.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_aitken(args: &AitkenArgs) -> Result<(), String> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| format!("cannot read {}: {e}", args.input.display()))?;
    let seq = driver::parse_sequence_text(&text).map_err(|e| e.to_string())?;
    let limit = driver::aitken(&seq).map_err(|e| e.to_string())?;
    println!("{limit}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Aitken(args) => cmd_aitken(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
