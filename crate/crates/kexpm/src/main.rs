use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kexpm::run::{Command, RunConfig, DEFAULT_OUT_DIR};
use kexpm::{execute, exit};
use kexpm_core::bounds::{CROUZEIX, SIMPSON_INTERVALS};
use kexpm_core::problems::DEFAULT_SEED;
use kexpm_core::C64;

/// Krylov approximation of exp(-tA)v with a posteriori and a priori error bounds.
#[derive(Debug, Parser)]
#[command(name = "kexpm", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Reproduce one of the four experiments (CSV and SVG per run).
    Example,
    /// Compute exp(-tau A) v for a Matrix Market matrix.
    Expmv {
        /// Compute exp(i tau H) v for a symmetric or hermitian H instead.
        #[arg(long)]
        unitary: bool,
    },
    /// Tabulate a priori bounds for an experiment or a matrix.
    Bounds {
        #[arg(long)]
        unitary: bool,
    },
    /// Print elliptic integrals and Jacobi functions.
    EllipticDebug {
        /// Parameter m in [0, 1).
        #[arg(long)]
        m: Option<f64>,
        /// Complex argument as `re` or `re,im`.
        #[arg(long, value_parser = parse_complex)]
        u: Option<C64>,
        /// Side ratio c/((b-a)/2) to invert.
        #[arg(long)]
        ratio: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment number, 1 to 4.
    #[arg(long, global = true)]
    example: Option<u32>,
    /// Comma-separated time steps.
    #[arg(long, global = true, value_delimiter = ',')]
    tau: Vec<f64>,
    /// Stopping tolerance on the a posteriori estimate.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Iteration cap.
    #[arg(long = "max-k", global = true, default_value_t = 120)]
    max_k: usize,
    /// Matrix Market input.
    #[arg(long, global = true)]
    matrix: Option<PathBuf>,
    /// Start vector, one `re` or `re im` per line.
    #[arg(long, global = true)]
    vector: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "KEXPM_OUT", default_value = DEFAULT_OUT_DIR)]
    out: PathBuf,
    /// Seed for start vectors.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Simpson subintervals for the estimator (even).
    #[arg(long, global = true, default_value_t = SIMPSON_INTERVALS)]
    simpson: usize,
    /// Crouzeix constant in the non-Hermitian bound.
    #[arg(long, global = true, default_value_t = CROUZEIX)]
    crouzeix: f64,
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

fn config(cli: Cli) -> RunConfig {
    let command = match cli.command {
        Cmd::Example => Command::Example,
        Cmd::Expmv { .. } => Command::Expmv,
        Cmd::Bounds { .. } => Command::Bounds,
        Cmd::EllipticDebug { .. } => Command::EllipticDebug,
    };
    let mut cfg = RunConfig::new(command);
    let c = cli.common;
    cfg.example_id = c.example;
    cfg.tau_list = c.tau;
    cfg.tol = c.tol;
    cfg.max_k = c.max_k;
    cfg.matrix_path = c.matrix;
    cfg.vector_path = c.vector;
    cfg.out_dir = c.out;
    cfg.seed = c.seed;
    cfg.simpson_n = c.simpson;
    cfg.q_constant = c.crouzeix;
    match cli.command {
        Cmd::Expmv { unitary } | Cmd::Bounds { unitary } => cfg.unitary = unitary,
        Cmd::EllipticDebug { m, u, ratio } => {
            cfg.m = m;
            cfg.u = u;
            cfg.ratio = ratio;
        }
        Cmd::Example => {}
    }
    cfg
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&config(cli)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::from(exit::SUCCESS as u8)
        }
        Err(e) => {
            eprintln!("kexpm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
