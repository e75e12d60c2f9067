//! The four commands behind the executable.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use kexpm_core::bounds::{
    aposteriori_estimate, best_apriori, bound_curve, reference_bounds, spectral_box, BoundContext, CROUZEIX,
    SIMPSON_INTERVALS,
};
use kexpm_core::conformal::{build_conformal, modulus_ratio, solve_modulus, SpectralBox};
use kexpm_core::elliptic::{complete_elliptic, Jacobi};
use kexpm_core::krylov::{krylov_approx, KrylovDecomposition, Process, Propagation};
use kexpm_core::operator::{LinearOperator, SparseMatrix, Structure};
use kexpm_core::problems::{
    example1, example2, example2_shifted, example3, example4, random_unit_vector, reference_solution, TestProblem,
    DEFAULT_SEED,
};
use kexpm_core::C64;

use crate::error::{CliError, Result};
use crate::mtx::read_matrix_market;
use crate::svg::{emit_svg, series_from_records};
use crate::table::{write_bound_rows, write_records, BoundRow};
use crate::vector::{read_vector, write_vector};

/// Output directory when neither `--out` nor `KEXPM_OUT` is given.
pub const DEFAULT_OUT_DIR: &str = "kexpm-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Example,
    Expmv,
    Bounds,
    EllipticDebug,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub example_id: Option<u32>,
    /// Empty means the command's defaults.
    pub tau_list: Vec<f64>,
    pub tol: f64,
    pub max_k: usize,
    pub matrix_path: Option<PathBuf>,
    pub vector_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub simpson_n: usize,
    pub q_constant: f64,
    /// `expmv` computes `e^{iτH}v` for a Hermitian `H`.
    pub unitary: bool,
    /// Parameter for `elliptic-debug`.
    pub m: Option<f64>,
    /// Jacobi argument for `elliptic-debug`.
    pub u: Option<C64>,
    /// Side ratio `c/((b−a)/2)` to invert in `elliptic-debug`.
    pub ratio: Option<f64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            example_id: None,
            tau_list: Vec::new(),
            tol: 1e-8,
            max_k: 120,
            matrix_path: None,
            vector_path: None,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            seed: DEFAULT_SEED,
            simpson_n: SIMPSON_INTERVALS,
            q_constant: CROUZEIX,
            unitary: false,
            m: None,
            u: None,
            ratio: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(CliError::Input(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.max_k == 0 {
            return Err(CliError::Input("--max-k must be at least 1".into()));
        }
        if self.simpson_n < 2 || !self.simpson_n.is_multiple_of(2) {
            return Err(CliError::Input(format!("--simpson must be even and at least 2, got {}", self.simpson_n)));
        }
        if !(self.q_constant > 0.0) || !self.q_constant.is_finite() {
            return Err(CliError::Input(format!("--crouzeix must be positive, got {}", self.q_constant)));
        }
        if let Some(bad) = self.tau_list.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(CliError::Input(format!("--tau values must be positive, got {bad}")));
        }
        Ok(())
    }

    fn taus_or(&self, defaults: &[f64]) -> Vec<f64> {
        if self.tau_list.is_empty() {
            defaults.to_vec()
        } else {
            self.tau_list.clone()
        }
    }
}

/// Dispatches on `cfg.command`; returns the text printed on success.
pub fn execute(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    match cfg.command {
        Command::Example => {
            let files = run_example(cfg)?;
            Ok(files.iter().map(|p| format!("{}\n", p.display())).collect())
        }
        Command::Expmv => {
            let s = expmv(cfg)?;
            if s.converged {
                Ok(s.report())
            } else {
                Err(CliError::NonConvergence { k: s.k, estimate: s.estimate })
            }
        }
        Command::Bounds => {
            let files = bounds(cfg)?;
            Ok(files.iter().map(|p| format!("{}\n", p.display())).collect())
        }
        Command::EllipticDebug => elliptic_debug(cfg),
    }
}

/// One `(problem, τ)` pair of an experiment.
#[derive(Debug, Clone)]
pub struct ExampleRun {
    pub name: String,
    pub problem: TestProblem,
    pub tau: f64,
}

/// The runs of example `id`, with the configured τ list or its defaults.
pub fn example_runs(cfg: &RunConfig) -> Result<Vec<ExampleRun>> {
    let id = cfg.example_id.ok_or_else(|| CliError::Input("--example is required".into()))?;
    let seed = cfg.seed;
    let mut params: Vec<(String, TestProblem)> = Vec::new();
    let taus = match id {
        1 => {
            params.push(("example1".into(), example1(seed)?));
            cfg.taus_or(&[10.0, 20.0, 30.0, 40.0])
        }
        2 => {
            for m in [0.01, 0.1, 0.9, 0.99] {
                params.push((format!("example2_m{m}"), example2(m, seed)?));
            }
            for sigma in [-1.0, -10.0] {
                params.push((format!("example2_shift{sigma}"), example2_shifted(sigma, seed)?));
            }
            cfg.taus_or(&[30.0])
        }
        3 => {
            params.push(("example3".into(), example3(seed)?));
            cfg.taus_or(&[2.0, 10.0, 20.0, 50.0])
        }
        4 => {
            params.push(("example4".into(), example4(seed)?));
            cfg.taus_or(&[2.0, 10.0, 20.0, 50.0])
        }
        _ => return Err(CliError::Input(format!("--example must be 1, 2, 3 or 4, got {id}"))),
    };
    let mut runs = Vec::new();
    for (name, problem) in &params {
        for &tau in &taus {
            runs.push(ExampleRun { name: format!("{name}_tau{tau}"), problem: problem.clone(), tau });
        }
    }
    Ok(runs)
}

fn process_for(op: &SparseMatrix) -> Process {
    if op.structure() == Structure::Hermitian {
        Process::Lanczos
    } else {
        Process::Arnoldi
    }
}

/// The full convergence history of one run against the exact solution.
pub fn run_history(run: &ExampleRun, cfg: &RunConfig) -> Result<Vec<kexpm_core::bounds::ConvergenceRecord>> {
    let p = &run.problem;
    let ctx = p.bound_context(run.tau)?.with_crouzeix(cfg.q_constant)?.with_simpson(cfg.simpson_n)?;
    let mut dec = KrylovDecomposition::start(&p.operator, &p.v, process_for(&p.operator))?;
    dec.extend(&p.operator, cfg.max_k)?;
    let exact = reference_solution(p, run.tau)?;
    Ok(bound_curve(&ctx, &dec, 1..=cfg.max_k, true, Some(&exact))?)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Write { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) }
}

/// Writes one CSV and one SVG per run; runs execute in parallel.
pub fn run_example(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let runs = example_runs(cfg)?;
    create_dir(&cfg.out_dir)?;
    let written: Vec<Vec<PathBuf>> = runs
        .par_iter()
        .map(|run| {
            let records = run_history(run, cfg)?;
            let csv_path = cfg.out_dir.join(format!("{}.csv", run.name));
            write_records(&records, create_file(&csv_path)?).map_err(|e| csv_error(&csv_path, e))?;
            let svg_path = cfg.out_dir.join(format!("{}.svg", run.name));
            let (ks, series) = series_from_records(&records);
            emit_svg(&run.name, &ks, &series, &svg_path)
                .map_err(|source| CliError::Write { path: svg_path.clone(), source })?;
            Ok(vec![csv_path, svg_path])
        })
        .collect::<Result<_>>()?;
    Ok(written.into_iter().flatten().collect())
}

/// A user matrix made ready for a Krylov process.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// The operator the process runs on; `iA` when `A` is skew-symmetric.
    pub op: SparseMatrix,
    pub process: Process,
    pub propagation: Propagation,
    pub bx: SpectralBox,
    pub box_estimated: bool,
}

impl Prepared {
    pub fn new(matrix: SparseMatrix, unitary: bool) -> Result<Self> {
        let (op, process, propagation) = match (matrix.structure(), unitary) {
            (Structure::SkewHermitian, _) => {
                let op = matrix.scaled(C64::new(0.0, 1.0)).with_structure(Structure::Hermitian);
                (op, Process::Lanczos, Propagation::Unitary)
            }
            (Structure::Hermitian, true) => (matrix, Process::Lanczos, Propagation::Unitary),
            (Structure::Hermitian, false) => (matrix, Process::Lanczos, Propagation::Decay),
            (Structure::General, true) => {
                return Err(CliError::Input("--unitary needs a symmetric or hermitian matrix".into()));
            }
            (Structure::General, false) => (matrix, Process::Arnoldi, Propagation::Decay),
        };
        let est = spectral_box(&op)?;
        Ok(Prepared { op, process, propagation, bx: est.bx, box_estimated: est.estimated })
    }

    pub fn context(&self, tau: f64, cfg: &RunConfig) -> Result<BoundContext> {
        let extent = self.bx.a.abs().max(self.bx.b.abs()).max(self.bx.c);
        let norm = self.op.norm_estimate().max(extent);
        let ctx = match self.propagation {
            Propagation::Decay => BoundContext::general(self.bx, tau, norm)?,
            Propagation::Unitary => BoundContext::skew(self.bx.a, self.bx.b, tau, norm)?,
        };
        Ok(ctx.with_crouzeix(cfg.q_constant)?.with_simpson(cfg.simpson_n)?)
    }
}

fn load_matrix(cfg: &RunConfig) -> Result<SparseMatrix> {
    let path = cfg.matrix_path.as_ref().ok_or_else(|| CliError::Input("--matrix is required".into()))?;
    let file = File::open(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
    read_matrix_market(BufReader::new(file)).map_err(|source| CliError::Parse { path: path.clone(), source })
}

fn load_start(cfg: &RunConfig, n: usize) -> Result<Vec<C64>> {
    let Some(path) = &cfg.vector_path else {
        return Ok(random_unit_vector(n, cfg.seed));
    };
    let file = File::open(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
    let v = read_vector(BufReader::new(file)).map_err(|source| CliError::Parse { path: path.clone(), source })?;
    if v.len() != n {
        return Err(CliError::Input(format!("{}: vector has {} entries, matrix has {n} rows", path.display(), v.len())));
    }
    Ok(v)
}

fn single_tau(cfg: &RunConfig) -> Result<f64> {
    match cfg.tau_list.as_slice() {
        [] => Ok(1.0),
        [tau] => Ok(*tau),
        _ => Err(CliError::Input("expmv takes a single --tau".into())),
    }
}

#[derive(Debug, Clone)]
pub struct ExpmvSummary {
    pub k: usize,
    pub estimate: f64,
    pub converged: bool,
    pub bx: SpectralBox,
    pub box_estimated: bool,
    pub elapsed: Duration,
    pub result_path: PathBuf,
    pub summary_path: PathBuf,
}

impl ExpmvSummary {
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "estimate = {:e}", self.estimate);
        let _ = writeln!(s, "converged = {}", self.converged);
        let _ = writeln!(s, "box = [{:e}, {:e}] x [-{:e}, {:e}]", self.bx.a, self.bx.b, self.bx.c, self.bx.c);
        let _ = writeln!(s, "box_source = {}", if self.box_estimated { "lanczos" } else { "dense" });
        let _ = writeln!(s, "elapsed_s = {:.6}", self.elapsed.as_secs_f64());
        let _ = writeln!(s, "result = {}", self.result_path.display());
        s
    }
}

/// Steps until the a posteriori estimate reaches `cfg.tol` or `cfg.max_k`
/// steps are taken, then writes `w.txt` and `summary.txt`. The summary is
/// returned in both cases; `converged` tells them apart.
pub fn expmv(cfg: &RunConfig) -> Result<ExpmvSummary> {
    let tau = single_tau(cfg)?;
    let prepared = Prepared::new(load_matrix(cfg)?, cfg.unitary)?;
    let v = load_start(cfg, prepared.op.dim())?;
    let ctx = prepared.context(tau, cfg)?;
    let started = Instant::now();
    let op = &prepared.op;
    let mut dec = KrylovDecomposition::start(op, &v, prepared.process)?;
    let (k, estimate, converged) = loop {
        dec.step(op)?;
        let k = dec.steps();
        let view = dec.view(k)?;
        let est = aposteriori_estimate(&view, tau, ctx.nu(), ctx.mode, ctx.simpson_n)?;
        if est <= cfg.tol || view.breakdown() {
            break (k, est, true);
        }
        if k >= cfg.max_k {
            break (k, est, false);
        }
    };
    let w = krylov_approx(&dec.view(k)?, tau, prepared.propagation)?;
    let elapsed = started.elapsed();

    create_dir(&cfg.out_dir)?;
    let result_path = cfg.out_dir.join("w.txt");
    write_vector(&w, create_file(&result_path)?).map_err(|source| CliError::Write { path: result_path.clone(), source })?;
    let summary_path = cfg.out_dir.join("summary.txt");
    let summary = ExpmvSummary {
        k,
        estimate,
        converged,
        bx: prepared.bx,
        box_estimated: prepared.box_estimated,
        elapsed,
        result_path,
        summary_path: summary_path.clone(),
    };
    fs::write(&summary_path, summary.report()).map_err(|source| CliError::Write { path: summary_path, source })?;
    Ok(summary)
}

/// A priori bound tables for `k = 1..max_k`, one CSV per `(problem, τ)`.
pub fn bounds(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut jobs: Vec<(String, BoundContext)> = Vec::new();
    if cfg.matrix_path.is_some() {
        let prepared = Prepared::new(load_matrix(cfg)?, cfg.unitary)?;
        for tau in cfg.taus_or(&[1.0]) {
            jobs.push((format!("bounds_tau{tau}"), prepared.context(tau, cfg)?));
        }
    } else {
        for run in example_runs(cfg)? {
            let ctx = run.problem.bound_context(run.tau)?.with_crouzeix(cfg.q_constant)?;
            jobs.push((format!("bounds_{}", run.name), ctx));
        }
    }
    create_dir(&cfg.out_dir)?;
    jobs.par_iter()
        .map(|(name, ctx)| {
            let rows = (1..=cfg.max_k)
                .map(|k| {
                    let (prior, q) = best_apriori(ctx, k)?;
                    let (saad, hl) = reference_bounds(ctx, k);
                    Ok(BoundRow { k, bnd_prior: prior.value(), q_used: q, bnd_saad: saad.value(), bnd_hl: hl.map(|b| b.value()) })
                })
                .collect::<Result<Vec<_>>>()?;
            let path = cfg.out_dir.join(format!("{name}.csv"));
            write_bound_rows(&rows, create_file(&path)?).map_err(|e| csv_error(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Elliptic quantities for `--m`, optionally Jacobi functions at `--u`, and
/// the inverse of the side-ratio map at `--ratio`.
pub fn elliptic_debug(cfg: &RunConfig) -> Result<String> {
    let mut s = String::new();
    if let Some(m) = cfg.m {
        let p = complete_elliptic(m)?;
        let q = complete_elliptic(1.0 - m)?;
        let _ = writeln!(s, "m = {m:e}");
        let _ = writeln!(s, "K = {:.17e}\nE = {:.17e}", p.k, p.e);
        let _ = writeln!(s, "K' = {:.17e}\nE' = {:.17e}", q.k, q.e);
        let _ = writeln!(s, "f(m) = {:.17e}\nf(1-m) = {:.17e}", p.deficit(), q.deficit());
        let _ = writeln!(s, "dK/dm = {:.17e}\ndE/dm = {:.17e}", p.dk_dm(), p.de_dm());
        let _ = writeln!(s, "ratio g(m) = {:.17e}", modulus_ratio(m)?);
        let ratio = modulus_ratio(m)?;
        let cp = build_conformal(&SpectralBox::new(-1.0, 1.0, ratio)?)?;
        let _ = writeln!(s, "lambda(box [-1,1]x[-g,g]) = {:.17e}", cp.lambda);
        if let Some(u) = cfg.u {
            let j = Jacobi::new(m)?;
            let t = j.scd(u)?;
            let _ = writeln!(s, "sn = {:.17e} {:+.17e}i", t.sn.re, t.sn.im);
            let _ = writeln!(s, "cn = {:.17e} {:+.17e}i", t.cn.re, t.cn.im);
            let _ = writeln!(s, "dn = {:.17e} {:+.17e}i", t.dn.re, t.dn.im);
            let e = j.epsilon(u)?;
            let _ = writeln!(s, "E(u) = {:.17e} {:+.17e}i", e.re, e.im);
        }
    } else if cfg.u.is_some() {
        return Err(CliError::Input("--u needs --m".into()));
    }
    if let Some(r) = cfg.ratio {
        let _ = writeln!(s, "solve_modulus({r:e}) = {:.17e}", solve_modulus(r)?);
    }
    if s.is_empty() {
        return Err(CliError::Input("elliptic-debug needs --m or --ratio".into()));
    }
    Ok(s)
}
