//! Command-line front end. `run` is what the binary calls; it returns the
//! process exit status (0 success, 1 verification failure, 2 rejected
//! parameters, 3 I/O, 4 solver failure).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::contour::{stream_at, velocity_at, Family};
use crate::error::{Error, Result};
use crate::solver::{continue_branch, verify_solution, Problem, SolverMode};
use crate::spectral::{bifurcation_point, two_layer_bifurcation_at, BifurcationPoint};

mod config;
mod records;

pub use config::{GridSpec, RunConfig, SCHEMA_VERSION};
pub use records::{
    BranchFile, BranchSummary, CertificateFile, ReportFile, StateReport, TOOL, VERSION,
};
use records::{branch_csv, csv_header, num, read_json, write_json};

#[derive(Parser, Debug)]
#[command(name = "patchbif", version, about = "Bifurcation and continuation of nested vortex patches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Newton,
    NashMoser,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub strict: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Locate and certify the bifurcation point; writes certificate.json.
    Bifurcate(RunArgs),
    /// Follow the branch from a certificate; writes branch.json and branch.csv.
    Continue {
        #[command(flatten)]
        run: RunArgs,
        /// Defaults to OUT/certificate.json.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Re-check every state of a branch record; writes report.json.
    Verify {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        strict: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Boundary points and velocity/stream samples of one state; writes fields.csv.
    Sample {
        #[arg(long)]
        record: PathBuf,
        #[arg(long, default_value_t = 0)]
        state: usize,
        /// `x_min,x_max,nx,y_min,y_max,ny`.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Dump the blocks M_n at the bifurcation point; writes spectrum.csv.
    Spectrum(RunArgs),
}

/// Parses arguments, runs the command, reports errors as one JSON line on
/// stderr, and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            let line = serde_json::json!({ "error": e.code(), "message": e.to_string() });
            eprintln!("{line}");
            e.exit_code()
        }
    }
}

fn load_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(n) = args.n_max {
        cfg.n_max = n;
    }
    if let Some(m) = args.mode {
        cfg.solver.mode = match m {
            ModeArg::Newton => SolverMode::Newton,
            ModeArg::NashMoser => SolverMode::NashMoser,
        };
    }
    if let Some(k) = args.strict {
        cfg.strict = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn execute(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Bifurcate(args) => {
            let cfg = load_config(args)?;
            bifurcate(&cfg, &args.out)?;
            Ok(0)
        }
        Command::Continue { run, certificate } => {
            let cfg = load_config(run)?;
            let cert = certificate.clone().unwrap_or_else(|| run.out.join("certificate.json"));
            let file = continue_cmd(&cfg, &cert, &run.out)?;
            Ok(if file.states.is_empty() { 4 } else { 0 })
        }
        Command::Verify { record, strict, out } => {
            let report = verify_cmd(record, *strict, out)?;
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Sample {
            record,
            state,
            grid,
            out,
        } => {
            let grid = grid.as_deref().map(GridSpec::parse).transpose()?;
            sample_cmd(record, *state, grid, out)?;
            Ok(0)
        }
        Command::Spectrum(args) => {
            let cfg = load_config(args)?;
            spectrum_cmd(&cfg, &args.out)?;
            Ok(0)
        }
    }
}

/// Certified point for a validated config.
pub fn certify(cfg: &RunConfig) -> Result<BifurcationPoint> {
    match (cfg.problem, cfg.theta) {
        (Family::TwoLayer { b }, Some(theta)) => two_layer_bifurcation_at(b, cfg.fold, theta, cfg.n_max),
        _ => bifurcation_point(cfg.problem, cfg.fold, cfg.root, cfg.n_max),
    }
}

pub fn bifurcate(cfg: &RunConfig, out: &Path) -> Result<CertificateFile> {
    let point = certify(cfg)?;
    let file = CertificateFile {
        tool: TOOL.into(),
        version: VERSION.into(),
        config_hash: cfg.config_hash(),
        problem_hash: cfg.problem_hash(),
        certificate: point,
    };
    ensure_dir(out)?;
    write_json(&out.join("certificate.json"), &file)?;
    Ok(file)
}

pub fn continue_cmd(cfg: &RunConfig, certificate: &Path, out: &Path) -> Result<BranchFile> {
    let cert: CertificateFile = read_json(certificate)?;
    if cert.problem_hash != cfg.problem_hash() {
        return Err(Error::Config(format!(
            "certificate {} was produced for a different problem (hash {} vs {})",
            certificate.display(),
            cert.problem_hash,
            cfg.problem_hash()
        )));
    }
    let branch = continue_branch(&cert.certificate, &cfg.solver)?;
    let file = BranchFile {
        tool: TOOL.into(),
        version: VERSION.into(),
        config_hash: cfg.config_hash(),
        problem_hash: cert.problem_hash,
        config: cfg.clone(),
        certificate: cert.certificate,
        summary: BranchSummary {
            states: branch.states.len(),
            max_amplitude: branch.max_amplitude(),
            stop: branch.stop,
            events: branch.events,
        },
        states: branch.states,
    };
    ensure_dir(out)?;
    write_json(&out.join("branch.json"), &file)?;
    fs::write(out.join("branch.csv"), branch_csv(&file))
        .map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    Ok(file)
}

fn problem_for(file: &BranchFile) -> Result<Problem> {
    Problem::new(
        &file.certificate,
        file.config.solver.truncation,
        file.config.solver.quadrature,
    )
}

pub fn verify_cmd(record: &Path, strict: Option<usize>, out: &Path) -> Result<ReportFile> {
    let file: BranchFile = read_json(record)?;
    let problem = problem_for(&file)?;
    let strict = strict.unwrap_or(file.config.strict).max(1);
    let mut states = Vec::with_capacity(file.states.len());
    for (index, st) in file.states.iter().enumerate() {
        states.push(StateReport {
            index,
            amplitude: st.amplitude,
            theta: st.theta,
            report: verify_solution(st, &problem, strict, &file.config.verify)?,
        });
    }
    let report = ReportFile {
        tool: TOOL.into(),
        version: VERSION.into(),
        config_hash: file.config_hash.clone(),
        strict,
        pass: states.iter().all(|s| s.report.pass),
        states,
    };
    ensure_dir(out)?;
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

pub fn sample_cmd(record: &Path, index: usize, grid: Option<GridSpec>, out: &Path) -> Result<()> {
    let file: BranchFile = read_json(record)?;
    let st = file.states.get(index).ok_or_else(|| {
        Error::Config(format!("state {index} out of range ({} states)", file.states.len()))
    })?;
    let grid = grid.unwrap_or(file.config.grid);
    let problem = problem_for(&file)?;
    let system = problem.system(st.theta, &st.perturbations)?;

    let mut text = csv_header(&file.config_hash);
    let _ = writeln!(
        text,
        "# state {index} amplitude {} theta {}",
        num(st.amplitude),
        num(st.theta)
    );
    text.push_str("kind,layer,x,y,u,v,speed,psi,flag\n");
    for layer in 0..system.len() {
        for k in 0..system.quadrature().len() {
            let p = system.boundary_point(layer, k);
            let _ = writeln!(text, "boundary,{layer},{},{},,,,,", num(p[0]), num(p[1]));
        }
    }
    for p in grid.points() {
        match (velocity_at(&system, p), stream_at(&system, p)) {
            (Ok(v), Ok(psi)) => {
                let _ = writeln!(
                    text,
                    "grid,,{},{},{},{},{},{},ok",
                    num(p[0]),
                    num(p[1]),
                    num(v.velocity[0]),
                    num(v.velocity[1]),
                    num(v.speed()),
                    num(psi)
                );
            }
            (Err(Error::PointOnBoundary { .. }), _) | (_, Err(Error::PointOnBoundary { .. })) => {
                let _ = writeln!(text, "grid,,{},{},,,,,on_boundary", num(p[0]), num(p[1]));
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    ensure_dir(out)?;
    fs::write(out.join("fields.csv"), text).map_err(|e| Error::Io(format!("{}: {e}", out.display())))
}

pub fn spectrum_cmd(cfg: &RunConfig, out: &Path) -> Result<()> {
    let point = certify(cfg)?;
    let mut text = csv_header(&cfg.config_hash());
    let _ = writeln!(text, "# family {} fold {} theta {}", cfg.problem.name(), cfg.fold, num(point.theta));
    let p = point.layers.len();
    text.push_str("n,frequency,det,row_normalized_det");
    for i in 0..p {
        for j in 0..p {
            let _ = write!(text, ",m{}{}", i + 1, j + 1);
        }
    }
    text.push('\n');
    for n in 1..=cfg.n_max {
        let blk = point.block(n)?;
        let _ = write!(
            text,
            "{n},{},{},{}",
            n * cfg.fold,
            num(blk.det),
            num(blk.row_normalized_det())
        );
        for row in blk.rows() {
            for v in row {
                let _ = write!(text, ",{}", num(v));
            }
        }
        text.push('\n');
    }
    ensure_dir(out)?;
    fs::write(out.join("spectrum.csv"), text).map_err(|e| Error::Io(format!("{}: {e}", out.display())))
}
