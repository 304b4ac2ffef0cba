//! `genfam`: run the verification suites, sample dynamics sets and emit
//! trajectories.
//!
//! Exit status: 0 when every check passes, 1 when a check fails (the report
//! is still written), 2 on usage errors.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use genfam::{
    run, trajectory_sample, ModelKind, MinkowskiSpace, OpticsModel, ParticleModel, SolverConfig, Suite, SuiteConfig,
    TTStarQPoint, VerificationReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "genfam", version, about = "Generating families and Legendre transformations on Minkowski space-time")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a report.
    Verify(VerifyArgs),
    /// Sample points of a dynamics set together with their residuals.
    Sample(SampleArgs),
    /// Write a straight-line trajectory of a dynamics set.
    Trajectory(TrajectoryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Particle,
    Optics,
}

#[derive(Args)]
struct Common {
    /// Space-time dimension.
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Particle mass.
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    suite: Suite,
    /// Samples per check, overriding the suite defaults.
    #[arg(long)]
    samples: Option<usize>,
    /// Tolerance applied to every check.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Initial position, comma separated; the origin when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    q: Option<Vec<f64>>,
    /// Initial momentum, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    p: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Parameter increment between rows.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Gauge factor of light rays.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[command(flatten)]
    common: Common,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: genfam::Error| e.to_string())
}

enum Failure {
    Usage(String),
    Io(io::Error),
}

impl From<genfam::Error> for Failure {
    fn from(e: genfam::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Sample(a) => sample(a).map(|_| true),
        Command::Trajectory(a) => trajectory(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn verify(a: VerifyArgs) -> Result<bool, Failure> {
    let cfg = SuiteConfig {
        suite: a.suite,
        dim: a.common.dim,
        mass: a.common.mass,
        samples: a.samples,
        tolerance: a.tol,
        seed: a.common.seed,
    };
    let report = run(&cfg)?;
    let mut out = output(&a.common.out)?;
    match a.common.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
        Format::Csv => write_report_csv(&mut out, &report)?,
    }
    out.flush()?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAIL {}: residual {:e} > {:e}", c.id, c.max_residual, c.tolerance);
    }
    eprintln!("{}/{} checks passed", report.summary.passed, report.summary.total);
    Ok(report.all_passed())
}

fn write_report_csv(out: &mut dyn Write, report: &VerificationReport) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "anchor", "samples", "max_residual", "tolerance", "passed", "witness"])?;
    for c in &report.checks {
        let witness = c
            .witness
            .as_ref()
            .map(|x| x.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        w.write_record([
            c.id.clone(),
            c.anchor.clone(),
            c.samples.to_string(),
            format!("{:e}", c.max_residual),
            format!("{:e}", c.tolerance),
            c.passed.to_string(),
            witness,
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn model_kind(model: Model, common: &Common, mu: f64) -> Result<ModelKind, Failure> {
    if common.dim < 2 {
        return Err(Failure::Usage(format!("dimension must be at least 2, got {}", common.dim)));
    }
    let space = MinkowskiSpace::standard(common.dim);
    Ok(match model {
        Model::Particle => ModelKind::Particle(ParticleModel::new(space, common.mass)?),
        Model::Optics => ModelKind::Optics { model: OpticsModel::new(space)?, mu },
    })
}

/// One row of `sample` or `trajectory` output.
#[derive(Serialize)]
struct Row {
    index: usize,
    residual: f64,
    q: Vec<f64>,
    p: Vec<f64>,
    qdot: Vec<f64>,
    pdot: Vec<f64>,
}

impl Row {
    fn new(index: usize, residual: f64, w: &TTStarQPoint) -> Self {
        // Adding zero turns `-0.0` into `0.0`.
        let clean = |v: &[f64]| v.iter().map(|x| x + 0.0).collect();
        Self { index, residual, q: clean(&w.q.0), p: clean(&w.p.0), qdot: clean(&w.qdot.0), pdot: clean(&w.pdot.0) }
    }
}

fn write_rows(common: &Common, first: &str, rows: &[Row]) -> Result<(), Failure> {
    let mut out = output(&common.out)?;
    match common.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let n = common.dim;
            let mut w = csv::Writer::from_writer(&mut out);
            let mut header = vec![first.to_string(), "residual".to_string()];
            for name in ["q", "p", "qdot", "pdot"] {
                header.extend((0..n).map(|i| format!("{name}{i}")));
            }
            w.write_record(&header)?;
            for r in rows {
                let mut rec = vec![r.index.to_string(), format!("{:e}", r.residual)];
                rec.extend(r.q.iter().chain(&r.p).chain(&r.qdot).chain(&r.pdot).map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}

fn sample(a: SampleArgs) -> Result<(), Failure> {
    let kind = model_kind(a.model, &a.common, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
    let rows: Vec<Row> = (0..a.count)
        .map(|i| {
            let w = match &kind {
                ModelKind::Particle(m) => m.sample_member(&mut rng),
                ModelKind::Optics { model, .. } => model.sample_member(&mut rng),
            };
            Row::new(i, kind.dynamics_residual(&w), &w)
        })
        .collect();
    write_rows(&a.common, "index", &rows)
}

fn trajectory(a: TrajectoryArgs) -> Result<(), Failure> {
    let kind = model_kind(a.model, &a.common, a.mu)?;
    let n = a.common.dim;
    let q0 = a.q.clone().unwrap_or_else(|| vec![0.0; n]);
    if q0.len() != n || a.p.len() != n {
        return Err(Failure::Usage(format!("initial position and momentum need {n} components")));
    }
    let traj = trajectory_sample(&kind, &q0, &a.p, a.steps, a.step, &SolverConfig::default())?;
    let rows: Vec<Row> = traj.iter().enumerate().map(|(i, w)| Row::new(i, kind.dynamics_residual(w), w)).collect();
    write_rows(&a.common, "step", &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
