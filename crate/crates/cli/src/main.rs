//! `adiabat`: scenario-driven adiabaticity analyses.
//!
//! Exit codes: 0 success, 2 schema or input error, 3 numerical error,
//! 4 I/O error. Failures print `{"error": {...}}` on stderr.

mod failure;
mod pipelines;
mod report;
mod scenario;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::Failure;
use pipelines::{Output, Settings};
use report::{sha256_hex, Report, TOOL, VERSION};
use scenario::{Scenario, Spacing, Sweep, SCHEMA_VERSION};

const OUT_DIR_ENV: &str = "ADIABAT_OUT_DIR";

#[derive(Parser)]
#[command(name = "adiabat", version, about = "Adiabaticity analyses for closed and open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Instantaneous spectrum along the path
    Spectrum(Common),
    /// Integrate the Schrödinger or master equation
    Evolve(Common),
    /// Adiabatic condition ratios and time bounds
    Check(Common),
    /// Exact integrations over a range of total times
    Sweep(SweepArgs),
    /// Transition-order expansion of the propagator
    Wu(Common),
    /// Jordan structure of the generator along the path
    Jordan(Common),
    /// Proper versus frozen-eigenvector solutions
    Consistency(Common),
    /// Run the pipeline named in the scenario and write CSV and JSON
    Run(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Scenario file
    scenario: PathBuf,
    /// Total evolution time
    #[arg(long = "T")]
    total_time: Option<f64>,
    /// Number of grid points in s
    #[arg(long)]
    grid: Option<usize>,
    /// Expansion order
    #[arg(long)]
    order: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: logical cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Level the analysis starts from
    #[arg(long)]
    level: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    spacing: Option<SpacingArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Linear,
    Log,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(Failure::usage(&e.to_string())),
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", f.to_json());
    ExitCode::from(f.exit_code as u8)
}

fn execute(command: Command) -> Result<(), Failure> {
    let (name, common, sweep) = match command {
        Command::Spectrum(c) => ("spectrum", c, None),
        Command::Evolve(c) => ("evolve", c, None),
        Command::Check(c) => ("check", c, None),
        Command::Sweep(s) => ("sweep", s.common, Some((s.t_min, s.t_max, s.points, s.spacing))),
        Command::Wu(c) => ("wu", c, None),
        Command::Jordan(c) => ("jordan", c, None),
        Command::Consistency(c) => ("consistency", c, None),
        Command::Run(c) => ("run", c, None),
    };
    let (mut scenario, bytes) = Scenario::load(&common.scenario)?;
    if let Some(t) = common.total_time {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::schema("--T", "must be positive and finite"));
        }
        scenario.total_time = Some(t);
    }
    if let Some(g) = common.grid {
        if g < 3 {
            return Err(Failure::schema("--grid", "at least three grid points are needed"));
        }
        scenario.grid_points = g;
    }
    if let Some(l) = common.level {
        scenario.level = l;
    }
    if let Some((t_min, t_max, points, spacing)) = sweep {
        if t_min.is_some() || t_max.is_some() || points.is_some() || spacing.is_some() {
            let base = scenario.sweep.clone();
            let pick = |v: Option<f64>, field: &str, b: Option<f64>| {
                v.or(b).ok_or_else(|| Failure::schema(field, "required for sweep"))
            };
            scenario.sweep = Some(Sweep {
                t_min: pick(t_min, "--t-min", base.as_ref().map(|b| b.t_min))?,
                t_max: pick(t_max, "--t-max", base.as_ref().map(|b| b.t_max))?,
                points: points.or(base.as_ref().map(|b| b.points)).unwrap_or(16),
                spacing: match spacing {
                    Some(SpacingArg::Linear) => Spacing::Linear,
                    Some(SpacingArg::Log) => Spacing::Log,
                    None => base.map_or(Spacing::Linear, |b| b.spacing),
                },
            });
        }
    }
    let spec = scenario.generator()?;
    let settings = Settings {
        grid: scenario.grid(),
        order: common.order.or(scenario.order).unwrap_or(2),
        sweep: match &scenario.sweep {
            Some(s) => s.values()?,
            None => Vec::new(),
        },
        spec,
        scenario,
    };

    let pipeline = if name == "run" {
        Some(
            settings
                .scenario
                .pipeline
                .ok_or_else(|| Failure::schema("pipeline", "run needs a pipeline (evolve, check, jordan, consistency)"))?,
        )
    } else {
        None
    };
    let label = pipeline.map_or(name, |p| p.name());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::usage(&format!("cannot start worker pool: {e}")))?;
    let output = pool.install(|| dispatch(label, &settings))?;

    let report = Report {
        schema: SCHEMA_VERSION,
        tool: TOOL,
        version: VERSION,
        command: label,
        scenario_name: settings.scenario.name.as_deref(),
        scenario_sha256: sha256_hex(&bytes),
        tolerances: settings.scenario.tolerances,
        gap_floor: settings.scenario.gap_floor,
        grid_points: settings.scenario.grid_points,
        total_time: settings.scenario.total_time,
        results: &output.results,
    }
    .to_json();

    let stem = settings.scenario.name.clone().unwrap_or_else(|| {
        common
            .scenario
            .file_stem()
            .map_or("scenario".into(), |s| s.to_string_lossy().into_owned())
    });
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    if pipeline.is_some() {
        let dir = common
            .out
            .or(settings.scenario.output_dir.as_ref().map(PathBuf::from))
            .or(env_dir)
            .unwrap_or_else(|| PathBuf::from("."));
        let formats = match common.format {
            Some(f) => vec![f],
            None => vec![Format::Csv, Format::Json],
        };
        for f in formats {
            write_artifact(&dir, &stem, label, f, &output, &report)?;
        }
        return Ok(());
    }
    let format = common.format.unwrap_or(match label {
        "check" | "jordan" => Format::Json,
        _ => Format::Csv,
    });
    match common.out.or(env_dir) {
        Some(dir) => write_artifact(&dir, &stem, label, format, &output, &report),
        None => {
            let text = match format {
                Format::Csv => &output.csv,
                Format::Json => &report,
            };
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e))
        }
    }
}

fn dispatch(label: &str, st: &Settings) -> Result<Output, Failure> {
    match label {
        "spectrum" => pipelines::spectrum(st),
        "evolve" => pipelines::evolve(st),
        "check" => pipelines::check(st),
        "sweep" => pipelines::sweep(st),
        "wu" => pipelines::wu(st),
        "jordan" => pipelines::jordan(st),
        "consistency" => pipelines::consistency(st),
        other => unreachable!("unknown pipeline {other}"),
    }
}

fn write_artifact(
    dir: &Path,
    stem: &str,
    label: &str,
    format: Format,
    output: &Output,
    report: &str,
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let (ext, text) = match format {
        Format::Csv => ("csv", output.csv.as_str()),
        Format::Json => ("json", report),
    };
    let path = dir.join(format!("{stem}.{label}.{ext}"));
    std::fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
    println!("{}", path.display());
    Ok(())
}
