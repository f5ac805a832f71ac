use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use klyshko_core::analysis::{argmax, sharpness};

use crate::config::{ExperimentConfig, Preset};
use crate::error::CliError;
use crate::presets::{execute, preset_grid, Check};
use crate::report::{write_outcome, write_report, RunReport, SweepPoint, SweepSection};

pub const THREADS_ENV: &str = "KLYSHKO_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "klyshko-sim", version, about = "Two-photon coincidence and classical projector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one preset and write its patterns and report.
    Run(Common),
    /// Run a preset once per value of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of S_i, plane, d, shotCount.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, required = true, num_args = 1, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<String>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset to run; overrides the file. Alone, runs the preset's defaults.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Exit with status 4 if any check fails.
    #[arg(long)]
    check: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let mut cfg = ExperimentConfig::load(path)?;
                if let Some(p) = self.preset {
                    cfg.preset = Some(p);
                }
                cfg.check_required()?;
                cfg
            }
            None => match self.preset {
                Some(p) => ExperimentConfig { preset: Some(p), ..Default::default() },
                None => return Err(CliError::Validation("pass --config <file> or --preset <name>".into())),
            },
        };
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        Ok(cfg)
    }
}

/// Caps the rayon pool at `KLYSHKO_SIM_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // a pool built earlier in this process wins; the cap only matters for the first
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(common: &Common) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let params = common.config()?.resolve()?;
    let grid = preset_grid(&params)?;
    let outcome = execute(&params, grid)?;
    let section = write_outcome(&common.out, params.preset.name(), outcome)?;
    let report = RunReport {
        command: "run".into(),
        config: params.clone(),
        run: Some(section),
        sweep: None,
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    write_report(&common.out.join(format!("{}-report.json", params.preset.name())), &report)?;
    Ok(report)
}

fn parse_values(raw: &[String]) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = raw
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Validation(format!("sweep value `{s}` is not a number"))))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Validation("--values is empty; give at least one value".into()));
    }
    Ok(values)
}

fn sweep(common: &Common, param: &str, raw: &[String]) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let values = parse_values(raw)?;
    let base = common.config()?;
    let base_params = base.resolve()?;
    // one grid for every point, sized for the largest value
    let largest = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut widest = base.clone();
    widest.set(param, largest)?;
    let grid = preset_grid(&widest.resolve()?)?;

    let stem = base_params.preset.name();
    let mut points = Vec::new();
    let mut scores = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.set(param, v)?;
        let mut params = cfg.resolve()?;
        params.grid.dx = Some(grid.dx());
        let outcome = execute(&params, grid)?;
        scores.push(outcome.patterns.first().map(|(_, p)| sharpness(p)).unwrap_or(f64::NAN));
        let run = write_outcome(&common.out, &format!("{stem}-{param}-{i}"), outcome)?;
        points.push(SweepPoint { value: v, config: params, run });
    }

    let mut checks = Vec::new();
    let mut argmax_sharpness = None;
    if param == "S_i" {
        let best = argmax(&scores).map(|i| values[i]);
        argmax_sharpness = best;
        if let (Some(best), Ok(focus)) = (best, klyshko_core::biphoton::GhostImage::image_distance(base_params.f, base_params.s_o)) {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let step = sorted.windows(2).map(|w| w[1] - w[0]).filter(|s| *s > 0.0).fold(f64::INFINITY, f64::min);
            if sorted.len() > 1 && focus >= sorted[0] && focus <= sorted[sorted.len() - 1] {
                checks.push(Check::absolute("sharpestPlane", best, focus, step));
            }
        }
    }
    let report = RunReport {
        command: "sweep".into(),
        config: base_params,
        run: None,
        sweep: Some(SweepSection { param: param.into(), points, argmax_sharpness, checks }),
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    write_report(&common.out.join(format!("{stem}-sweep-{param}-report.json")), &report)?;
    Ok(report)
}

fn summarize(report: &RunReport, out: &Path) {
    for c in report.checks() {
        println!("{} {} = {} (target {})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.target);
    }
    println!("report written to {}", out.display());
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (common, result) = match &cli.command {
        Command::Run(common) => (common, configure_threads().and_then(|_| run(common))),
        Command::Sweep { common, param, values } => (common, configure_threads().and_then(|_| sweep(common, param, values))),
    };
    match result {
        Ok(report) => {
            summarize(&report, &common.out);
            if common.check && report.checks().iter().any(|c| !c.passed) {
                let failed: Vec<&str> = report.checks().iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                eprintln!("error: {}", CliError::CheckFailed(format!("failed checks: {}", failed.join(", "))));
                return 4;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
