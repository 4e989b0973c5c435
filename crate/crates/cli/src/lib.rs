//! Command-line front end for `hpa_core`: reads a flat JSON parameter
//! document, runs one analysis and writes a JSON report plus CSV series
//! named `<command>.<channel>.csv`.

mod commands;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use hpa_core::delay::{ActhCoupling, Region};
use hpa_core::ModelConfig;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("guard violation: {0}")]
    Guard(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 config, 3 guard, 4 numeric, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<hpa_core::Error> for CliError {
    fn from(e: hpa_core::Error) -> Self {
        use hpa_core::Error as E;
        match e {
            E::InvalidInput(_) | E::NotGeneric(_) | E::UnsupportedCase(_) | E::Domain(_) | E::ZeroDelay => {
                CliError::Config(e.to_string())
            }
            E::GuardViolation(_) | E::InfeasibleHistory(_) => CliError::Guard(e.to_string()),
            E::Consistency(_) | E::NonConvergence(_) | E::Internal(_) => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fixed points with their linearization and stability verdict.
    Equilibrium,
    /// Routh–Hurwitz checks, eigenvalues and the inequality chains.
    Stability,
    /// Degenerate-case classification.
    Cases,
    /// Lyapunov constants, basin radius and a decay run.
    Lyapunov,
    /// Crossing frequencies and the delay switch schedule.
    DelaySwitches,
    /// Characteristic roots and the contour field at one delay.
    Roots,
    /// Non-delayed trajectory.
    Simulate,
    /// Delayed trajectory by the method of steps.
    SimulateDde,
    /// Periodic initial data, its trajectory and period checks.
    Periodic,
    /// Seeded parameter perturbations, one directory per run.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Stability => "stability",
            Command::Cases => "cases",
            Command::Lyapunov => "lyapunov",
            Command::DelaySwitches => "delay-switches",
            Command::Roots => "roots",
            Command::Simulate => "simulate",
            Command::SimulateDde => "simulate-dde",
            Command::Periodic => "periodic",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    /// The quasi-characteristic as published.
    Published,
    /// The exact linearization of the integrated system.
    Exact,
}

impl From<CouplingArg> for ActhCoupling {
    fn from(c: CouplingArg) -> Self {
        match c {
            CouplingArg::Published => ActhCoupling::InstantAndDelayed,
            CouplingArg::Exact => ActhCoupling::DelayedOnly,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hpa", version, about = "HPA-axis model analyses with reproducible JSON/CSV output")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON parameter document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the report and series.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long = "steps-per-delay", global = true)]
    pub steps_per_delay: Option<usize>,
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<usize>,
    /// `re0,re1,im0,im1`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub region: Option<String>,
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    #[arg(long, global = true)]
    pub r0: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub coupling: Option<CouplingArg>,
    /// Number of sweep runs.
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    /// Relative half-width of the sweep perturbations.
    #[arg(long, global = true)]
    pub spread: Option<f64>,
}

/// Options after merging flags over config keys over defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Options {
    pub seed: u64,
    pub t_end: Option<f64>,
    pub dt: f64,
    pub steps_per_delay: usize,
    pub n_max: usize,
    pub region: Option<[f64; 4]>,
    pub resolution: usize,
    pub r0: Option<f64>,
    pub coupling: ActhCoupling,
    pub runs: usize,
    pub spread: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 0,
            t_end: None,
            dt: 0.01,
            steps_per_delay: hpa_core::integrate::DEFAULT_STEPS_PER_DELAY,
            n_max: 5,
            region: None,
            resolution: 64,
            r0: None,
            coupling: ActhCoupling::default(),
            runs: 16,
            spread: 0.1,
        }
    }
}

impl Options {
    pub fn region(&self) -> Region {
        let [re0, re1, im0, im1] = self.region.unwrap_or([-2.0, 1.0, -5.0, 5.0]);
        Region::new(re0, re1, im0, im1)
    }
}

fn parse_region(text: &str) -> Result<[f64; 4], CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("region '{text}': {e}")))?;
    let r: [f64; 4] = parts
        .try_into()
        .map_err(|_| CliError::Config(format!("region '{text}' needs four numbers re0,re1,im0,im1")))?;
    if !(r.iter().all(|x| x.is_finite()) && r[0] < r[1] && r[2] < r[3]) {
        return Err(CliError::Config(format!("region '{text}' must satisfy re0 < re1 and im0 < im1")));
    }
    Ok(r)
}

/// A fully validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelConfig,
    pub options: Options,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Merges flags over the document and checks the command's required options.
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut model = ModelConfig::from_json_str(&text)?;
        let output_dir = cli.output.clone().ok_or_else(|| CliError::Config("--output is required".into()))?;

        let key = |k: &str| -> Result<Option<&Value>, CliError> { Ok(model.extra.get(k).filter(|v| !v.is_null())) };
        let num = |k: &str| -> Result<Option<f64>, CliError> {
            key(k)?.map(|v| v.as_f64().ok_or_else(|| CliError::Config(format!("'{k}' must be a number")))).transpose()
        };
        let count = |k: &str| -> Result<Option<usize>, CliError> {
            key(k)?
                .map(|v| {
                    v.as_u64().map(|n| n as usize).ok_or_else(|| CliError::Config(format!("'{k}' must be a non-negative integer")))
                })
                .transpose()
        };

        let d = Options::default();
        let region = match (&cli.region, key("region")?) {
            (Some(s), _) => Some(parse_region(s)?),
            (None, Some(Value::String(s))) => Some(parse_region(s)?),
            (None, Some(Value::Array(a))) => {
                let s: Vec<String> = a.iter().map(|x| x.to_string()).collect();
                Some(parse_region(&s.join(","))?)
            }
            (None, Some(_)) => return Err(CliError::Config("'region' must be a string or array".into())),
            (None, None) => None,
        };
        let coupling = match (cli.coupling, key("coupling")?) {
            (Some(c), _) => c.into(),
            (None, Some(v)) => serde_json::from_value(v.clone())
                .map_err(|_| CliError::Config("'coupling' must be instant_and_delayed or delayed_only".into()))?,
            (None, None) => d.coupling,
        };
        let options = Options {
            seed: match cli.seed {
                Some(s) => s,
                None => key("seed")?
                    .map(|v| v.as_u64().ok_or_else(|| CliError::Config("'seed' must be a non-negative integer".into())))
                    .transpose()?
                    .unwrap_or(d.seed),
            },
            t_end: cli.t_end.or(num("t_end")?),
            dt: cli.dt.or(num("dt")?).unwrap_or(d.dt),
            steps_per_delay: cli.steps_per_delay.or(count("steps_per_delay")?).unwrap_or(d.steps_per_delay),
            n_max: cli.n_max.or(count("n_max")?).unwrap_or(d.n_max),
            region,
            resolution: cli.resolution.or(count("resolution")?).unwrap_or(d.resolution),
            r0: cli.r0.or(model.r0),
            coupling,
            runs: cli.runs.or(count("runs")?).unwrap_or(d.runs),
            spread: cli.spread.or(num("spread")?).unwrap_or(d.spread),
        };
        if let Some(tau) = cli.tau {
            model.params = model.params.with_tau(tau)?;
        }
        if let Some(r0) = cli.r0 {
            model.r0 = Some(r0);
        }
        let rc = RunConfig { command: cli.command, model, options, output_dir };
        rc.validate()?;
        Ok(rc)
    }

    /// Command-specific checks done before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let o = &self.options;
        let p = &self.model.params;
        p.validate()?;
        if let Some(t) = o.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("t_end = {t} must be positive")));
            }
        }
        if !(o.dt > 0.0 && o.dt.is_finite()) {
            return Err(CliError::Config(format!("dt = {} must be positive", o.dt)));
        }
        if !(o.spread >= 0.0 && o.spread.is_finite()) {
            return Err(CliError::Config(format!("spread = {} must be non-negative", o.spread)));
        }
        match self.command {
            Command::SimulateDde | Command::Periodic if p.tau <= 0.0 => {
                return Err(CliError::Config(format!("{} needs tau > 0", self.command.name())));
            }
            Command::SimulateDde if self.model.history_kind.is_none() => {
                return Err(CliError::Config("simulate-dde needs history.kind with r0 and o0".into()));
            }
            Command::SimulateDde if o.steps_per_delay < 16 => {
                return Err(CliError::Config("steps_per_delay must be >= 16".into()));
            }
            Command::Simulate if self.model.history_kind.is_none() && commands::initial_from_keys(&self.model).is_none() => {
                return Err(CliError::Config("simulate needs a0, r0, o0 or a history".into()));
            }
            Command::Roots if o.resolution < 16 => {
                return Err(CliError::Config("resolution must be >= 16".into()));
            }
            Command::Sweep if o.runs == 0 => return Err(CliError::Config("runs must be >= 1".into())),
            _ => {}
        }
        // builds and validates the history up front
        self.model.history()?;
        Ok(())
    }
}

/// Report envelope shared by all commands.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub command: &'static str,
    pub library_version: &'static str,
    pub seed: u64,
    pub config: &'a ModelConfig,
    pub options: &'a Options,
    /// Wall-clock time lives in this sidecar so the report itself is reproducible.
    pub timing_file: String,
    pub files: Vec<String>,
    pub result: T,
}

#[derive(Debug, Serialize)]
struct Timing {
    wall_time_seconds: f64,
}

/// Runs the command and writes its files; returns every path written.
pub fn run(rc: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let start = Instant::now();
    fs::create_dir_all(&rc.output_dir).map_err(|source| CliError::Io { path: rc.output_dir.clone(), source })?;
    let name = rc.command.name();
    let mut written = Vec::new();
    let result = commands::dispatch(rc, &mut written)?;
    let files = written
        .iter()
        .filter_map(|p: &PathBuf| p.strip_prefix(&rc.output_dir).ok())
        .map(|p| p.to_string_lossy().replace('\\', "/"))
        .collect();
    let report = Report {
        command: name,
        library_version: hpa_core::VERSION,
        seed: rc.options.seed,
        config: &rc.model,
        options: &rc.options,
        timing_file: format!("{name}.timing.json"),
        files,
        result,
    };
    written.push(output::write_file(&rc.output_dir, &format!("{name}.json"), &output::to_json(&report)?)?);
    let timing = Timing { wall_time_seconds: start.elapsed().as_secs_f64() };
    written.push(output::write_file(&rc.output_dir, &report.timing_file, &output::to_json(&timing)?)?);
    Ok(written)
}

/// Parses `args`, runs, and maps the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match RunConfig::from_cli(&cli).and_then(|rc| run(&rc)) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("hpa: {e}");
            e.exit_code()
        }
    }
}

/// Directory of the bundled example configurations.
pub fn fixture_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}
