use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use liectl_core::corpus;
use liectl_core::io::{analysis_report, load_system, reach_csv, trajectory_csv, LoadedSystem, ModelChoice};
use liectl_core::parallel::Execution;
use liectl_core::simulation::{integrate, sample_reachable, ControlFunction, ReachConfig};
use liectl_core::system::{decide, Verdict};
use liectl_core::{ControlRange, Tolerances};

/// Controllability analysis and simulation of linear control systems on Lie groups.
#[derive(Parser, Debug)]
#[command(name = "liectl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// System JSON file, or `corpus:NAME` for a built-in system.
    #[arg(long)]
    system: String,
    /// Override the control range kind (a bounded override keeps the file's box,
    /// or uses [-1, 1]^m if the file is unbounded).
    #[arg(long, value_enum)]
    range: Option<RangeKind>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Structure report: class, series, spectrum, splitting, residuals, rank conditions.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Controllability verdict with its certificate chain.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Integrate one trajectory and emit it as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// Piecewise-constant control `u1,u2@t1;u1,u2@t2;...`; the last `@t` may
        /// be omitted and defaults to the horizon. Zero control if absent.
        #[arg(long, allow_hyphen_values = true)]
        control: Option<String>,
    },
    /// Sample endpoints of random piecewise-constant controls and emit them as CSV.
    Reach {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// Segments per control.
        #[arg(long = "K", default_value_t = 4)]
        segments: usize,
        /// Number of samples.
        #[arg(long = "N", default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run on a single thread.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    /// Horizon.
    #[arg(long = "T", default_value_t = 1.0, allow_hyphen_values = true)]
    horizon: f64,
    /// Maximal step length.
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// Start state as comma-separated numbers (row-major for matrix models);
    /// defaults to the identity.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    #[arg(long, value_enum, default_value_t = ModelArg::Auto)]
    model: ModelArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum RangeKind {
    Bounded,
    Unbounded,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
enum ModelArg {
    Auto,
    InnerDrift,
    ExpChart,
    Coordinate,
}

impl From<ModelArg> for ModelChoice {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Auto => ModelChoice::Auto,
            ModelArg::InnerDrift => ModelChoice::InnerDrift,
            ModelArg::ExpChart => ModelChoice::ExpChart,
            ModelArg::Coordinate => ModelChoice::Coordinate,
        }
    }
}

fn tolerances() -> Result<Tolerances> {
    let tol = Tolerances::default();
    match std::env::var("LIECTL_TOL") {
        Ok(s) if s.trim().is_empty() => Ok(tol),
        Ok(s) => {
            let tau: f64 = s.trim().parse().with_context(|| format!("LIECTL_TOL: cannot parse '{s}'"))?;
            if !(tau.is_finite() && tau > 0.0) {
                bail!("LIECTL_TOL must be a positive number, got {tau}");
            }
            Ok(tol.with_spectral(tau))
        }
        Err(std::env::VarError::NotPresent) => Ok(tol),
        Err(e) => Err(anyhow!("LIECTL_TOL: {e}")),
    }
}

fn load(common: &Common, tol: &Tolerances) -> Result<LoadedSystem> {
    let mut loaded = if let Some(name) = common.system.strip_prefix("corpus:") {
        corpus::load(name, tol)?
    } else {
        let text = fs::read_to_string(&common.system).with_context(|| format!("reading {}", common.system))?;
        load_system(&text, tol).with_context(|| format!("loading {}", common.system))?
    };
    if let Some(kind) = common.range {
        let sys = loaded.system.clone();
        let range = match kind {
            RangeKind::Unbounded => ControlRange::Unbounded,
            RangeKind::Bounded if sys.range().is_bounded() => sys.range().clone(),
            RangeKind::Bounded => ControlRange::unit_box(sys.num_controls()),
        };
        loaded.system = sys.with_range(range)?;
    }
    Ok(loaded)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_numbers(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("{what}: cannot parse '{}'", x.trim())))
        .collect()
}

/// `u1,u2@t1;u1,u2@t2;...` on `[0, horizon]`.
fn parse_control(spec: &str, channels: usize, horizon: f64) -> Result<ControlFunction> {
    let pieces: Vec<&str> = spec.split(';').map(str::trim).filter(|p| !p.is_empty()).collect();
    if pieces.is_empty() {
        bail!("--control: no segments given");
    }
    let mut breakpoints = vec![0.0];
    let mut values = Vec::new();
    for (k, piece) in pieces.iter().enumerate() {
        let (vals, end) = match piece.split_once('@') {
            Some((v, t)) => (v, t.trim().parse::<f64>().with_context(|| format!("--control segment {k}: bad end time '{t}'"))?),
            None if k + 1 == pieces.len() => (*piece, horizon),
            None => bail!("--control segment {k}: only the last segment may omit '@t'"),
        };
        let u = parse_numbers(vals, &format!("--control segment {k}"))?;
        if u.len() != channels {
            bail!("--control segment {k}: expected {channels} values, found {}", u.len());
        }
        values.push(DVector::from_vec(u));
        breakpoints.push(end);
    }
    Ok(ControlFunction::new(breakpoints, values)?)
}

fn start_state(arg: Option<&str>, identity: DVector<f64>) -> Result<DVector<f64>> {
    match arg {
        None => Ok(identity),
        Some(s) => {
            let v = parse_numbers(s, "--start")?;
            if v.len() != identity.len() {
                bail!("--start: expected {} numbers, found {}", identity.len(), v.len());
            }
            Ok(DVector::from_vec(v))
        }
    }
}

fn render_verdict(v: &Verdict) -> String {
    let mut out = format!("status: {}\nreason: {}\ncertificates:\n", status_name(v), v.reason);
    for c in &v.certificates {
        out.push_str(&format!("  - {}: {} [{}]\n", c.condition, c.result, c.rule));
    }
    out.push_str(&format!(
        "openness: A {:?}, A* {:?}\n",
        v.openness.a_open, v.openness.astar_open
    ));
    if v.warnings.is_empty() {
        out.push_str("warnings: none\n");
    } else {
        out.push_str("warnings:\n");
        for w in &v.warnings {
            out.push_str(&format!("  - {w}\n"));
        }
    }
    out
}

fn status_name(v: &Verdict) -> String {
    serde_json::to_value(v.status)
        .ok()
        .and_then(|s| s.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn require_csv(format: Format) -> Result<()> {
    if format != Format::Csv {
        bail!("this command emits CSV only");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let tol = tolerances()?;
    match cli.command {
        Command::Analyze { common } => {
            let loaded = load(&common, &tol)?;
            let report = analysis_report(&loaded, &tol)?;
            emit(common.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
        }
        Command::Check { common, format } => {
            let loaded = load(&common, &tol)?;
            let verdict = decide(&loaded.system, &tol)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&verdict)? + "\n",
                Format::Text => render_verdict(&verdict),
                Format::Csv => bail!("check emits text or JSON"),
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Simulate { common, sim, control } => {
            require_csv(sim.format)?;
            let loaded = load(&common, &tol)?;
            let model = loaded.model(sim.model.into(), &tol)?;
            let m = model.num_controls();
            let (t0, t1) = if sim.horizon >= 0.0 { (0.0, sim.horizon) } else { (sim.horizon, 0.0) };
            let u = match &control {
                Some(spec) if sim.horizon >= 0.0 => parse_control(spec, m, sim.horizon)?,
                Some(_) => bail!("--control with a negative horizon is not supported"),
                None if t1 > t0 => ControlFunction::zero(m, t0, t1)?,
                None => ControlFunction::zero(m, 0.0, 1.0)?,
            };
            let start = start_state(sim.start.as_deref(), model.identity())?;
            let traj = integrate(&model, &u, &start, 0.0, sim.horizon, sim.h)?;
            emit(common.out.as_deref(), &trajectory_csv(&traj))
        }
        Command::Reach {
            common,
            sim,
            segments,
            samples,
            seed,
            sequential,
        } => {
            require_csv(sim.format)?;
            let loaded = load(&common, &tol)?;
            let model = loaded.model(sim.model.into(), &tol)?;
            let start = start_state(sim.start.as_deref(), model.identity())?;
            let cfg = ReachConfig {
                horizon: sim.horizon,
                segments,
                samples,
                seed,
                step: sim.h,
            };
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let sample = sample_reachable(&model, &start, &cfg, exec)?;
            emit(common.out.as_deref(), &reach_csv(&sample))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
