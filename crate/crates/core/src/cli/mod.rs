//! Config-driven scenarios and reports.
//!
//! Subcommands mirror the operations in [`run`] and [`report`]: `paper-example`
//! writes the full JSON report, `coupling` the three `V(X)` evaluations,
//! `hole` the bent hole profile, `bloch` a coherence trace and `sweep` one
//! row per value of a config key.

pub mod config;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{parse_config, ScenarioConfig};
pub use report::build_report;

use crate::coupling::Method;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Numeric,
    Closed,
    Lowt,
    All,
}

impl MethodArg {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Numeric => vec![Method::Numeric],
            MethodArg::Closed => vec![Method::Closed],
            MethodArg::Lowt => vec![Method::LowT],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "optomech", version, about = "Strain-coupled hole-burning optomechanics")]
pub struct Cli {
    /// Scenario file; the bundled worked example when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output files into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_enum, default_value = "all")]
    pub method: MethodArg,
    /// Override a config key, `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full report for the scenario, with quoted figures alongside.
    PaperExample,
    /// `V(X)`, `dV/dX` at 0, static displacement and carrier phase.
    Coupling {
        /// Tip displacement for `V`; `X_disp` when omitted.
        #[arg(long)]
        displacement_m: Option<f64>,
    },
    /// Hole edges across the thickness.
    Hole {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x_m: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Coherence trace under the modulated detuning.
    Bloch {
        #[arg(long)]
        rabi_rad_s: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        detuning_hz: Option<f64>,
        #[arg(long)]
        modulation_hz: Option<f64>,
        #[arg(long)]
        mech_frequency_hz: Option<f64>,
        #[arg(long)]
        linewidth_hz: Option<f64>,
        #[arg(long)]
        duration_s: Option<f64>,
        #[arg(long)]
        steps_per_period: Option<usize>,
        /// Start on the analytic steady state instead of the ground state.
        #[arg(long)]
        start_on_pss: bool,
    },
    /// Re-run the chain for each value of one config key.
    Sweep {
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<f64>,
    },
}

/// Load the scenario named by `--config` (or the bundled one) and apply
/// `--set` overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ScenarioConfig> {
    let mut cfg = match path {
        Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
        None => config::paper_example(),
    };
    cfg.apply_overrides(overrides)?;
    cfg.scenario()?;
    Ok(cfg)
}

/// Output of one subcommand: file stem, extension, contents.
pub type Artifact = (String, &'static str, String);

pub fn execute(cli: &Cli) -> Result<Vec<Artifact>> {
    let mut overrides = cli.overrides.clone();
    if let Command::Bloch {
        rabi_rad_s,
        detuning_hz,
        modulation_hz,
        mech_frequency_hz,
        linewidth_hz,
        duration_s,
        steps_per_period,
        start_on_pss,
    } = &cli.command
    {
        let pairs = [
            ("bloch.rabi_rad_s", *rabi_rad_s),
            ("bloch.detuning_hz", *detuning_hz),
            ("bloch.modulation_hz", *modulation_hz),
            ("bloch.mech_frequency_hz", *mech_frequency_hz),
            ("bloch.linewidth_hz", *linewidth_hz),
            ("bloch.duration_s", *duration_s),
            ("bloch.steps_per_period", steps_per_period.map(|n| n as f64)),
            ("bloch.start_on_pss", start_on_pss.then_some(1.0)),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                overrides.push(format!("{k}={v:?}"));
            }
        }
    }
    if let Command::Coupling {
        displacement_m: Some(x),
    } = &cli.command
    {
        overrides.push(format!("coupling.displacement_m={x:?}"));
    }
    let cfg = load_config(cli.config.as_deref(), &overrides)?;
    let methods = cli.method.methods();

    let out = match &cli.command {
        Command::PaperExample => {
            let r = build_report(&cfg, &methods)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => vec![("report".into(), "json", report::render_json(&r)?)],
                Format::Csv => vec![("report".into(), "csv", report::render_csv(&r)?)],
            }
        }
        Command::Coupling { .. } => {
            let r = run::coupling(&cfg, &methods)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => vec![(
                    "coupling".into(),
                    "json",
                    report::render_json(&run::coupling_to_json(&r))?,
                )],
                Format::Csv => vec![("coupling".into(), "csv", run::coupling_to_csv(&r)?)],
            }
        }
        Command::Hole { x_m, samples } => {
            let rows = run::render_hole(&cfg, *x_m, *samples)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => vec![("hole".into(), "csv", run::hole_to_csv(&rows)?)],
                Format::Json => vec![(
                    "hole".into(),
                    "json",
                    report::render_json(&serde_json::to_value(&rows)?)?,
                )],
            }
        }
        Command::Bloch { .. } => {
            let (rows, summary) = run::bloch_trace(&cfg)?;
            let summary = report::render_json(&serde_json::to_value(&summary)?)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => vec![
                    ("bloch".into(), "csv", run::trace_to_csv(&rows)?),
                    ("bloch_summary".into(), "json", summary),
                ],
                Format::Json => vec![("bloch_summary".into(), "json", summary)],
            }
        }
        Command::Sweep { param, values } => {
            let sw = run::sweep(&cfg, param, values, &methods)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => vec![("sweep".into(), "csv", sw.to_csv()?)],
                Format::Json => vec![("sweep".into(), "json", report::render_json(&sw.to_json())?)],
            }
        }
    };
    Ok(out)
}

/// Write artifacts into `dir`, or the first one to stdout when `dir` is None.
pub fn emit(artifacts: &[Artifact], dir: Option<&Path>) -> Result<()> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for (stem, ext, body) in artifacts {
                std::fs::write(dir.join(format!("{stem}.{ext}")), body)?;
            }
        }
        None => {
            if let Some((_, _, body)) = artifacts.first() {
                print!("{body}");
            }
            for (stem, ext, body) in artifacts.iter().skip(1) {
                if *ext == "json" {
                    eprintln!("{stem}: {}", body.trim_end());
                }
            }
        }
    }
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match execute(&cli).and_then(|a| emit(&a, cli.out.as_deref())) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
