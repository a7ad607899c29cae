use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wsn_track_sim::config::{Method, ScenarioConfig};
use wsn_track_sim::error::{Result, SimError};
use wsn_track_sim::report::{self, RunReport};
use wsn_track_sim::sim;
use wsn_track_sim::sweep::{self, Axis};

#[derive(Parser)]
#[command(name = "wsn-track-sim", version, about = "Prediction-based target tracking in sensor networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Proposed,
    Baseline,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    CommRadius,
    NodeCount,
    DataRate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    ThroughputBench,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        slots: Option<u64>,
        /// Report CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for trajectory, event, MAC and energy traces.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Paired runs over one parameter axis.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, required_unless_present = "preset")]
        axis: Option<AxisArg>,
        /// Comma-separated axis values (data rates in bits/s).
        #[arg(long)]
        values: Option<String>,
        /// Inclusive range `a..b` or comma list.
        #[arg(long, default_value = "0..9")]
        seeds: String,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the target trajectory.
    Trace {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(config: Option<&Path>) -> Result<ScenarioConfig> {
    match config {
        Some(p) => ScenarioConfig::from_file(p),
        None => Ok(ScenarioConfig::default()),
    }
}

fn write_reports(reports: &[RunReport], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => report::emit_csv(reports, p).map(|_| ()),
        None => {
            let stdout = std::io::stdout();
            report::write_reports(reports, stdout.lock()).map_err(|e| SimError::Csv {
                path: "<stdout>".into(),
                source: e,
            })?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            method,
            seed,
            slots,
            out,
            trace_dir,
        } => {
            let mut cfg = load(config.as_deref())?;
            if let Some(m) = method {
                cfg.method = match m {
                    MethodArg::Proposed => Method::Proposed,
                    MethodArg::Baseline => Method::Baseline,
                };
            }
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            if let Some(n) = slots {
                cfg.max_slots = n;
            }
            let (field, trajectory) = sim::prepare(&cfg)?;
            let output = sim::simulate(&cfg, field, &trajectory)?;
            if let Some(dir) = trace_dir {
                std::fs::create_dir_all(&dir).map_err(|e| SimError::Io { path: dir.clone(), source: e })?;
                trajectory.write_csv(&dir.join("trajectory.csv"))?;
                report::write_events_csv(&output.events, &dir.join("events.csv"))?;
                report::write_mac_csv(&output.mac, &dir.join("mac.csv"))?;
                report::write_energy_csv(&output.ledger, &dir.join("energy.csv"))?;
            }
            write_reports(&[output.report], out.as_deref())
        }
        Command::Sweep {
            config,
            axis,
            values,
            seeds,
            preset,
            out,
        } => {
            let base = load(config.as_deref())?;
            let seeds = sweep::parse_seeds(&seeds)?;
            let values = values.as_deref().map(sweep::parse_values).transpose()?;
            let result = match preset {
                Some(Preset::ThroughputBench) => {
                    let rates = values.unwrap_or_else(|| vec![1e6, 2e6, 3e6, 4e6]);
                    sweep::throughput_sweep(&base, &rates, &seeds)?
                }
                None => {
                    let axis = match axis.expect("clap enforces --axis") {
                        AxisArg::CommRadius => Axis::CommRadius,
                        AxisArg::NodeCount => Axis::NodeCount,
                        AxisArg::DataRate => Axis::DataRate,
                    };
                    let values = values.ok_or_else(|| SimError::Config("--values is required".into()))?;
                    sweep::sweep(&base, axis, &values, &seeds)?
                }
            };
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            if result.reports.is_empty() {
                return Err(SimError::Config("sweep produced no runs".into()));
            }
            write_reports(&result.reports, out.as_deref())
        }
        Command::Trace { config, seed, out } => {
            let mut cfg = load(config.as_deref())?;
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            let (_, trajectory) = sim::prepare(&cfg)?;
            trajectory.write_csv(&out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
