//! `hcisim`: run, diagnose, validate and compare HCI aging scenarios.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use hci_core::harness::{
    compare_runs, diagnose_scenario, emit_report, load_scenario, read_report, run_scenario,
    summary_text, ReportFormat,
};
use hci_core::{HciError, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "hcisim", version)]
#[command(about = "Hot-carrier-injection aging, trojan and detection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write report.json and trace.csv
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory; defaults to the scenario's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the scenario seed.
        #[arg(long, value_parser = clap::value_parser!(u64).range(..=hci_core::harness::MAX_SEED))]
        seed: Option<u64>,
        /// Also write summary.txt.
        #[arg(long)]
        summary: bool,
    },
    /// Compare two report.json files of the same netlist
    Compare {
        report_a: PathBuf,
        report_b: PathBuf,
        /// Relative indicator difference counted as divergence.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run only the thermal-cycle diagnostic
    Diagnose {
        #[arg(long)]
        scenario: PathBuf,
        /// Write diagnostic.json and per-run CSV files here instead of stdout only.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario and its netlist without simulating
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<HciError> for Failure {
    fn from(e: HciError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn to_json<S: serde::Serialize>(value: &S) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, Failure> {
    let mut cfg: ScenarioConfig = load_scenario(path).map_err(|e| match e {
        HciError::Io { .. } => Failure::Validation(e.to_string()),
        other => other.into(),
    })?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            scenario,
            out,
            seed,
            summary,
        } => {
            let cfg = load(&scenario, seed)?;
            let dir = out.or_else(|| cfg.output_dir.clone()).ok_or_else(|| {
                Failure::Validation("no --out given and scenario has no output_dir".into())
            })?;
            let report = run_scenario(&cfg)?;
            let mut formats = vec![ReportFormat::Json, ReportFormat::Csv];
            if summary {
                formats.push(ReportFormat::Summary);
            }
            emit_report(&report, &dir, &formats)?;
            print!("{}", summary_text(&report));
        }
        Command::Compare {
            report_a,
            report_b,
            tol,
        } => {
            let a = read_report::<f64>(&report_a)?;
            let b = read_report::<f64>(&report_b)?;
            let c = compare_runs(&a, &b, tol)?;
            println!("{}", to_json(&c)?);
        }
        Command::Diagnose { scenario, out } => {
            let cfg = load(&scenario, None)?;
            let report = diagnose_scenario(&cfg)?;
            let json = to_json(&report)?;
            if let Some(dir) = out {
                fs::create_dir_all(&dir)
                    .map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
                write(&dir.join("diagnostic.json"), &format!("{json}\n"))?;
                write(
                    &dir.join("diagnostic_baseline.csv"),
                    &report.baseline.to_csv()?,
                )?;
                if let Some(i) = &report.infected {
                    write(&dir.join("diagnostic_infected.csv"), &i.to_csv()?)?;
                }
            }
            println!("{json}");
        }
        Command::Validate { scenario } => {
            let cfg = load(&scenario, None)?;
            println!(
                "ok: {} ({} trojans, digest {})",
                cfg.name,
                cfg.trojans.len(),
                cfg.digest()?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
