use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit_sim::{LifetimeResult, TraceSample};
use crate::error::{HciError, Result};
use crate::harness::run::{RunOutcome, RunReport};
use crate::scalar::{as_f64, Real};

pub const REPORT_FILE: &str = "report.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

const TRACE_HEADER: [&str; 7] = [
    "run",
    "time",
    "prop_delay",
    "ring_freq",
    "vt_estimate",
    "iddq_proxy",
    "max_delta_vt",
];
const YEAR: f64 = 365.25 * 86400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Summary,
}

/// One `trace.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow<T> {
    pub run: String,
    #[serde(flatten)]
    pub sample: TraceSample<T>,
}

pub fn report_json<T: Real>(report: &RunReport<T>) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(report).map_err(|e| HciError::Encoding(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Trace rows of the baseline run followed by the infected run, one per sample.
pub fn trace_csv<T: Real>(report: &RunReport<T>) -> Result<String> {
    let enc = |e: csv::Error| HciError::Encoding(e.to_string());
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(TRACE_HEADER).map_err(enc)?;
    let runs = [
        ("baseline", Some(&report.baseline)),
        ("infected", report.infected.as_ref()),
    ];
    for (run, outcome) in runs {
        for s in outcome.map_or(&[][..], |o| &o.lifetime.trace[..]) {
            w.serialize((
                run,
                s.time,
                s.prop_delay,
                s.ring_freq,
                s.vt_estimate,
                s.iddq_proxy,
                s.max_delta_vt,
            ))
            .map_err(enc)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HciError::Encoding(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HciError::Encoding(e.to_string()))
}

fn years<T: Real>(t: Option<T>) -> String {
    t.map_or_else(
        || "none".to_string(),
        |t| format!("{:.3} y", as_f64(t) / YEAR),
    )
}

fn outcome_summary<T: Real>(out: &mut String, label: &str, o: &RunOutcome<T>) {
    let failure = o.lifetime.first_failure.as_ref().map_or_else(
        || "none within horizon".to_string(),
        |f| {
            let who = f.transistor.as_deref().unwrap_or("die");
            format!("{who} ({:?}) at {}", f.cause, years(Some(f.time)))
        },
    );
    let _ = writeln!(out, "{label}:");
    let _ = writeln!(out, "  first failure:   {failure}");
    let _ = writeln!(out, "  canary flag:     {}", years(o.canary_first_flag));
    let _ = writeln!(out, "  guard band:      {}", years(o.guard_band_violation));
    if let Some(d) = &o.diagnostic {
        let _ = writeln!(out, "  diagnostic:      {:?}", d.verdict);
    }
}

pub fn summary_text<T: Real>(report: &RunReport<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} (seed {})", report.scenario, report.seed);
    let _ = writeln!(out, "digest   {}", report.scenario_digest);
    outcome_summary(&mut out, "baseline", &report.baseline);
    if let Some(i) = &report.infected {
        outcome_summary(&mut out, "infected", i);
    }
    if let Some(c) = &report.comparison {
        let delta = c.lifetime_delta.map_or_else(
            || "n/a".to_string(),
            |d| format!("{:+.3} y", as_f64(d) / YEAR),
        );
        let _ = writeln!(out, "lifetime delta:    {delta}");
        let _ = writeln!(out, "divergence:        {}", years(c.divergence_time));
    }
    if let Some(e) = &report.expectation {
        let _ = writeln!(
            out,
            "canary quiet until {}: {}",
            years(Some(e.canary_quiet_until)),
            if e.met { "met" } else { "NOT met" }
        );
    }
    out
}

/// Writes the requested files into `dir`, creating it if needed.
pub fn emit_report<T: Real>(
    report: &RunReport<T>,
    dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| HciError::io(dir, e))?;
    let mut written = Vec::new();
    for f in formats {
        let (name, body) = match f {
            ReportFormat::Json => (REPORT_FILE, report_json(report)?),
            ReportFormat::Csv => (TRACE_FILE, trace_csv(report)?),
            ReportFormat::Summary => (SUMMARY_FILE, summary_text(report)),
        };
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| HciError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_report<T: Real>(path: &Path) -> Result<RunReport<T>> {
    let text = fs::read_to_string(path).map_err(|e| HciError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HciError::Parse {
        origin: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_trace<T: Real>(path: &Path) -> Result<Vec<TraceRow<T>>> {
    let text = fs::read_to_string(path).map_err(|e| HciError::io(path, e))?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(|e| HciError::Encoding(format!("{}: {e}", path.display()))))
        .collect()
}

impl<T: Real> LifetimeResult<T> {
    pub fn is_time_ordered(&self) -> bool {
        self.trace.windows(2).all(|w| w[0].time < w[1].time)
    }
}
