//! Scenario files, run orchestration, reports and run comparison.

pub mod report;
pub mod run;
pub mod scenario;

pub use report::{
    emit_report, read_report, read_trace, report_json, summary_text, trace_csv, ReportFormat,
    TraceRow,
};
pub use run::{
    compare_outcomes, compare_runs, diagnose_scenario, prepare_scenario, run_scenario, Comparison,
    DiagnoseReport, ExpectationCheck, PreparedScenario, RunOutcome, RunReport,
    REPORT_SCHEMA_VERSION, TOOL_VERSION,
};
pub use scenario::{
    load_scenario, ActivityOverrides, Calibration, Expectations, ScenarioConfig, MAX_SEED,
};
