use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit_sim::{
    simulate_lifetime, transistor_lifetimes, CircuitBundle, Device, LifetimeResult, ModelConfig,
};
use crate::detection::{
    canary_check, guard_band_check, run_thermal_cycle_diagnostic, CanaryConfig, DiagnosticReport,
    GuardBand, HealthyAgingCurve, Verdict,
};
use crate::device_aging::prefactor_for_rate;
use crate::error::{HciError, Result};
use crate::harness::scenario::ScenarioConfig;
use crate::scalar::Real;
use crate::trojan::compose_scenario;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lifetime simulation and detection results of one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RunOutcome<T> {
    pub lifetime: LifetimeResult<T>,
    /// Time to failure of every transistor from pristine; `None` if it never
    /// fails. Empty when the oxide has broken down.
    pub transistor_lifetimes: BTreeMap<String, Option<T>>,
    /// First trace time at which the delay canary flagged.
    pub canary_first_flag: Option<T>,
    /// First trace time at which the delay left the guard band.
    pub guard_band_violation: Option<T>,
    pub diagnostic: Option<DiagnosticReport<T>>,
}

impl<T: Real> RunOutcome<T> {
    pub fn failure_time(&self) -> Option<T> {
        self.lifetime.first_failure.as_ref().map(|f| f.time)
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.diagnostic.as_ref().map(|d| d.verdict)
    }
}

/// Differences between a reference outcome and another one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison<T> {
    /// `other − reference` failure time; `None` unless both fail.
    pub lifetime_delta: Option<T>,
    /// First sample time where any indicator differs by more than the tolerance.
    pub divergence_time: Option<T>,
    pub reference_verdict: Option<Verdict>,
    pub other_verdict: Option<Verdict>,
    pub verdict_changed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationCheck<T> {
    pub canary_quiet_until: T,
    pub met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RunReport<T> {
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario: String,
    pub seed: u64,
    pub scenario_digest: String,
    /// Structural netlist digest; overrides and activity are excluded.
    pub netlist_digest: String,
    /// Aging prefactor used by both runs.
    pub prefactor: T,
    pub baseline: RunOutcome<T>,
    pub infected: Option<RunOutcome<T>>,
    /// Baseline against infected, when trojans are present.
    pub comparison: Option<Comparison<T>>,
    pub expectation: Option<ExpectationCheck<T>>,
}

impl<T: Real> RunReport<T> {
    /// The infected outcome if there is one, otherwise the baseline.
    pub fn primary(&self) -> &RunOutcome<T> {
        self.infected.as_ref().unwrap_or(&self.baseline)
    }
}

/// Relative difference with an absolute floor at zero reference.
fn differs<T: Real>(a: T, b: T, tol: T) -> bool {
    let scale = a.abs().max(b.abs());
    scale > T::zero() && (a - b).abs() > tol * scale
}

pub fn compare_outcomes<T: Real>(
    reference: &RunOutcome<T>,
    other: &RunOutcome<T>,
    tol: T,
) -> Comparison<T> {
    let lifetime_delta = match (reference.failure_time(), other.failure_time()) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };
    let divergence_time = reference
        .lifetime
        .trace
        .iter()
        .zip(&other.lifetime.trace)
        .find(|(a, b)| {
            a.time != b.time
                || differs(a.prop_delay, b.prop_delay, tol)
                || differs(a.ring_freq, b.ring_freq, tol)
                || differs(a.vt_estimate, b.vt_estimate, tol)
                || differs(a.iddq_proxy, b.iddq_proxy, tol)
        })
        .map(|(a, b)| a.time.min(b.time))
        .or_else(|| {
            // all shared samples agree; a trace that stops early still diverges
            let (ra, rb) = (&reference.lifetime.trace, &other.lifetime.trace);
            let (short, long) = if ra.len() <= rb.len() {
                (ra, rb)
            } else {
                (rb, ra)
            };
            long.get(short.len()).map(|s| s.time)
        });
    let reference_verdict = reference.verdict();
    let other_verdict = other.verdict();
    Comparison {
        lifetime_delta,
        divergence_time,
        reference_verdict,
        other_verdict,
        verdict_changed: reference_verdict != other_verdict,
    }
}

/// Prefactor and canary curve derived from the benign device.
struct Reference<T> {
    prefactor: T,
    canary: Option<CanaryConfig<T>>,
}

fn reference<T: Real>(cfg: &ScenarioConfig<T>, bundle: &CircuitBundle<T>) -> Result<Reference<T>> {
    let mut model = cfg.model();
    let probe = Device::new(bundle.clone(), model)?;
    let rates = match probe.stress_rates(&model.operating) {
        Ok(r) => Some(r),
        Err(HciError::OxideBreakdown { .. }) => None,
        Err(e) => return Err(e),
    };
    let max_rate = rates
        .as_ref()
        .map(|r| r.values().fold(T::zero(), |m, &x| m.max(x)))
        .unwrap_or(T::zero());
    if let Some(c) = cfg.calibration {
        if rates.is_none() {
            return Err(bundle.process.breakdown_error());
        }
        model.aging.prefactor = prefactor_for_rate(max_rate, c.target_lifetime, &model.aging)?;
    }
    let canary = probe
        .measure(model.operating.vdd)
        .indicators
        .map(|i| CanaryConfig {
            reference_delay: i.prop_delay,
            expected_aging_curve: HealthyAgingCurve {
                dvt_coeff: model.aging.prefactor * max_rate,
                exponent: model.aging.exponent,
                vdd: model.operating.vdd,
                vt0: model.delay.nmos_vt0.max(model.delay.pmos_vt0),
                alpha: model.delay.alpha,
            },
            margin: cfg.detection.canary_margin,
        });
    Ok(Reference {
        prefactor: model.aging.prefactor,
        canary,
    })
}

fn build_device<T: Real>(
    cfg: &ScenarioConfig<T>,
    bundle: CircuitBundle<T>,
    model: ModelConfig<T>,
) -> Result<Device<T>> {
    let mut d = Device::new(bundle, model)?;
    d.apply_vt0_jitter(cfg.seed, cfg.vt0_jitter)?;
    Ok(d)
}

fn run_device<T: Real>(
    cfg: &ScenarioConfig<T>,
    device: &Device<T>,
    canary: Option<&CanaryConfig<T>>,
) -> Result<RunOutcome<T>> {
    let lifetime = simulate_lifetime(device, cfg.horizon, cfg.epoch)?;
    let lifetimes = match transistor_lifetimes(device) {
        Ok(l) => l,
        Err(HciError::OxideBreakdown { .. }) => BTreeMap::new(),
        Err(e) => return Err(e),
    };
    let mut canary_first_flag = None;
    if let Some(c) = canary {
        for s in &lifetime.trace {
            if canary_check(s.prop_delay, s.time, c)?.flag {
                canary_first_flag = Some(s.time);
                break;
            }
        }
    }
    let mut guard_band_violation = None;
    if let Some(fresh) = lifetime.trace.first() {
        for s in &lifetime.trace {
            if guard_band_check(fresh.prop_delay, s.prop_delay, cfg.detection.guard_band)?
                == GuardBand::Violated
            {
                guard_band_violation = Some(s.time);
                break;
            }
        }
    }
    let diagnostic = if cfg.detection.diagnostic {
        Some(run_thermal_cycle_diagnostic(device, &cfg.detection.protocol)?.0)
    } else {
        None
    };
    Ok(RunOutcome {
        lifetime,
        transistor_lifetimes: lifetimes,
        canary_first_flag,
        guard_band_violation,
        diagnostic,
    })
}

/// Baseline and infected devices of a scenario, ready to simulate.
pub struct PreparedScenario<T> {
    pub baseline: Device<T>,
    pub infected: Option<Device<T>>,
    pub prefactor: T,
    pub canary: Option<CanaryConfig<T>>,
}

pub fn prepare_scenario<T: Real>(cfg: &ScenarioConfig<T>) -> Result<PreparedScenario<T>> {
    let bundle = cfg.baseline_bundle()?;
    let r = reference(cfg, &bundle)?;
    let mut model = cfg.model();
    model.aging.prefactor = r.prefactor;
    let trojans = cfg.trojan_scenario();
    let infected = if trojans.is_benign() {
        None
    } else {
        Some(build_device(
            cfg,
            compose_scenario(&bundle, &trojans)?,
            model,
        )?)
    };
    Ok(PreparedScenario {
        baseline: build_device(cfg, bundle, model)?,
        infected,
        prefactor: r.prefactor,
        canary: r.canary,
    })
}

fn run_inner<T: Real>(cfg: &ScenarioConfig<T>) -> Result<RunReport<T>> {
    let p = prepare_scenario(cfg)?;
    let canary = p.canary.as_ref();
    let baseline = run_device(cfg, &p.baseline, canary)?;
    let infected = p
        .infected
        .as_ref()
        .map(|d| run_device(cfg, d, canary))
        .transpose()?;
    let comparison = infected
        .as_ref()
        .map(|i| compare_outcomes(&baseline, i, cfg.detection.divergence_tol));
    let expectation = cfg.expect.canary_quiet_until.map(|until| {
        let watched = infected.as_ref().unwrap_or(&baseline);
        ExpectationCheck {
            canary_quiet_until: until,
            met: watched.canary_first_flag.is_none_or(|t| t >= until),
        }
    });
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        scenario: cfg.name.clone(),
        seed: cfg.seed,
        scenario_digest: cfg.digest()?,
        netlist_digest: p.baseline.netlist().structural_digest(),
        prefactor: p.prefactor,
        baseline,
        infected,
        comparison,
        expectation,
    })
}

/// Runs the benign device and, when the scenario has trojans, the infected one.
pub fn run_scenario<T: Real>(cfg: &ScenarioConfig<T>) -> Result<RunReport<T>> {
    run_inner(cfg).map_err(|e| HciError::InScenario {
        scenario: cfg.name.clone(),
        source: Box::new(e),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DiagnoseReport<T> {
    pub scenario: String,
    pub baseline: DiagnosticReport<T>,
    pub infected: Option<DiagnosticReport<T>>,
}

/// Runs only the thermal-cycle diagnostic on the scenario's fresh devices.
pub fn diagnose_scenario<T: Real>(cfg: &ScenarioConfig<T>) -> Result<DiagnoseReport<T>> {
    let inner = || -> Result<DiagnoseReport<T>> {
        let p = prepare_scenario(cfg)?;
        let protocol = &cfg.detection.protocol;
        Ok(DiagnoseReport {
            scenario: cfg.name.clone(),
            baseline: run_thermal_cycle_diagnostic(&p.baseline, protocol)?.0,
            infected: p
                .infected
                .as_ref()
                .map(|d| run_thermal_cycle_diagnostic(d, protocol).map(|r| r.0))
                .transpose()?,
        })
    };
    inner().map_err(|e| HciError::InScenario {
        scenario: cfg.name.clone(),
        source: Box::new(e),
    })
}

/// Compares the primary outcomes of two reports of the same netlist.
pub fn compare_runs<T: Real>(a: &RunReport<T>, b: &RunReport<T>, tol: T) -> Result<Comparison<T>> {
    if a.netlist_digest != b.netlist_digest {
        return Err(HciError::Incomparable(format!(
            "netlist digests differ ({} vs {})",
            a.netlist_digest, b.netlist_digest
        )));
    }
    Ok(compare_outcomes(a.primary(), b.primary(), tol))
}
