//! Package-level thermal-cycle diagnostic with a recovery-based verdict.
//!
//! Steps, in order:
//!
//! * I: test the selected parameters at room temperature;
//! * II-V: stress at low temperature and maximum supply in cycles, re-testing
//!   at room temperature after each cycle and stopping if the part dies;
//! * VI: compare against the reference, `shift > shift_threshold` is significant;
//! * VII: unbiased bake;
//! * VIII: re-test, recovery of at least `recovery_threshold` of the shift means HCI.

use serde::{Deserialize, Serialize};

use crate::circuit_sim::{Device, OperatingPoint};
use crate::detection::monitors::MeasuredIndicators;
use crate::device_aging::TransistorState;
use crate::error::{HciError, Result};
use crate::scalar::{lit, Real};

pub const DIAGNOSTIC_SCHEMA_VERSION: u32 = 1;

const HOUR: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct DiagnosticProtocol<T> {
    pub stress_temp: T,
    /// Maximum rated supply (V).
    pub stress_vdd: T,
    pub cycle_hours: T,
    /// Requested stress time; clamped to `[total_hours_min, total_hours_max]`.
    pub total_hours: T,
    pub total_hours_min: T,
    pub total_hours_max: T,
    pub bake_temp: T,
    pub bake_hours: T,
    pub shift_threshold: T,
    pub recovery_threshold: T,
}

impl<T: Real> Default for DiagnosticProtocol<T> {
    fn default() -> Self {
        DiagnosticProtocol {
            stress_temp: lit(-55.0),
            stress_vdd: lit(1.32),
            cycle_hours: lit(24.0),
            total_hours: lit(168.0),
            total_hours_min: lit(160.0),
            total_hours_max: lit(240.0),
            bake_temp: lit(250.0),
            bake_hours: lit(24.0),
            shift_threshold: lit(0.05),
            recovery_threshold: lit(0.30),
        }
    }
}

impl<T: Real> DiagnosticProtocol<T> {
    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        let unit = |x: T| x > z && x < T::one();
        let bad = |m: &str| Err(HciError::InvalidProtocol(m.into()));
        if !(self.total_hours_min > z) || !(self.total_hours_min <= self.total_hours_max) {
            return bad("need 0 < total_hours_min <= total_hours_max");
        }
        if !self.total_hours_max.is_finite() || !self.total_hours.is_finite() {
            return bad("stress hours must be finite");
        }
        if !(self.cycle_hours > z) || !(self.cycle_hours <= self.total_hours_max) {
            return bad("need 0 < cycle_hours <= total_hours_max");
        }
        if !(self.bake_hours >= z) || !self.bake_temp.is_finite() || !self.stress_temp.is_finite() {
            return bad("bake_hours must be >= 0 and temperatures finite");
        }
        if !(self.stress_vdd > z) {
            return bad("stress_vdd must be > 0");
        }
        if !unit(self.shift_threshold) || !unit(self.recovery_threshold) {
            return bad("shift_threshold and recovery_threshold must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn effective_total_hours(&self) -> T {
        self.total_hours
            .max(self.total_hours_min)
            .min(self.total_hours_max)
    }

    /// Stress hours of each cycle; the last one is shortened to hit the total exactly.
    pub fn cycle_plan(&self) -> Vec<T> {
        let total = self.effective_total_hours();
        let mut plan = Vec::new();
        let mut done = T::zero();
        while done < total {
            let h = self.cycle_hours.min(total - done);
            plan.push(h);
            done = done + h;
        }
        plan
    }

    /// Verdict implied by a step-VI shift and a post-bake recovery fraction.
    pub fn classify(&self, shift: T, recovery: T) -> Verdict {
        if shift > self.shift_threshold {
            if recovery >= self.recovery_threshold {
                Verdict::HciFailure
            } else {
                Verdict::NonHciDegradation
            }
        } else {
            Verdict::NoFailure
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoFailure,
    HciFailure,
    NonHciDegradation,
    DiedDuringStress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    I,
    IV,
    VI,
    VIII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSnapshot<T> {
    pub step: Step,
    /// Stress cycles completed when the snapshot was taken.
    pub cycle: u32,
    pub stress_hours: T,
    pub indicators: Option<MeasuredIndicators<T>>,
    pub failure: Option<String>,
}

impl<T> StepSnapshot<T> {
    pub fn functional(&self) -> bool {
        self.indicators.is_some() && self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DiagnosticReport<T> {
    pub schema_version: u32,
    pub protocol: DiagnosticProtocol<T>,
    /// Indicators of the same device with pristine transistors.
    pub reference: Option<MeasuredIndicators<T>>,
    pub steps: Vec<StepSnapshot<T>>,
    /// Step-VI composite shift against the reference.
    pub shift: Option<T>,
    /// Fraction of the step-VI shift removed by the bake.
    pub recovery: Option<T>,
    pub verdict: Verdict,
}

#[derive(Serialize)]
struct CsvRow<T> {
    step: Step,
    cycle: u32,
    stress_hours: T,
    functional: bool,
    prop_delay: Option<T>,
    ring_freq: Option<T>,
    vt_estimate: Option<T>,
    iddq_proxy: Option<T>,
}

impl<T: Real> DiagnosticReport<T> {
    /// Re-derives the verdict from the stored snapshots and thresholds.
    pub fn rederive_verdict(&self) -> Verdict {
        if self.steps.iter().any(|s| !s.functional()) || self.reference.is_none() {
            return Verdict::DiedDuringStress;
        }
        let reference = self.reference.as_ref().expect("checked above");
        let at = |step: Step| {
            self.steps
                .iter()
                .find(|s| s.step == step)
                .and_then(|s| s.indicators)
                .map(|i| i.relative_shift(reference))
        };
        match (at(Step::VI), at(Step::VIII)) {
            (Some(vi), Some(viii)) => self.protocol.classify(vi, recovery_fraction(vi, viii)),
            _ => Verdict::DiedDuringStress,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| HciError::Encoding(e.to_string()))
    }

    /// One row per snapshot; indicator columns are empty for a dead part.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.steps {
            let i = s.indicators;
            w.serialize(CsvRow {
                step: s.step,
                cycle: s.cycle,
                stress_hours: s.stress_hours,
                functional: s.functional(),
                prop_delay: i.map(|i| i.prop_delay),
                ring_freq: i.map(|i| i.ring_freq),
                vt_estimate: i.map(|i| i.vt_estimate),
                iddq_proxy: i.map(|i| i.iddq_proxy),
            })
            .map_err(|e| HciError::Encoding(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| HciError::Encoding(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HciError::Encoding(e.to_string()))
    }
}

fn recovery_fraction<T: Real>(shift: T, after_bake: T) -> T {
    if shift > T::zero() {
        (shift - after_bake) / shift
    } else {
        T::zero()
    }
}

fn snapshot<T: Real>(device: &Device<T>, step: Step, cycle: u32, hours: T) -> StepSnapshot<T> {
    let m = device.measure(device.model.operating.vdd);
    StepSnapshot {
        step,
        cycle,
        stress_hours: hours,
        indicators: m.indicators,
        failure: m.failure,
    }
}

/// Runs the eight-step protocol on a copy of `device` and returns the report
/// together with the stressed and baked device.
///
/// Measurements use the device's own operating supply at room temperature. The
/// shift is taken against the same device with pristine transistors, so parts
/// that arrive already aged are judged on their total drift.
pub fn run_thermal_cycle_diagnostic<T: Real>(
    device: &Device<T>,
    protocol: &DiagnosticProtocol<T>,
) -> Result<(DiagnosticReport<T>, Device<T>)> {
    protocol.validate()?;
    let mut fresh = device.clone();
    for s in fresh.states.values_mut() {
        *s = TransistorState::pristine();
    }
    let reference = fresh.measure(fresh.model.operating.vdd).indicators;

    let mut dev = device.clone();
    let mut steps = vec![snapshot(&dev, Step::I, 0, T::zero())];
    let died = |steps: Vec<StepSnapshot<T>>, dev: Device<T>| {
        let report = DiagnosticReport {
            schema_version: DIAGNOSTIC_SCHEMA_VERSION,
            protocol: *protocol,
            reference,
            steps,
            shift: None,
            recovery: None,
            verdict: Verdict::DiedDuringStress,
        };
        Ok((report, dev))
    };
    if reference.is_none() || !steps[0].functional() {
        return died(steps, dev);
    }

    let stress = OperatingPoint {
        vdd: protocol.stress_vdd,
        temperature: protocol.stress_temp,
    };
    let rates = match dev.stress_rates(&stress) {
        Ok(r) => r,
        Err(HciError::OxideBreakdown { .. }) => {
            steps[0].failure = Some("oxide breakdown under stress".into());
            return died(steps, dev);
        }
        Err(e) => return Err(e),
    };

    let mut hours = T::zero();
    for (k, h) in protocol.cycle_plan().into_iter().enumerate() {
        dev.age(&rates, h * lit(HOUR))?;
        hours = hours + h;
        let snap = snapshot(&dev, Step::IV, k as u32 + 1, hours);
        let alive = snap.functional();
        steps.push(snap);
        if !alive {
            return died(steps, dev);
        }
    }
    let cycles = steps.len() as u32 - 1;
    let vi = snapshot(&dev, Step::VI, cycles, hours);
    let reference_ind = reference.expect("checked above");
    let shift = vi
        .indicators
        .expect("functional after last cycle")
        .relative_shift(&reference_ind);
    steps.push(vi);

    dev.bake(protocol.bake_temp, protocol.bake_hours * lit(HOUR))?;
    let viii = snapshot(&dev, Step::VIII, cycles, hours);
    let after = match viii.indicators {
        Some(i) if viii.failure.is_none() => i.relative_shift(&reference_ind),
        _ => {
            steps.push(viii);
            return died(steps, dev);
        }
    };
    steps.push(viii);
    let recovery = recovery_fraction(shift, after);
    let report = DiagnosticReport {
        schema_version: DIAGNOSTIC_SCHEMA_VERSION,
        protocol: *protocol,
        reference,
        steps,
        shift: Some(shift),
        recovery: Some(recovery),
        verdict: protocol.classify(shift, recovery),
    };
    Ok((report, dev))
}
