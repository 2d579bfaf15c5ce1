//! The three HCI trojan vectors and their composition.
//!
//! None of them adds logic: a process trojan shifts the wafer's nitridation, a
//! bias trojan installs voltage overrides on chosen transistors, and a workload
//! trojan raises the write frequency of chosen SRAM cells. Each category touches
//! its own part of a [`CircuitBundle`], so composition commutes across
//! categories; inside a category entries apply in list order.

use serde::{Deserialize, Serialize};

use crate::circuit_sim::{
    propagate_activity, ActivityProfile, BiasOverride, CircuitBundle, Netlist,
};
use crate::device_aging::ProcessProfile;
use crate::error::{HciError, Result};
use crate::scalar::{clamp, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct ProcessNitrateDistortion<T> {
    /// Signed shift of the normalized nitrate concentration.
    pub delta_c: T,
    /// Fractional loss of anneal quality.
    #[serde(default)]
    pub anneal_delta: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct BiasAlteration<T> {
    /// Transistor selectors: `gate.ROLE`, `gate.*`, `*.ROLE`.
    pub targets: Vec<String>,
    pub bias: BiasOverride<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct WorkloadAmplification<T> {
    /// SRAM cell names, or `*` for every cell.
    pub targets: Vec<String>,
    pub factor: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum TrojanVector<T> {
    Process(ProcessNitrateDistortion<T>),
    Bias(BiasAlteration<T>),
    Workload(WorkloadAmplification<T>),
}

impl<T> TrojanVector<T> {
    fn rank(&self) -> u8 {
        match self {
            TrojanVector::Process(_) => 0,
            TrojanVector::Bias(_) => 1,
            TrojanVector::Workload(_) => 2,
        }
    }
}

/// Ordered list of trojan vectors; empty means the benign baseline.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Real")]
pub struct TrojanScenario<T> {
    pub trojans: Vec<TrojanVector<T>>,
}

impl<T> TrojanScenario<T> {
    pub fn is_benign(&self) -> bool {
        self.trojans.is_empty()
    }
}

pub fn apply_process_trojan<T: Real>(
    profile: &ProcessProfile<T>,
    t: &ProcessNitrateDistortion<T>,
) -> Result<ProcessProfile<T>> {
    if !t.delta_c.is_finite() || !(t.anneal_delta <= T::one()) || !t.anneal_delta.is_finite() {
        return Err(HciError::InvalidInput(format!(
            "process trojan needs finite delta_c and anneal_delta <= 1 (got {}, {})",
            t.delta_c, t.anneal_delta
        )));
    }
    let mut out = *profile;
    out.nitrate_conc = (profile.nitrate_conc + t.delta_c).max(T::zero());
    out.anneal_quality = clamp(
        profile.anneal_quality * (T::one() - t.anneal_delta),
        lit(1e-6),
        T::one(),
    );
    Ok(out)
}

pub fn apply_bias_trojan<T: Real>(
    netlist: &Netlist<T>,
    t: &BiasAlteration<T>,
) -> Result<Netlist<T>> {
    let mut out = netlist.clone();
    for selector in &t.targets {
        for name in netlist.select_transistors(selector)? {
            out.set_override(&name, t.bias)?;
        }
    }
    Ok(out)
}

/// Scales the write frequency of the targeted cells. `activity` must already
/// list every cell's write frequency (see [`propagate_activity`]).
pub fn apply_workload_trojan<T: Real>(
    activity: &ActivityProfile<T>,
    t: &WorkloadAmplification<T>,
) -> Result<ActivityProfile<T>> {
    if !(t.factor >= T::one()) || !t.factor.is_finite() {
        return Err(HciError::InvalidInput(format!(
            "workload factor must be >= 1, got {}",
            t.factor
        )));
    }
    let mut out = activity.clone();
    for target in &t.targets {
        if target == "*" {
            for f in out.writes.values_mut() {
                *f = *f * t.factor;
            }
            continue;
        }
        let f = out
            .writes
            .get_mut(target)
            .ok_or_else(|| HciError::UnknownTarget(target.clone()))?;
        *f = *f * t.factor;
    }
    Ok(out)
}

/// Applies every vector of `scenario` to `base`, process first, then bias, then workload.
pub fn compose_scenario<T: Real>(
    base: &CircuitBundle<T>,
    scenario: &TrojanScenario<T>,
) -> Result<CircuitBundle<T>> {
    let mut ordered: Vec<&TrojanVector<T>> = scenario.trojans.iter().collect();
    ordered.sort_by_key(|t| t.rank());
    let mut out = base.clone();
    let mut resolved_writes = false;
    for t in ordered {
        match t {
            TrojanVector::Process(p) => out.process = apply_process_trojan(&out.process, p)?,
            TrojanVector::Bias(b) => out.netlist = apply_bias_trojan(&out.netlist, b)?,
            TrojanVector::Workload(w) => {
                if !resolved_writes {
                    out.stimulus.writes = propagate_activity(&out.netlist, &out.stimulus)?.writes;
                    resolved_writes = true;
                }
                out.stimulus = apply_workload_trojan(&out.stimulus, w)?;
            }
        }
    }
    Ok(out)
}
