//! Switching-activity propagation and per-transistor bias derivation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit_sim::netlist::{Gate, GateKind, Netlist};
use crate::device_aging::{BiasCondition, Channel};
use crate::error::{HciError, Result};
use crate::scalar::{lit, Real};

/// Toggle rate (transitions per second) and static probability of a net.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetActivity<T> {
    pub rate: T,
    /// Probability the net is high.
    pub duty: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ActivityProfile<T> {
    #[serde(default)]
    pub nets: BTreeMap<String, NetActivity<T>>,
    /// Write frequency (Hz) of SRAM cells, keyed by cell name.
    #[serde(default)]
    pub writes: BTreeMap<String, T>,
}

impl<T> Default for ActivityProfile<T> {
    fn default() -> Self {
        ActivityProfile {
            nets: BTreeMap::new(),
            writes: BTreeMap::new(),
        }
    }
}

impl<T: Real> ActivityProfile<T> {
    pub fn rate(&self, net: &str) -> T {
        self.nets.get(net).map_or(T::zero(), |a| a.rate)
    }

    pub fn write_frequency(&self, cell: &str) -> T {
        self.writes.get(cell).copied().unwrap_or(T::zero())
    }

    /// Each write pulses the wordline up and back down.
    pub fn passthrough_rate(&self, cell: &str) -> T {
        lit::<T>(2.0) * self.write_frequency(cell)
    }
}

/// Supply and ambient temperature a circuit runs at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct OperatingPoint<T> {
    pub vdd: T,
    /// °C
    pub temperature: T,
}

impl<T: Real> Default for OperatingPoint<T> {
    fn default() -> Self {
        OperatingPoint {
            vdd: lit(1.2),
            temperature: lit(25.0),
        }
    }
}

/// Transition-density propagation from primary inputs to every net.
///
/// Inputs are treated as independent, so `D(y) = Σ P(∂y/∂xᵢ)·D(xᵢ)`. SRAM
/// write frequencies are taken from the stimulus when given, otherwise half the
/// wordline toggle rate.
pub fn propagate_activity<T: Real>(
    netlist: &Netlist<T>,
    stimulus: &ActivityProfile<T>,
) -> Result<ActivityProfile<T>> {
    let mut out = ActivityProfile::default();
    for net in netlist.primary_inputs() {
        let a = stimulus
            .nets
            .get(net)
            .ok_or_else(|| HciError::IncompleteStimulus(net.clone()))?;
        if !(a.rate >= T::zero()) || !a.rate.is_finite() {
            return Err(HciError::InvalidInput(format!(
                "net `{net}`: rate must be >= 0"
            )));
        }
        if !(a.duty >= T::zero() && a.duty <= T::one()) {
            return Err(HciError::InvalidInput(format!(
                "net `{net}`: duty must lie in [0, 1]"
            )));
        }
        out.nets.insert(net.clone(), *a);
    }
    let one = T::one();
    for gate in netlist.topological() {
        let Some(y) = gate.output() else {
            continue;
        };
        let ins: Vec<NetActivity<T>> = gate.inputs().iter().map(|n| out.nets[n]).collect();
        let act = match gate.kind {
            GateKind::Inv => NetActivity {
                rate: ins[0].rate,
                duty: one - ins[0].duty,
            },
            GateKind::Nand2 => {
                let (a, b) = (ins[0], ins[1]);
                NetActivity {
                    rate: b.duty * a.rate + a.duty * b.rate,
                    duty: one - a.duty * b.duty,
                }
            }
            GateKind::Nor2 => {
                let (a, b) = (ins[0], ins[1]);
                NetActivity {
                    rate: (one - b.duty) * a.rate + (one - a.duty) * b.rate,
                    duty: (one - a.duty) * (one - b.duty),
                }
            }
            GateKind::Sram6t => unreachable!("SRAM cells drive no nets"),
        };
        out.nets.insert(y.to_string(), act);
    }
    for (cell, freq) in &stimulus.writes {
        match netlist.gate(cell) {
            Some(g) if g.kind == GateKind::Sram6t => {}
            _ => return Err(HciError::UnknownTarget(cell.clone())),
        }
        if !(*freq >= T::zero()) {
            return Err(HciError::InvalidInput(format!(
                "cell `{cell}`: write frequency must be >= 0"
            )));
        }
    }
    for gate in netlist.gates() {
        if let Some(wl) = gate.wordline() {
            let freq = stimulus
                .writes
                .get(&gate.name)
                .copied()
                .unwrap_or_else(|| out.rate(wl) / lit(2.0));
            out.writes.insert(gate.name.clone(), freq);
        }
    }
    Ok(out)
}

/// Bias of every transistor of `gate`, keyed by role.
///
/// Defaults follow the topology: each device sees the supply on drain and gate
/// at the point it switches (`vd = vg = vdd`), toggling with the net that
/// drives it. Passthrough devices toggle twice per write; cell-internal devices
/// flip on half the writes. Overrides replace fields verbatim.
pub fn transistor_bias<T: Real>(
    gate: &Gate<T>,
    activity: &ActivityProfile<T>,
    op: &OperatingPoint<T>,
) -> Result<BTreeMap<String, BiasCondition<T>>> {
    for role in gate.bias_overrides.keys() {
        if gate.role(role).is_none() {
            return Err(HciError::UnknownTarget(gate.transistor_name(role)));
        }
    }
    let half: T = lit(0.5);
    let mut out = BTreeMap::new();
    for r in gate.kind.roles() {
        let (rate, high) = match r.input_pin {
            Some(pin) => {
                let net = &gate.pins[pin];
                let a = activity
                    .nets
                    .get(net)
                    .ok_or_else(|| HciError::IncompleteStimulus(net.clone()))?;
                (a.rate, a.duty)
            }
            None if r.passthrough => {
                let wl = gate
                    .wordline()
                    .expect("passthrough roles belong to SRAM cells");
                let duty = activity.nets.get(wl).map_or(half, |a| a.duty);
                (activity.passthrough_rate(&gate.name), duty)
            }
            None => (activity.write_frequency(&gate.name) * half, half),
        };
        let duty = match r.channel {
            Channel::Nmos => high,
            Channel::Pmos => T::one() - high,
        };
        let base = BiasCondition {
            vd: op.vdd,
            vg: op.vdd,
            vs: T::zero(),
            vsub: T::zero(),
            temperature: op.temperature,
            toggle_rate: rate,
            duty,
        };
        let bias = match gate.bias_overrides.get(r.role) {
            Some(ov) => ov.apply(&base),
            None => base,
        };
        out.insert(r.role.to_string(), bias);
    }
    Ok(out)
}
