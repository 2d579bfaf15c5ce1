use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::circuit_sim::activity::{
    propagate_activity, transistor_bias, ActivityProfile, OperatingPoint,
};
use crate::circuit_sim::delay::{gate_delay, sram_write_check, DelayModelConfig, WriteCheck};
use crate::circuit_sim::netlist::{GateKind, Netlist};
use crate::detection::monitors::{ring_osc_frequency, IndicatorModel, MeasuredIndicators};
use crate::device_aging::{
    apply_stress, bake_recover, classify_mechanisms, degraded_params, stress_factor,
    AgingModelConfig, BiasCondition, Channel, ProcessProfile, TransistorParams, TransistorState,
};
use crate::error::{HciError, Result};
use crate::scalar::{as_f64, lit, Real};

/// Everything a trojan can touch: structure (with bias overrides), workload and process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CircuitBundle<T> {
    pub netlist: Netlist<T>,
    pub stimulus: ActivityProfile<T>,
    pub process: ProcessProfile<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct ModelConfig<T> {
    pub aging: AgingModelConfig<T>,
    pub delay: DelayModelConfig<T>,
    pub indicators: IndicatorModel<T>,
    pub operating: OperatingPoint<T>,
}

impl<T: Real> Default for ModelConfig<T> {
    fn default() -> Self {
        ModelConfig {
            aging: AgingModelConfig::default(),
            delay: DelayModelConfig::default(),
            indicators: IndicatorModel::default(),
            operating: OperatingPoint::default(),
        }
    }
}

impl<T: Real> ModelConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.aging.validate()?;
        self.delay.validate()?;
        self.indicators.validate()?;
        if !(self.operating.vdd > T::zero()) || !self.operating.temperature.is_finite() {
            return Err(HciError::InvalidInput(
                "operating point: vdd must be > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCause {
    /// Threshold drift reached the lifetime criterion.
    VtThreshold,
    /// A passthrough device can no longer write its cell.
    WriteFailure,
    /// Threshold reached the supply; the device no longer switches.
    Nonfunctional,
    /// Over-nitrided oxide broke down.
    OxideBreakdown,
}

/// Observation of a device at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement<T> {
    /// `None` when some stage no longer switches.
    pub indicators: Option<MeasuredIndicators<T>>,
    /// First reason the device is not functional, if any.
    pub failure: Option<String>,
    pub max_delta_vt: T,
}

impl<T> Measurement<T> {
    pub fn functional(&self) -> bool {
        self.failure.is_none()
    }
}

/// A circuit instance with per-transistor parameters and aging state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Device<T> {
    pub bundle: CircuitBundle<T>,
    pub model: ModelConfig<T>,
    params: BTreeMap<String, TransistorParams<T>>,
    pub states: BTreeMap<String, TransistorState<T>>,
}

impl<T: Real> Device<T> {
    pub fn new(bundle: CircuitBundle<T>, model: ModelConfig<T>) -> Result<Self> {
        model.validate()?;
        bundle.process.validate()?;
        propagate_activity(&bundle.netlist, &bundle.stimulus)?;
        let mut params = BTreeMap::new();
        let mut states = BTreeMap::new();
        for gate in bundle.netlist.gates() {
            for r in gate.kind.roles() {
                let name = gate.transistor_name(r.role);
                let vt0 = match r.channel {
                    Channel::Nmos => model.delay.nmos_vt0,
                    Channel::Pmos => model.delay.pmos_vt0,
                };
                params.insert(
                    name.clone(),
                    TransistorParams::new(name.clone(), r.channel, vt0, model.delay.gm0)?,
                );
                states.insert(name, TransistorState::pristine());
            }
        }
        Ok(Device {
            bundle,
            model,
            params,
            states,
        })
    }

    pub fn params(&self) -> &BTreeMap<String, TransistorParams<T>> {
        &self.params
    }

    pub fn netlist(&self) -> &Netlist<T> {
        &self.bundle.netlist
    }

    /// Perturbs every threshold by a seeded Gaussian draw (σ in volts).
    pub fn apply_vt0_jitter(&mut self, seed: u64, sigma: T) -> Result<()> {
        if sigma == T::zero() {
            return Ok(());
        }
        let normal = Normal::new(0.0, as_f64(sigma))
            .map_err(|e| HciError::InvalidInput(format!("vt0 jitter: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let floor: T = lit(1e-3);
        for p in self.params.values_mut() {
            p.vt0 = (p.vt0 + lit(normal.sample(&mut rng))).max(floor);
        }
        Ok(())
    }

    pub fn activity(&self) -> Result<ActivityProfile<T>> {
        propagate_activity(&self.bundle.netlist, &self.bundle.stimulus)
    }

    pub fn biases(&self, op: &OperatingPoint<T>) -> Result<BTreeMap<String, BiasCondition<T>>> {
        let activity = self.activity()?;
        let mut out = BTreeMap::new();
        for gate in self.bundle.netlist.gates() {
            for (role, bias) in transistor_bias(gate, &activity, op)? {
                out.insert(gate.transistor_name(&role), bias);
            }
        }
        Ok(out)
    }

    /// Stress rate of every transistor. Fails with oxide breakdown when the
    /// process is past its breakdown concentration.
    pub fn stress_rates(&self, op: &OperatingPoint<T>) -> Result<BTreeMap<String, T>> {
        if self.bundle.process.is_breakdown() {
            return Err(self.bundle.process.breakdown_error());
        }
        let aging = &self.model.aging;
        let mut out = BTreeMap::new();
        for (name, bias) in self.biases(op)? {
            let act = classify_mechanisms(&bias, aging.classify_tol, aging)?;
            let rate = stress_factor(
                &act,
                &bias,
                &self.bundle.process,
                &self.params[&name],
                aging,
            )?;
            out.insert(name, rate);
        }
        Ok(out)
    }

    pub fn age(&mut self, rates: &BTreeMap<String, T>, dt: T) -> Result<()> {
        for (name, state) in self.states.iter_mut() {
            let rate = rates.get(name).copied().unwrap_or(T::zero());
            *state = apply_stress(state, rate, dt, &self.model.aging)?;
        }
        Ok(())
    }

    pub fn bake(&mut self, temperature: T, duration: T) -> Result<()> {
        for state in self.states.values_mut() {
            *state = bake_recover(state, temperature, duration, &self.model.aging)?;
        }
        Ok(())
    }

    /// Damage at which each transistor fails, and why. Passthrough devices also
    /// fail when their write overdrive drops below the margin.
    pub fn failure_limits(&self, vdd: T) -> BTreeMap<String, (T, FailureCause)> {
        let mut out = BTreeMap::new();
        for gate in self.bundle.netlist.gates() {
            for r in gate.kind.roles() {
                let name = gate.transistor_name(r.role);
                let vt0 = self.params[&name].vt0;
                let mut limit = (
                    self.model.aging.vt_fail_threshold,
                    FailureCause::VtThreshold,
                );
                if r.passthrough {
                    let write = vdd - self.model.delay.write_margin - vt0;
                    if write < limit.0 {
                        limit = (write, FailureCause::WriteFailure);
                    }
                }
                let dead = vdd - vt0;
                if dead < limit.0 {
                    limit = (dead, FailureCause::Nonfunctional);
                }
                out.insert(name, limit);
            }
        }
        out
    }

    /// Measures delay, ring frequency, worst threshold and leakage at `vdd`.
    ///
    /// The ring monitor threads one stage per gate of the circuit and is closed
    /// with pristine inverters until it has an odd count of at least three stages.
    pub fn measure(&self, vdd: T) -> Measurement<T> {
        let aging = &self.model.aging;
        let delay_cfg = &self.model.delay;
        let mut failure = None;
        let mut max_vt = T::zero();
        let mut max_shift = T::zero();
        let mut iddq = T::zero();
        for (name, p) in &self.params {
            let s = &self.states[name];
            let (vt, _) = degraded_params(p, s, aging);
            max_vt = max_vt.max(vt);
            max_shift = max_shift.max(s.delta_vt(aging));
            iddq = iddq + self.model.indicators.iddq_contribution(s.total_traps());
        }

        let mut gate_delays: BTreeMap<&str, T> = BTreeMap::new();
        let mut stage_delays = Vec::new();
        let mut broken = false;
        for gate in self.bundle.netlist.gates() {
            let mut worst = T::zero();
            for r in gate.kind.roles() {
                if gate.kind == GateKind::Sram6t && !r.passthrough {
                    continue;
                }
                let name = gate.transistor_name(r.role);
                match gate_delay(
                    gate.kind,
                    &self.params[&name],
                    &self.states[&name],
                    vdd,
                    delay_cfg,
                    aging,
                ) {
                    Ok(d) => worst = worst.max(d),
                    Err(e) => {
                        failure.get_or_insert_with(|| e.to_string());
                        broken = true;
                    }
                }
            }
            if gate.kind == GateKind::Sram6t && failure.is_none() {
                match sram_write_check(gate, &self.params, &self.states, vdd, delay_cfg, aging) {
                    Ok(WriteCheck::Pass) => {}
                    Ok(WriteCheck::Fail(t)) => failure = Some(format!("write failure through {t}")),
                    Err(e) => failure = Some(e.to_string()),
                }
            }
            gate_delays.insert(gate.name.as_str(), worst);
            stage_delays.push(worst);
        }
        if broken {
            return Measurement {
                indicators: None,
                failure,
                max_delta_vt: max_shift,
            };
        }

        let mut arrival: BTreeMap<&str, T> = BTreeMap::new();
        let mut prop_delay = T::zero();
        for gate in self.bundle.netlist.topological() {
            let start = gate
                .inputs()
                .iter()
                .map(|n| arrival.get(n.as_str()).copied().unwrap_or(T::zero()))
                .fold(T::zero(), T::max);
            let done = start + gate_delays[gate.name.as_str()];
            match gate.output() {
                Some(out) => {
                    arrival.insert(out, done);
                    if self.bundle.netlist.primary_outputs().is_empty() {
                        prop_delay = prop_delay.max(done);
                    }
                }
                None => prop_delay = prop_delay.max(done),
            }
        }
        for out in self.bundle.netlist.primary_outputs() {
            prop_delay = prop_delay.max(arrival.get(out.as_str()).copied().unwrap_or(T::zero()));
        }

        let filler = delay_cfg.d0.inv;
        if stage_delays.len() % 2 == 0 {
            stage_delays.push(filler);
        }
        while stage_delays.len() < 3 {
            stage_delays.push(filler);
            stage_delays.push(filler);
        }
        let ring_freq = ring_osc_frequency(&stage_delays)
            .expect("ring has an odd count of at least 3 positive stages");

        Measurement {
            indicators: Some(MeasuredIndicators {
                prop_delay,
                ring_freq,
                vt_estimate: max_vt,
                iddq_proxy: iddq,
            }),
            failure,
            max_delta_vt: max_shift,
        }
    }
}
