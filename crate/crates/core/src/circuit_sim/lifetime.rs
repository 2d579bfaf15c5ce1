use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit_sim::device::{Device, FailureCause};
use crate::detection::monitors::MeasuredIndicators;
use crate::device_aging::{time_to_damage, TransistorState};
use crate::error::{HciError, Result};
use crate::scalar::{as_f64, Real};

const MAX_EPOCHS: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure<T> {
    pub time: T,
    /// `None` for whole-die failures such as oxide breakdown.
    pub transistor: Option<String>,
    pub cause: FailureCause,
}

/// One row of an indicator trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample<T> {
    pub time: T,
    pub prop_delay: T,
    pub ring_freq: T,
    pub vt_estimate: T,
    pub iddq_proxy: T,
    pub max_delta_vt: T,
}

impl<T: Real> TraceSample<T> {
    pub fn indicators(&self) -> MeasuredIndicators<T> {
        MeasuredIndicators {
            prop_delay: self.prop_delay,
            ring_freq: self.ring_freq,
            vt_estimate: self.vt_estimate,
            iddq_proxy: self.iddq_proxy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeResult<T> {
    pub first_failure: Option<Failure<T>>,
    pub trace: Vec<TraceSample<T>>,
}

fn sample<T: Real>(device: &Device<T>, time: T) -> Option<TraceSample<T>> {
    let m = device.measure(device.model.operating.vdd);
    m.indicators.map(|i| TraceSample {
        time,
        prop_delay: i.prop_delay,
        ring_freq: i.ring_freq,
        vt_estimate: i.vt_estimate,
        iddq_proxy: i.iddq_proxy,
        max_delta_vt: m.max_delta_vt,
    })
}

/// Ages `device` at its operating point until the first transistor fails or
/// `horizon` is reached, sampling indicators at t = 0 and after every epoch.
///
/// Stress is constant within an epoch, so the crossing time inside the failing
/// epoch is solved exactly from the power law instead of being bisected.
pub fn simulate_lifetime<T: Real>(
    device: &Device<T>,
    horizon: T,
    epoch: T,
) -> Result<LifetimeResult<T>> {
    simulate_lifetime_observed(device, horizon, epoch, |_, _| {})
}

/// Like [`simulate_lifetime`], calling `observe(time, states)` after every step.
pub fn simulate_lifetime_observed<T, F>(
    device: &Device<T>,
    horizon: T,
    epoch: T,
    mut observe: F,
) -> Result<LifetimeResult<T>>
where
    T: Real,
    F: FnMut(T, &BTreeMap<String, TransistorState<T>>),
{
    if !(epoch > T::zero()) || !(horizon >= epoch) || !horizon.is_finite() {
        return Err(HciError::InvalidInput(format!(
            "need epoch > 0 and horizon >= epoch (epoch={epoch}, horizon={horizon})"
        )));
    }
    if as_f64(horizon / epoch) > MAX_EPOCHS {
        return Err(HciError::InvalidInput(format!(
            "horizon/epoch exceeds {MAX_EPOCHS:e} steps"
        )));
    }
    let mut dev = device.clone();
    let op = dev.model.operating;
    let mut trace: Vec<TraceSample<T>> = sample(&dev, T::zero()).into_iter().collect();
    observe(T::zero(), &dev.states);

    let rates = match dev.stress_rates(&op) {
        Ok(r) => r,
        Err(HciError::OxideBreakdown { .. }) => {
            return Ok(LifetimeResult {
                first_failure: Some(Failure {
                    time: T::zero(),
                    transistor: None,
                    cause: FailureCause::OxideBreakdown,
                }),
                trace,
            });
        }
        Err(e) => return Err(e),
    };
    let limits = dev.failure_limits(op.vdd);
    let aging = dev.model.aging;

    let mut t = T::zero();
    while t < horizon {
        let dt = epoch.min(horizon - t);
        let mut hit: Option<(T, &String, FailureCause)> = None;
        for (name, &(limit, cause)) in &limits {
            let rate = rates[name];
            if let Some(tt) = time_to_damage(&dev.states[name], rate, limit, &aging) {
                if tt <= dt && hit.as_ref().is_none_or(|h| tt < h.0) {
                    hit = Some((tt, name, cause));
                }
            }
        }
        if let Some((tt, name, cause)) = hit {
            dev.age(&rates, tt)?;
            t = t + tt;
            observe(t, &dev.states);
            trace.extend(sample(&dev, t));
            return Ok(LifetimeResult {
                first_failure: Some(Failure {
                    time: t,
                    transistor: Some(name.clone()),
                    cause,
                }),
                trace,
            });
        }
        dev.age(&rates, dt)?;
        t = t + dt;
        observe(t, &dev.states);
        trace.extend(sample(&dev, t));
    }
    Ok(LifetimeResult {
        first_failure: None,
        trace,
    })
}

/// Remaining time until each transistor reaches its own failure limit at the
/// device's operating point, from its current state. `None` for unstressed devices.
pub fn transistor_lifetimes<T: Real>(device: &Device<T>) -> Result<BTreeMap<String, Option<T>>> {
    let op = device.model.operating;
    let rates = device.stress_rates(&op)?;
    let limits = device.failure_limits(op.vdd);
    Ok(limits
        .iter()
        .map(|(name, &(limit, _))| {
            let t = time_to_damage(
                &device.states[name],
                rates[name],
                limit,
                &device.model.aging,
            );
            (name.clone(), t)
        })
        .collect())
}
