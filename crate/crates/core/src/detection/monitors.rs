//! On-die style monitors: delay canary, ring oscillator and guard-band check.

use serde::{Deserialize, Serialize};

use crate::error::{HciError, Result};
use crate::scalar::{lit, Real};

/// Indicators a tester can observe on a packaged part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredIndicators<T> {
    /// Critical-path propagation delay (s).
    pub prop_delay: T,
    /// Ring-oscillator frequency (Hz).
    pub ring_freq: T,
    /// Largest threshold voltage among the device's transistors (V).
    pub vt_estimate: T,
    /// Quiescent supply current proxy (A).
    pub iddq_proxy: T,
}

impl<T: Real> MeasuredIndicators<T> {
    /// Largest relative change of any indicator against `reference`.
    pub fn relative_shift(&self, reference: &Self) -> T {
        let rel = |x: T, r: T| ((x - r) / r).abs();
        rel(self.prop_delay, reference.prop_delay)
            .max(rel(self.ring_freq, reference.ring_freq))
            .max(rel(self.vt_estimate, reference.vt_estimate))
            .max(rel(self.iddq_proxy, reference.iddq_proxy))
    }
}

/// Leakage proxy: `I0·(1 + β·(n_it + n_ot)/N_ref)` summed over transistors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct IndicatorModel<T> {
    /// Fresh quiescent current per transistor (A).
    pub iddq_per_transistor: T,
    pub iddq_beta: T,
    /// Trap density normalizing the leakage increase (cm⁻²).
    pub iddq_n_ref: T,
}

impl<T: Real> Default for IndicatorModel<T> {
    fn default() -> Self {
        IndicatorModel {
            iddq_per_transistor: lit(1e-9),
            iddq_beta: lit(0.5),
            iddq_n_ref: lit(1e12),
        }
    }
}

impl<T: Real> IndicatorModel<T> {
    pub fn iddq_contribution(&self, total_traps: T) -> T {
        self.iddq_per_transistor * (T::one() + self.iddq_beta * total_traps / self.iddq_n_ref)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iddq_per_transistor > T::zero()
            && self.iddq_beta >= T::zero()
            && self.iddq_n_ref > T::zero()
        {
            Ok(())
        } else {
            Err(HciError::InvalidInput(
                "indicator model: iddq_per_transistor and iddq_n_ref must be > 0, iddq_beta >= 0"
                    .into(),
            ))
        }
    }
}

/// Delay trajectory of a healthy device: threshold drift `c·tⁿ` pushed through
/// the alpha-power delay law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HealthyAgingCurve<T> {
    /// `A·S` of the most stressed healthy transistor (V·s⁻ⁿ).
    pub dvt_coeff: T,
    pub exponent: T,
    pub vdd: T,
    pub vt0: T,
    pub alpha: T,
}

impl<T: Real> HealthyAgingCurve<T> {
    /// A curve that never moves.
    pub fn flat(vdd: T, vt0: T, alpha: T) -> Self {
        HealthyAgingCurve {
            dvt_coeff: T::zero(),
            exponent: lit(0.5),
            vdd,
            vt0,
            alpha,
        }
    }

    /// Delay multiplier at `age`; infinite once the healthy device would stop switching.
    pub fn delay_factor(&self, age: T) -> T {
        let shift = self.dvt_coeff * age.max(T::zero()).powf(self.exponent);
        let headroom = self.vdd - self.vt0 - shift;
        if headroom <= T::zero() {
            return T::infinity();
        }
        ((self.vdd - self.vt0) / headroom).powf(self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanaryConfig<T> {
    pub reference_delay: T,
    pub expected_aging_curve: HealthyAgingCurve<T>,
    pub margin: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanaryOutcome<T> {
    pub flag: bool,
    pub expected: T,
}

/// Compares a measured delay with the stored, age-adjusted reference.
///
/// The canary's own reference never ages, and the result carries no cause.
pub fn canary_check<T: Real>(
    measured: T,
    age: T,
    cfg: &CanaryConfig<T>,
) -> Result<CanaryOutcome<T>> {
    if !(measured > T::zero()) {
        return Err(HciError::InvalidInput(format!(
            "measured delay must be > 0, got {measured}"
        )));
    }
    if !(cfg.margin > T::zero()) {
        return Err(HciError::InvalidInput("canary margin must be > 0".into()));
    }
    let expected = cfg.reference_delay * cfg.expected_aging_curve.delay_factor(age);
    Ok(CanaryOutcome {
        flag: measured > expected * (T::one() + cfg.margin),
        expected,
    })
}

/// Frequency of a ring of inverting stages: `1 / (2·Σ delays)`.
pub fn ring_osc_frequency<T: Real>(stage_delays: &[T]) -> Result<T> {
    let n = stage_delays.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(HciError::InvalidRing(n));
    }
    if stage_delays
        .iter()
        .any(|d| !(*d > T::zero()) || !d.is_finite())
    {
        return Err(HciError::InvalidInput(
            "ring stage delays must be finite and > 0".into(),
        ));
    }
    let total = stage_delays.iter().fold(T::zero(), |acc, d| acc + *d);
    Ok(T::one() / (lit::<T>(2.0) * total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardBand {
    Within,
    Violated,
}

/// Violated iff `aged > fresh·(1 + guard_band)`; the boundary is within.
pub fn guard_band_check<T: Real>(
    fresh_delay: T,
    aged_delay: T,
    guard_band: T,
) -> Result<GuardBand> {
    if !(fresh_delay > T::zero()) || !(guard_band > T::zero()) {
        return Err(HciError::InvalidInput(
            "guard-band check needs fresh_delay > 0 and guard_band > 0".into(),
        ));
    }
    if aged_delay > fresh_delay * (T::one() + guard_band) {
        Ok(GuardBand::Violated)
    } else {
        Ok(GuardBand::Within)
    }
}
