//! Per-transistor hot-carrier stress, trap accumulation and recovery.
//!
//! A transistor's stress rate `S` combines three injection mechanisms
//! (drain-avalanche, channel-hot-electron, substrate-hot-electron) with the
//! switching activity, temperature, channel type and the nitridation quality
//! of the gate oxide. Damage follows the power law `ΔVt = A·S·tⁿ`; piecewise
//! constant stress is accumulated with the equivalent-time rule so that a
//! stepped history reproduces the closed form exactly.
//!
//! Generated traps are split between interface traps (permanent) and oxide
//! traps (recoverable by an unbiased bake).

use serde::{Deserialize, Serialize};

use crate::error::{HciError, Result};
use crate::scalar::{clamp, lit, Real};

const BOLTZMANN_EV_PER_K: f64 = 8.617_333_262e-5;
const CELSIUS_TO_KELVIN: f64 = 273.15;

/// Energy thresholds for carrier injection and trap formation (eV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants<T> {
    electron_barrier: T,
    hole_barrier: T,
    si_h_bond: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn new() -> Self {
        PhysicalConstants {
            electron_barrier: lit(3.3),
            hole_barrier: lit(4.6),
            si_h_bond: lit(0.3),
        }
    }

    /// Si–SiO₂ barrier an electron must overcome to enter the oxide.
    pub fn electron_barrier(&self) -> T {
        self.electron_barrier
    }

    /// Si–SiO₂ barrier for holes.
    pub fn hole_barrier(&self) -> T {
        self.hole_barrier
    }

    /// Minimum carrier energy that breaks a passivating Si–H bond.
    pub fn si_h_bond(&self) -> T {
        self.si_h_bond
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Terminal voltages, temperature and switching activity seen by one transistor.
///
/// Voltages are magnitudes relative to ground; the mechanism classifier works on
/// source-referenced differences. PMOS devices use the same magnitude convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasCondition<T> {
    pub vd: T,
    pub vg: T,
    pub vs: T,
    pub vsub: T,
    /// °C
    pub temperature: T,
    /// Hz
    pub toggle_rate: T,
    /// Fraction of time the bias is applied.
    pub duty: T,
}

impl<T: Real> BiasCondition<T> {
    pub fn new(vd: T, vg: T, vs: T, vsub: T) -> Self {
        BiasCondition {
            vd,
            vg,
            vs,
            vsub,
            temperature: lit(25.0),
            toggle_rate: T::zero(),
            duty: lit(0.5),
        }
    }

    pub fn with_activity(mut self, toggle_rate: T, duty: T) -> Self {
        self.toggle_rate = toggle_rate;
        self.duty = duty;
        self
    }

    pub fn with_temperature(mut self, temperature: T) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let voltages = [self.vd, self.vg, self.vs, self.vsub];
        if voltages.iter().any(|v| !v.is_finite()) {
            return Err(HciError::InvalidInput(format!(
                "bias voltages must be finite (vd={}, vg={}, vs={}, vsub={})",
                self.vd, self.vg, self.vs, self.vsub
            )));
        }
        if !self.temperature.is_finite() {
            return Err(HciError::InvalidInput("temperature must be finite".into()));
        }
        if !(self.toggle_rate >= T::zero()) || !self.toggle_rate.is_finite() {
            return Err(HciError::InvalidInput(format!(
                "toggle rate must be finite and >= 0, got {}",
                self.toggle_rate
            )));
        }
        if !(self.duty >= T::zero() && self.duty <= T::one()) {
            return Err(HciError::InvalidInput(format!(
                "duty must lie in [0, 1], got {}",
                self.duty
            )));
        }
        Ok(())
    }
}

/// Severity of each injection mechanism, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MechanismActivation<T> {
    pub w_dahc: T,
    pub w_che: T,
    pub w_she: T,
}

impl<T: Real> MechanismActivation<T> {
    pub fn is_inactive(&self) -> bool {
        self.w_dahc == T::zero() && self.w_che == T::zero() && self.w_she == T::zero()
    }
}

/// Gate-oxide nitridation state of the wafer a device came from.
///
/// Concentrations are normalized. Inside `[c_lo, c_hi]` nitridation is fully
/// effective; below it the trap generation rate rises linearly with the
/// deficit; at or above `breakdown_threshold` the oxide breaks down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct ProcessProfile<T> {
    pub nitrate_conc: T,
    pub c_lo: T,
    pub c_hi: T,
    pub breakdown_threshold: T,
    /// 1.0 is a nominal anneal; lower values leave more trap precursors.
    pub anneal_quality: T,
    /// Trap-rate slope below the acceptable range (zero nitridation gives `1 + s`).
    pub deficit_slope: T,
    /// Extra multiplier per unit of anneal-quality loss.
    pub anneal_slope: T,
}

impl<T: Real> Default for ProcessProfile<T> {
    fn default() -> Self {
        ProcessProfile {
            nitrate_conc: lit(0.5),
            c_lo: lit(0.3),
            c_hi: lit(0.7),
            breakdown_threshold: lit(1.0),
            anneal_quality: T::one(),
            deficit_slope: lit(9.0),
            anneal_slope: lit(2.0),
        }
    }
}

impl<T: Real> ProcessProfile<T> {
    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        if !(z < self.c_lo && self.c_lo < self.c_hi && self.c_hi < self.breakdown_threshold) {
            return Err(HciError::InvalidInput(format!(
                "process window must satisfy 0 < c_lo < c_hi < breakdown (got {}, {}, {})",
                self.c_lo, self.c_hi, self.breakdown_threshold
            )));
        }
        if !(self.nitrate_conc >= z) || !self.nitrate_conc.is_finite() {
            return Err(HciError::InvalidInput(format!(
                "nitrate concentration must be >= 0, got {}",
                self.nitrate_conc
            )));
        }
        if !(self.anneal_quality > z && self.anneal_quality <= T::one()) {
            return Err(HciError::InvalidInput(format!(
                "anneal quality must lie in (0, 1], got {}",
                self.anneal_quality
            )));
        }
        if !(self.deficit_slope >= z && self.anneal_slope >= z) {
            return Err(HciError::InvalidInput("process slopes must be >= 0".into()));
        }
        Ok(())
    }

    pub fn is_breakdown(&self) -> bool {
        self.nitrate_conc >= self.breakdown_threshold
    }

    /// μ(c) from the concentration alone (ignores anneal quality).
    pub fn concentration_multiplier(&self) -> Result<T> {
        if self.is_breakdown() {
            return Err(self.breakdown_error());
        }
        let c = self.nitrate_conc;
        if c < self.c_lo {
            Ok(T::one() + self.deficit_slope * (self.c_lo - c) / self.c_lo)
        } else {
            Ok(T::one())
        }
    }

    /// Total trap-generation multiplier including anneal degradation.
    pub fn trap_multiplier(&self) -> Result<T> {
        let anneal = T::one() + self.anneal_slope * (T::one() - self.anneal_quality);
        Ok(self.concentration_multiplier()? * anneal)
    }

    pub(crate) fn breakdown_error(&self) -> HciError {
        HciError::OxideBreakdown {
            concentration: crate::scalar::as_f64(self.nitrate_conc),
            threshold: crate::scalar::as_f64(self.breakdown_threshold),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Nmos,
    Pmos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransistorParams<T> {
    pub name: String,
    pub channel: Channel,
    /// Threshold magnitude (V).
    pub vt0: T,
    /// Transconductance (S).
    pub gm0: T,
}

impl<T: Real> TransistorParams<T> {
    pub fn new(name: impl Into<String>, channel: Channel, vt0: T, gm0: T) -> Result<Self> {
        if !(vt0 > T::zero()) || !(gm0 > T::zero()) {
            return Err(HciError::InvalidInput(format!(
                "transistor parameters must be positive (vt0={}, gm0={})",
                vt0, gm0
            )));
        }
        Ok(TransistorParams {
            name: name.into(),
            channel,
            vt0,
            gm0,
        })
    }
}

/// Accumulated aging of one transistor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TransistorState<T> {
    /// Interface trap density (cm⁻²), permanent.
    pub n_it: T,
    /// Oxide trap density (cm⁻²), recoverable by bake.
    pub n_ot: T,
    /// Equivalent accumulated damage (V); equals the threshold shift.
    pub damage: T,
    /// Operational time under stress (s).
    pub age: T,
}

impl<T: Real> TransistorState<T> {
    pub fn pristine() -> Self {
        TransistorState {
            n_it: T::zero(),
            n_ot: T::zero(),
            damage: T::zero(),
            age: T::zero(),
        }
    }

    /// Builds an aged state from trap densities; damage is derived from them.
    pub fn from_traps(n_it: T, n_ot: T, age: T, cfg: &AgingModelConfig<T>) -> Self {
        TransistorState {
            n_it,
            n_ot,
            damage: cfg.k_it * n_it + cfg.k_ot * n_ot,
            age,
        }
    }

    pub fn delta_vt(&self, cfg: &AgingModelConfig<T>) -> T {
        cfg.k_it * self.n_it + cfg.k_ot * self.n_ot
    }

    pub fn total_traps(&self) -> T {
        self.n_it + self.n_ot
    }
}

/// Constants of the aging law. None of these are measured values; they are
/// model configuration with defaults typical of a 1.2 V process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct AgingModelConfig<T> {
    /// `A` in `ΔVt = A·S·tⁿ` (V·s⁻ⁿ).
    pub prefactor: T,
    /// Time exponent `n`, in (0, 1).
    pub exponent: T,
    pub pmos_attenuation: T,
    /// Per-kelvin coefficient of `exp(c·(T − 25 °C))`; negative means colder is worse.
    pub temp_coeff: T,
    /// Threshold shift per unit interface-trap density (V·cm²).
    pub k_it: T,
    /// Threshold shift per unit oxide-trap density (V·cm²).
    pub k_ot: T,
    /// Share of generated damage landing in interface traps.
    pub interface_fraction: T,
    pub vt_fail_threshold: T,
    /// Reference voltage for the substrate mechanism and the classifier's scale.
    pub vdd_nominal: T,
    /// Width of the drain-avalanche peak in units of the `vd/vg` ratio.
    pub dahc_sigma: T,
    /// Relative tolerance of the mechanism classifier.
    pub classify_tol: T,
    pub severity_dahc: T,
    pub severity_che: T,
    pub severity_she: T,
    /// Toggle rate normalization (Hz).
    pub reference_frequency: T,
    /// Threshold shift at which transconductance has dropped by 1 − 1/e (V).
    pub gm_scale: T,
    /// Oxide-trap recovery time constant at `bake_reference_temp` (s).
    pub bake_tau_ref: T,
    pub bake_reference_temp: T,
    /// Activation energy of oxide-trap detrapping (eV).
    pub bake_activation_energy: T,
}

impl<T: Real> Default for AgingModelConfig<T> {
    fn default() -> Self {
        AgingModelConfig {
            prefactor: lit(5e-6),
            exponent: lit(0.5),
            pmos_attenuation: lit(0.1),
            temp_coeff: lit(-0.01),
            k_it: lit(5e-13),
            k_ot: lit(4e-13),
            interface_fraction: lit(0.6),
            vt_fail_threshold: lit(0.12),
            vdd_nominal: lit(1.2),
            dahc_sigma: lit(0.5),
            classify_tol: lit(0.05),
            severity_dahc: lit(10.0),
            severity_che: lit(1.0),
            severity_she: lit(1.0),
            reference_frequency: lit(1e6),
            gm_scale: lit(0.5),
            bake_tau_ref: lit(8.0 * 3600.0),
            bake_reference_temp: lit(250.0),
            bake_activation_energy: lit(1.0),
        }
    }
}

impl<T: Real> AgingModelConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        let one = T::one();
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(HciError::InvalidInput(format!("aging config: {what}")))
            }
        };
        check(
            self.prefactor > z && self.prefactor.is_finite(),
            "prefactor must be > 0",
        )?;
        check(
            self.exponent > z && self.exponent < one,
            "exponent must lie in (0, 1)",
        )?;
        check(
            self.pmos_attenuation > z && self.pmos_attenuation <= one,
            "pmos_attenuation must lie in (0, 1]",
        )?;
        check(self.temp_coeff.is_finite(), "temp_coeff must be finite")?;
        check(self.k_it > z && self.k_ot > z, "k_it and k_ot must be > 0")?;
        check(
            self.interface_fraction >= z && self.interface_fraction <= one,
            "interface_fraction must lie in [0, 1]",
        )?;
        check(self.vt_fail_threshold > z, "vt_fail_threshold must be > 0")?;
        check(self.vdd_nominal > z, "vdd_nominal must be > 0")?;
        check(self.dahc_sigma > z, "dahc_sigma must be > 0")?;
        check(
            self.classify_tol > z && self.classify_tol < lit(0.5),
            "classify_tol must lie in (0, 0.5)",
        )?;
        check(
            self.severity_dahc > z && self.severity_che > z && self.severity_she > z,
            "mechanism severities must be > 0",
        )?;
        check(
            self.reference_frequency > z,
            "reference_frequency must be > 0",
        )?;
        check(self.gm_scale > z, "gm_scale must be > 0")?;
        check(self.bake_tau_ref > z, "bake_tau_ref must be > 0")?;
        check(
            self.bake_activation_energy >= z,
            "bake_activation_energy must be >= 0",
        )?;
        Ok(())
    }

    /// Oxide-trap recovery time constant at a bake temperature (Arrhenius).
    pub fn bake_tau(&self, temperature: T) -> T {
        let k_b: T = lit(BOLTZMANN_EV_PER_K);
        let t_k = temperature + lit(CELSIUS_TO_KELVIN);
        let t_ref_k = self.bake_reference_temp + lit(CELSIUS_TO_KELVIN);
        self.bake_tau_ref
            * (self.bake_activation_energy / k_b * (T::one() / t_k - T::one() / t_ref_k)).exp()
    }

    pub fn temperature_acceleration(&self, temperature: T) -> T {
        (self.temp_coeff * (temperature - lit(25.0))).exp()
    }
}

fn onset<T: Real>(x: T, scale: T) -> T {
    clamp(x / scale, T::zero(), T::one())
}

/// Weights each injection mechanism for a bias point.
///
/// * drain-avalanche: Gaussian in `vds/vgs` peaking at 2, gated by gate overdrive;
/// * channel-hot-electron: plateau of 1 while `|vds − vgs| ≤ tol·max(|vds|,|vgs|)`,
///   falling linearly to 0 at twice that, gated by both terminals exceeding the source;
/// * substrate-hot-electron: zero up to `tol·vdd_nominal` of substrate bias,
///   saturating at `vdd_nominal`.
///
/// The onset gates ramp over `tol·vdd_nominal` and keep every weight continuous
/// where the source-referenced voltages approach zero.
pub fn classify_mechanisms<T: Real>(
    bias: &BiasCondition<T>,
    tol: T,
    cfg: &AgingModelConfig<T>,
) -> Result<MechanismActivation<T>> {
    bias.validate()?;
    if !(tol > T::zero() && tol < lit(0.5)) {
        return Err(HciError::InvalidInput(format!(
            "classifier tolerance must lie in (0, 0.5), got {tol}"
        )));
    }
    let zero = T::zero();
    let one = T::one();
    let vds = bias.vd - bias.vs;
    let vgs = bias.vg - bias.vs;
    let vsb = bias.vsub - bias.vs;
    let ramp = tol * cfg.vdd_nominal;

    let w_dahc = if vgs > zero {
        let dev = vds / vgs - lit(2.0);
        let sigma = cfg.dahc_sigma;
        (-(dev * dev) / (lit::<T>(2.0) * sigma * sigma)).exp() * onset(vgs, ramp)
    } else {
        zero
    };

    let level = vds.min(vgs);
    let w_che = if level > zero {
        let band = tol * vds.abs().max(vgs.abs());
        let excess = (vds - vgs).abs() - band;
        let plateau = if excess <= zero {
            one
        } else {
            (one - excess / band).max(zero)
        };
        plateau * onset(level, ramp)
    } else {
        zero
    };

    let w_she = clamp((vsb.abs() - ramp) / (cfg.vdd_nominal - ramp), zero, one);

    Ok(MechanismActivation {
        w_dahc,
        w_che,
        w_she,
    })
}

/// Dimensionless stress rate `S` of one transistor.
pub fn stress_factor<T: Real>(
    act: &MechanismActivation<T>,
    bias: &BiasCondition<T>,
    process: &ProcessProfile<T>,
    params: &TransistorParams<T>,
    cfg: &AgingModelConfig<T>,
) -> Result<T> {
    bias.validate()?;
    let mu = process.trap_multiplier()?;
    let severity = cfg.severity_dahc * act.w_dahc
        + cfg.severity_che * act.w_che
        + cfg.severity_she * act.w_she;
    let toggle = bias.toggle_rate * bias.duty / cfg.reference_frequency;
    let channel = match params.channel {
        Channel::Nmos => T::one(),
        Channel::Pmos => cfg.pmos_attenuation,
    };
    Ok(mu * cfg.temperature_acceleration(bias.temperature) * severity * toggle * channel)
}

/// `A·S·tⁿ` for constant stress from a pristine device.
pub fn closed_form_delta_vt<T: Real>(rate: T, t: T, cfg: &AgingModelConfig<T>) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(HciError::InvalidInput(format!(
            "elapsed time must be >= 0, got {t}"
        )));
    }
    if !(rate >= T::zero()) {
        return Err(HciError::InvalidInput(format!(
            "stress rate must be >= 0, got {rate}"
        )));
    }
    Ok(cfg.prefactor * rate * t.powf(cfg.exponent))
}

/// Stress time that would have produced `damage` at constant `rate` (`rate > 0`).
pub fn equivalent_time<T: Real>(damage: T, rate: T, cfg: &AgingModelConfig<T>) -> T {
    (damage / (cfg.prefactor * rate)).powf(T::one() / cfg.exponent)
}

/// Further stress time at `rate` until damage reaches `limit`; `None` when `rate` is zero.
pub fn time_to_damage<T: Real>(
    state: &TransistorState<T>,
    rate: T,
    limit: T,
    cfg: &AgingModelConfig<T>,
) -> Option<T> {
    if state.damage >= limit {
        return Some(T::zero());
    }
    if !(rate > T::zero()) {
        return None;
    }
    let remaining = equivalent_time(limit, rate, cfg) - equivalent_time(state.damage, rate, cfg);
    Some(remaining.max(T::zero()))
}

/// Advances a transistor by `dt` seconds of constant stress.
pub fn apply_stress<T: Real>(
    state: &TransistorState<T>,
    rate: T,
    dt: T,
    cfg: &AgingModelConfig<T>,
) -> Result<TransistorState<T>> {
    if !(dt >= T::zero()) {
        return Err(HciError::InvalidInput(format!(
            "interval must be >= 0, got {dt}"
        )));
    }
    if !(rate >= T::zero()) || !rate.is_finite() {
        return Err(HciError::InvalidInput(format!(
            "stress rate must be >= 0, got {rate}"
        )));
    }
    if dt == T::zero() {
        return Ok(*state);
    }
    let mut next = *state;
    next.age = state.age + dt;
    if rate == T::zero() {
        return Ok(next);
    }
    let t_eq = equivalent_time(state.damage, rate, cfg);
    let damage = cfg.prefactor * rate * (t_eq + dt).powf(cfg.exponent);
    let increment = (damage - state.damage).max(T::zero());
    next.damage = state.damage + increment;
    next.n_it = state.n_it + cfg.interface_fraction * increment / cfg.k_it;
    next.n_ot = state.n_ot + (T::one() - cfg.interface_fraction) * increment / cfg.k_ot;
    Ok(next)
}

/// Effective `(vt, gm)` of an aged transistor.
pub fn degraded_params<T: Real>(
    params: &TransistorParams<T>,
    state: &TransistorState<T>,
    cfg: &AgingModelConfig<T>,
) -> (T, T) {
    let shift = state.delta_vt(cfg);
    let g_degr = T::one() - (-shift / cfg.gm_scale).exp();
    (params.vt0 + shift, params.gm0 * (T::one() - g_degr))
}

/// Unbiased bake: oxide traps decay with `τ(temperature)`, interface traps stay.
pub fn bake_recover<T: Real>(
    state: &TransistorState<T>,
    temperature: T,
    duration: T,
    cfg: &AgingModelConfig<T>,
) -> Result<TransistorState<T>> {
    if !(duration >= T::zero()) {
        return Err(HciError::InvalidInput(format!(
            "bake duration must be >= 0, got {duration}"
        )));
    }
    if duration == T::zero() || state.n_ot == T::zero() {
        return Ok(*state);
    }
    let tau = cfg.bake_tau(temperature);
    let n_ot = state.n_ot * (-duration / tau).exp();
    Ok(TransistorState {
        n_it: state.n_it,
        n_ot,
        damage: cfg.k_it * state.n_it + cfg.k_ot * n_ot,
        age: state.age,
    })
}

/// Prefactor `A` that puts the failure threshold exactly at `target_lifetime`
/// under the nominal bias. The rest of `cfg` is used as given.
pub fn calibrate_prefactor<T: Real>(
    nominal: &BiasCondition<T>,
    process: &ProcessProfile<T>,
    params: &TransistorParams<T>,
    target_lifetime: T,
    cfg: &AgingModelConfig<T>,
) -> Result<T> {
    let act = classify_mechanisms(nominal, cfg.classify_tol, cfg)?;
    let rate = stress_factor(&act, nominal, process, params, cfg)?;
    prefactor_for_rate(rate, target_lifetime, cfg)
}

/// `A = threshold / (S·tⁿ)`.
pub fn prefactor_for_rate<T: Real>(
    rate: T,
    target_lifetime: T,
    cfg: &AgingModelConfig<T>,
) -> Result<T> {
    if !(target_lifetime > T::zero()) {
        return Err(HciError::InvalidInput(format!(
            "target lifetime must be > 0, got {target_lifetime}"
        )));
    }
    if !(rate > T::zero()) {
        return Err(HciError::CannotCalibrate);
    }
    Ok(cfg.vt_fail_threshold / (rate * target_lifetime.powf(cfg.exponent)))
}
