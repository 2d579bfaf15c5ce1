//! Detection techniques: delay canary, ring oscillator, guard band and the
//! thermal-cycle diagnostic.

pub mod diagnostic;
pub mod monitors;

use serde::{Deserialize, Serialize};

pub use diagnostic::{
    run_thermal_cycle_diagnostic, DiagnosticProtocol, DiagnosticReport, Step, StepSnapshot,
    Verdict, DIAGNOSTIC_SCHEMA_VERSION,
};
pub use monitors::{
    canary_check, guard_band_check, ring_osc_frequency, CanaryConfig, CanaryOutcome, GuardBand,
    HealthyAgingCurve, IndicatorModel, MeasuredIndicators,
};

use crate::error::{HciError, Result};
use crate::scalar::{lit, Real};

/// Detection settings of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct DetectionConfig<T> {
    pub canary_margin: T,
    pub guard_band: T,
    /// Relative indicator difference above which two runs have diverged.
    pub divergence_tol: T,
    /// Run the thermal-cycle diagnostic on each pristine device.
    pub diagnostic: bool,
    pub protocol: DiagnosticProtocol<T>,
}

impl<T: Real> Default for DetectionConfig<T> {
    fn default() -> Self {
        DetectionConfig {
            canary_margin: lit(0.2),
            guard_band: lit(0.1),
            divergence_tol: lit(1e-9),
            diagnostic: true,
            protocol: DiagnosticProtocol::default(),
        }
    }
}

impl<T: Real> DetectionConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.canary_margin > T::zero())
            || !(self.guard_band > T::zero())
            || !(self.divergence_tol >= T::zero())
        {
            return Err(HciError::InvalidInput(
                "detection: canary_margin and guard_band must be > 0, divergence_tol >= 0".into(),
            ));
        }
        self.protocol.validate()
    }
}
