use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit_sim::netlist::{Gate, GateKind};
use crate::device_aging::{degraded_params, AgingModelConfig, TransistorParams, TransistorState};
use crate::error::{HciError, Result};
use crate::scalar::{as_f64, lit, Real};

/// Fresh-device delay (s) of each gate kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct GateDelays<T> {
    pub inv: T,
    pub nand2: T,
    pub nor2: T,
    /// Write/access time through a passthrough device.
    pub sram6t: T,
}

impl<T: Real> Default for GateDelays<T> {
    fn default() -> Self {
        GateDelays {
            inv: lit(20e-12),
            nand2: lit(28e-12),
            nor2: lit(32e-12),
            sram6t: lit(150e-12),
        }
    }
}

impl<T: Real> GateDelays<T> {
    pub fn of(&self, kind: GateKind) -> T {
        match kind {
            GateKind::Inv => self.inv,
            GateKind::Nand2 => self.nand2,
            GateKind::Nor2 => self.nor2,
            GateKind::Sram6t => self.sram6t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct DelayModelConfig<T> {
    /// Velocity-saturation exponent of the alpha-power law.
    pub alpha: T,
    pub d0: GateDelays<T>,
    pub vdd_nominal: T,
    /// Minimum passthrough overdrive `vdd − vt` for a successful write.
    pub write_margin: T,
    pub nmos_vt0: T,
    pub pmos_vt0: T,
    pub gm0: T,
}

impl<T: Real> Default for DelayModelConfig<T> {
    fn default() -> Self {
        DelayModelConfig {
            alpha: lit(1.3),
            d0: GateDelays::default(),
            vdd_nominal: lit(1.2),
            write_margin: lit(0.2),
            nmos_vt0: lit(0.4),
            pmos_vt0: lit(0.4),
            gm0: lit(1e-4),
        }
    }
}

impl<T: Real> DelayModelConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        let d = &self.d0;
        let ok = self.alpha > z
            && d.inv > z
            && d.nand2 > z
            && d.nor2 > z
            && d.sram6t > z
            && self.write_margin > z
            && self.write_margin < self.vdd_nominal
            && self.nmos_vt0 > z
            && self.pmos_vt0 > z
            && self.nmos_vt0 < self.vdd_nominal
            && self.pmos_vt0 < self.vdd_nominal
            && self.gm0 > z;
        if ok {
            Ok(())
        } else {
            Err(HciError::InvalidInput(
                "delay config: need alpha, d0, gm0, vt0 > 0, vt0 < vdd and 0 < write_margin < vdd"
                    .into(),
            ))
        }
    }
}

/// `d0·((vdd − vt0)/(vdd − vt))^alpha`.
pub fn alpha_power_delay<T: Real>(d0: T, vdd: T, vt0: T, vt: T, alpha: T) -> Option<T> {
    if vt >= vdd || vt0 >= vdd {
        return None;
    }
    Some(d0 * ((vdd - vt0) / (vdd - vt)).powf(alpha))
}

/// Switching delay of one transistor's stage after aging.
pub fn gate_delay<T: Real>(
    kind: GateKind,
    params: &TransistorParams<T>,
    state: &TransistorState<T>,
    vdd: T,
    cfg: &DelayModelConfig<T>,
    aging: &AgingModelConfig<T>,
) -> Result<T> {
    let (vt, _) = degraded_params(params, state, aging);
    alpha_power_delay(cfg.d0.of(kind), vdd, params.vt0, vt, cfg.alpha).ok_or_else(|| {
        HciError::Nonfunctional {
            transistor: params.name.clone(),
            vt: as_f64(vt),
            vdd: as_f64(vdd),
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", content = "transistor", rename_all = "snake_case")]
pub enum WriteCheck {
    Pass,
    Fail(String),
}

impl WriteCheck {
    pub fn passed(&self) -> bool {
        matches!(self, WriteCheck::Pass)
    }
}

/// Static write check: both passthrough devices need `vdd − vt ≥ write_margin`.
///
/// Maps are keyed by full transistor name (`cell.ROLE`); a missing state counts
/// as pristine.
pub fn sram_write_check<T: Real>(
    cell: &Gate<T>,
    params: &BTreeMap<String, TransistorParams<T>>,
    states: &BTreeMap<String, TransistorState<T>>,
    vdd: T,
    cfg: &DelayModelConfig<T>,
    aging: &AgingModelConfig<T>,
) -> Result<WriteCheck> {
    if cell.kind != GateKind::Sram6t {
        return Err(HciError::InvalidInput(format!(
            "`{}` is not an SRAM6T cell",
            cell.name
        )));
    }
    let pristine = TransistorState::pristine();
    for role in cell.kind.roles().iter().filter(|r| r.passthrough) {
        let name = cell.transistor_name(role.role);
        let p = params
            .get(&name)
            .ok_or_else(|| HciError::UnknownTarget(name.clone()))?;
        let s = states.get(&name).unwrap_or(&pristine);
        let (vt, _) = degraded_params(p, s, aging);
        // Inclusive boundary: vt == vdd − margin still writes.
        if vt > vdd - cfg.write_margin {
            return Ok(WriteCheck::Fail(name));
        }
    }
    Ok(WriteCheck::Pass)
}
