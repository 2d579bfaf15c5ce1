use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit_sim::{
    parse_netlist, CircuitBundle, DelayModelConfig, ModelConfig, NetActivity, NetlistFile,
    OperatingPoint,
};
use crate::detection::{DetectionConfig, IndicatorModel};
use crate::device_aging::{AgingModelConfig, ProcessProfile};
use crate::error::{HciError, Result};
use crate::scalar::{as_f64, lit, Real};
use crate::trojan::{compose_scenario, TrojanScenario, TrojanVector};

const YEAR: f64 = 365.25 * 86400.0;
const MAX_SAMPLES: f64 = 1e6;

/// Stimulus entries that replace or extend the ones declared in the netlist file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct ActivityOverrides<T> {
    pub inputs: BTreeMap<String, NetActivity<T>>,
    pub writes: BTreeMap<String, T>,
}

impl<T> Default for ActivityOverrides<T> {
    fn default() -> Self {
        ActivityOverrides {
            inputs: BTreeMap::new(),
            writes: BTreeMap::new(),
        }
    }
}

/// Rescales the aging prefactor so the most stressed baseline transistor
/// fails exactly at `target_lifetime` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration<T> {
    pub target_lifetime: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct Expectations<T> {
    /// The canary must stay quiet on the infected device before this age (s).
    pub canary_quiet_until: Option<T>,
}

/// One simulation scenario, as read from its TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct ScenarioConfig<T> {
    pub name: String,
    /// Netlist file, relative to the scenario file.
    pub netlist: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Simulated operating life (s).
    #[serde(default = "default_horizon")]
    pub horizon: T,
    /// Trace sampling interval (s).
    #[serde(default = "default_epoch")]
    pub epoch: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Standard deviation of per-transistor threshold jitter (V), drawn from `seed`.
    #[serde(default)]
    pub vt0_jitter: T,
    #[serde(default)]
    pub operating: OperatingPoint<T>,
    #[serde(default)]
    pub process: ProcessProfile<T>,
    #[serde(default)]
    pub aging: AgingModelConfig<T>,
    #[serde(default)]
    pub delay: DelayModelConfig<T>,
    #[serde(default)]
    pub indicators: IndicatorModel<T>,
    #[serde(default)]
    pub detection: DetectionConfig<T>,
    #[serde(default)]
    pub activity: ActivityOverrides<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration<T>>,
    #[serde(default, rename = "trojan", skip_serializing_if = "Vec::is_empty")]
    pub trojans: Vec<TrojanVector<T>>,
    #[serde(default)]
    pub expect: Expectations<T>,
    /// Netlist text, read at load time.
    #[serde(skip)]
    pub netlist_source: String,
}

/// Largest seed a scenario file can hold.
pub const MAX_SEED: u64 = i64::MAX as u64;

fn default_horizon<T: Real>() -> T {
    lit(40.0 * YEAR)
}

fn default_epoch<T: Real>() -> T {
    lit(1e6)
}

fn field(field: &str, message: impl Into<String>) -> HciError {
    HciError::ScenarioField {
        field: field.into(),
        message: message.into(),
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Reads, parses and validates a scenario file and the netlist it names.
pub fn load_scenario<T: Real>(path: &Path) -> Result<ScenarioConfig<T>> {
    let text = fs::read_to_string(path).map_err(|e| HciError::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    ScenarioConfig::from_toml_str(&text, base, &path.display().to_string())
}

impl<T: Real> ScenarioConfig<T> {
    /// Parses scenario text; the netlist path is resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path, origin: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(HciError::Parse {
                origin: origin.into(),
                line: 1,
                column: 1,
                message: "empty scenario file".into(),
            });
        }
        let mut cfg: ScenarioConfig<T> = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
            HciError::Parse {
                origin: origin.into(),
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        let netlist_path = base_dir.join(&cfg.netlist);
        cfg.netlist_source = fs::read_to_string(&netlist_path).map_err(|e| {
            field(
                "netlist",
                format!("cannot read {}: {e}", netlist_path.display()),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HciError::Encoding(e.to_string()))
    }

    pub fn model(&self) -> ModelConfig<T> {
        ModelConfig {
            aging: self.aging,
            delay: self.delay,
            indicators: self.indicators,
            operating: self.operating,
        }
    }

    pub fn trojan_scenario(&self) -> TrojanScenario<T> {
        TrojanScenario {
            trojans: self.trojans.clone(),
        }
    }

    pub fn parse_netlist(&self) -> Result<NetlistFile<T>> {
        parse_netlist(&self.netlist_source, &self.netlist.display().to_string())
    }

    /// Netlist, stimulus (with overrides applied) and process of the benign device.
    pub fn baseline_bundle(&self) -> Result<CircuitBundle<T>> {
        let mut file = self.parse_netlist()?;
        for (net, a) in &self.activity.inputs {
            if !file.netlist.primary_inputs().contains(net) {
                return Err(field(
                    &format!("activity.inputs.{net}"),
                    "not a primary input of the netlist",
                ));
            }
            file.activity.nets.insert(net.clone(), *a);
        }
        for (cell, f) in &self.activity.writes {
            match file.netlist.gate(cell) {
                Some(g) if !g.kind.is_logic() => {
                    file.activity.writes.insert(cell.clone(), *f);
                }
                _ => {
                    return Err(field(
                        &format!("activity.writes.{cell}"),
                        "not an SRAM cell of the netlist",
                    ));
                }
            }
        }
        Ok(CircuitBundle {
            netlist: file.netlist,
            stimulus: file.activity,
            process: self.process,
        })
    }

    /// SHA-256 over the canonical config text and the netlist text.
    pub fn digest(&self) -> Result<String> {
        let mut h = Sha256::new();
        h.update(self.to_toml_string()?.as_bytes());
        h.update([0u8]);
        h.update(self.netlist_source.as_bytes());
        Ok(hex::encode(h.finalize()))
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |name: &str, r: Result<()>| r.map_err(|e| field(name, e.to_string()));
        if self.name.trim().is_empty() {
            return Err(field("name", "must not be empty"));
        }
        if self.seed > MAX_SEED {
            return Err(field(
                "seed",
                format!("must be <= {MAX_SEED} (TOML integers are signed)"),
            ));
        }
        if !(self.epoch > T::zero()) || !self.epoch.is_finite() {
            return Err(field("epoch", "must be finite and > 0"));
        }
        if !(self.horizon >= self.epoch) || !self.horizon.is_finite() {
            return Err(field("horizon", "must be finite and >= epoch"));
        }
        if as_f64(self.horizon / self.epoch) > MAX_SAMPLES {
            return Err(field(
                "epoch",
                format!("horizon/epoch exceeds {MAX_SAMPLES:e} samples"),
            ));
        }
        if !(self.vt0_jitter >= T::zero()) || !self.vt0_jitter.is_finite() {
            return Err(field("vt0_jitter", "must be finite and >= 0"));
        }
        if !(self.operating.vdd > T::zero()) || !self.operating.temperature.is_finite() {
            return Err(field("operating", "vdd must be > 0 and temperature finite"));
        }
        wrap("process", self.process.validate())?;
        wrap("aging", self.aging.validate())?;
        wrap("delay", self.delay.validate())?;
        wrap("indicators", self.indicators.validate())?;
        wrap("detection", self.detection.validate())?;
        if let Some(c) = self.calibration {
            if !(c.target_lifetime > T::zero()) || !c.target_lifetime.is_finite() {
                return Err(field(
                    "calibration.target_lifetime",
                    "must be finite and > 0",
                ));
            }
        }
        if let Some(t) = self.expect.canary_quiet_until {
            if !(t >= T::zero()) {
                return Err(field("expect.canary_quiet_until", "must be >= 0"));
            }
        }
        let bundle = self.baseline_bundle()?;
        crate::circuit_sim::propagate_activity(&bundle.netlist, &bundle.stimulus)?;
        compose_scenario(&bundle, &self.trojan_scenario()).map_err(|e| match e {
            HciError::UnknownTarget(_) | HciError::InvalidInput(_) => {
                field("trojan", e.to_string())
            }
            other => other,
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NET: &str = "input a rate=1e6\ngate g0 INV a n1\ngate g1 INV n1 y\noutput y\n";

    fn dir() -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        fs::write(d.path().join("c.net"), NET).unwrap();
        d
    }

    fn load(d: &tempfile::TempDir, text: &str) -> Result<ScenarioConfig<f64>> {
        let p = d.path().join("s.toml");
        fs::write(&p, text).unwrap();
        load_scenario(&p)
    }

    #[test]
    fn defaults_are_filled() {
        let d = dir();
        let c = load(&d, "name = \"x\"\nnetlist = \"c.net\"\n").unwrap();
        assert_eq!(c.detection.canary_margin, 0.2);
        assert_eq!(c.seed, 0);
        assert_eq!(c.netlist_source, NET);
        assert!(c.trojans.is_empty());
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        let d = dir();
        assert!(matches!(load(&d, ""), Err(HciError::Parse { line: 1, .. })));
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let d = dir();
        let err = load(
            &d,
            "name = \"x\"\nnetlist = \"c.net\"\n[aging]\nprefactr = 1.0\n",
        )
        .unwrap_err();
        match err {
            HciError::Parse { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("prefactr"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let d = dir();
        let err = load(&d, "name = \"x\"\nnetlist = \"c.net\"\nepoch = -1.0\n").unwrap_err();
        assert!(matches!(err, HciError::ScenarioField { ref field, .. } if field == "epoch"));
        let err = load(&d, "name = \"x\"\nnetlist = \"missing.net\"\n").unwrap_err();
        assert!(matches!(err, HciError::ScenarioField { ref field, .. } if field == "netlist"));
        let err = load(
            &d,
            "name = \"x\"\nnetlist = \"c.net\"\n[[trojan]]\nkind = \"bias\"\ntargets = [\"g7.MN\"]\nbias = { vg = 0.6 }\n",
        )
        .unwrap_err();
        assert!(matches!(err, HciError::ScenarioField { ref field, .. } if field == "trojan"));
        assert!(err.is_validation());
    }

    #[test]
    fn round_trips_through_toml() {
        let d = dir();
        let text = "name = \"x\"\nnetlist = \"c.net\"\nseed = 3\n\
            [calibration]\ntarget_lifetime = 4.7e8\n\
            [[trojan]]\nkind = \"bias\"\ntargets = [\"g1.MN\"]\nbias = { vd = 1.2, vg = 0.6, vsub = 0.0 }\n\
            [[trojan]]\nkind = \"process\"\ndelta_c = -0.2\n";
        let c = load(&d, text).unwrap();
        assert_eq!(c.trojans.len(), 2);
        let again =
            ScenarioConfig::<f64>::from_toml_str(&c.to_toml_string().unwrap(), d.path(), "again")
                .unwrap();
        assert_eq!(again, c);
        assert_eq!(again.digest().unwrap(), c.digest().unwrap());
        let reseeded = ScenarioConfig {
            seed: 4,
            ..c.clone()
        };
        assert_ne!(reseeded.digest().unwrap(), c.digest().unwrap());
    }

    #[test]
    fn line_column_counts_from_one() {
        assert_eq!(line_column("ab\ncd", 0), (1, 1));
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
    }
}
