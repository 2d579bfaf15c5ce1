use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::device_aging::{BiasCondition, Channel};
use crate::error::{HciError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Inv,
    Nand2,
    Nor2,
    Sram6t,
}

/// One transistor slot of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransistorRole {
    pub role: &'static str,
    pub channel: Channel,
    /// Index of the gate pin driving this transistor's gate terminal (logic gates).
    pub input_pin: Option<usize>,
    pub passthrough: bool,
}

const fn logic(role: &'static str, channel: Channel, pin: usize) -> TransistorRole {
    TransistorRole {
        role,
        channel,
        input_pin: Some(pin),
        passthrough: false,
    }
}

const fn cell(role: &'static str, channel: Channel, passthrough: bool) -> TransistorRole {
    TransistorRole {
        role,
        channel,
        input_pin: None,
        passthrough,
    }
}

const INV_ROLES: [TransistorRole; 2] =
    [logic("MN", Channel::Nmos, 0), logic("MP", Channel::Pmos, 0)];
const TWO_INPUT_ROLES: [TransistorRole; 4] = [
    logic("MNA", Channel::Nmos, 0),
    logic("MNB", Channel::Nmos, 1),
    logic("MPA", Channel::Pmos, 0),
    logic("MPB", Channel::Pmos, 1),
];
const SRAM_ROLES: [TransistorRole; 6] = [
    cell("PD_L", Channel::Nmos, false),
    cell("PD_R", Channel::Nmos, false),
    cell("PS_L", Channel::Nmos, true),
    cell("PS_R", Channel::Nmos, true),
    cell("PU_L", Channel::Pmos, false),
    cell("PU_R", Channel::Pmos, false),
];

impl GateKind {
    pub fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_uppercase().as_str() {
            "INV" => Some(GateKind::Inv),
            "NAND2" => Some(GateKind::Nand2),
            "NOR2" => Some(GateKind::Nor2),
            "SRAM6T" => Some(GateKind::Sram6t),
            _ => None,
        }
    }

    /// Number of net terminals: inputs then output for logic, `wl bl blb` for SRAM.
    pub fn pin_count(self) -> usize {
        match self {
            GateKind::Inv => 2,
            GateKind::Nand2 | GateKind::Nor2 | GateKind::Sram6t => 3,
        }
    }

    pub fn roles(self) -> &'static [TransistorRole] {
        match self {
            GateKind::Inv => &INV_ROLES,
            GateKind::Nand2 | GateKind::Nor2 => &TWO_INPUT_ROLES,
            GateKind::Sram6t => &SRAM_ROLES,
        }
    }

    pub fn is_logic(self) -> bool {
        self != GateKind::Sram6t
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::Inv => "INV",
            GateKind::Nand2 => "NAND2",
            GateKind::Nor2 => "NOR2",
            GateKind::Sram6t => "SRAM6T",
        };
        f.write_str(s)
    }
}

/// Partial bias replacement for one transistor. Set fields replace the
/// topology-derived default verbatim; unset fields keep it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct BiasOverride<T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vd: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vg: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vs: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vsub: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub toggle_rate: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duty: Option<T>,
}

impl<T: Real> BiasOverride<T> {
    pub fn voltages(vd: T, vg: T, vsub: T) -> Self {
        BiasOverride {
            vd: Some(vd),
            vg: Some(vg),
            vsub: Some(vsub),
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, base: &BiasCondition<T>) -> BiasCondition<T> {
        BiasCondition {
            vd: self.vd.unwrap_or(base.vd),
            vg: self.vg.unwrap_or(base.vg),
            vs: self.vs.unwrap_or(base.vs),
            vsub: self.vsub.unwrap_or(base.vsub),
            temperature: self.temperature.unwrap_or(base.temperature),
            toggle_rate: self.toggle_rate.unwrap_or(base.toggle_rate),
            duty: self.duty.unwrap_or(base.duty),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Gate<T> {
    pub name: String,
    pub kind: GateKind,
    pub pins: Vec<String>,
    /// Keyed by role (e.g. `PS_L`).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bias_overrides: BTreeMap<String, BiasOverride<T>>,
}

impl<T: Real> Gate<T> {
    pub fn new(name: impl Into<String>, kind: GateKind, pins: Vec<String>) -> Self {
        Gate {
            name: name.into(),
            kind,
            pins,
            bias_overrides: BTreeMap::new(),
        }
    }

    /// Nets read by the gate. For SRAM cells that is every terminal.
    pub fn inputs(&self) -> &[String] {
        if self.kind.is_logic() {
            &self.pins[..self.pins.len() - 1]
        } else {
            &self.pins
        }
    }

    pub fn output(&self) -> Option<&str> {
        if self.kind.is_logic() {
            self.pins.last().map(String::as_str)
        } else {
            None
        }
    }

    pub fn wordline(&self) -> Option<&str> {
        (self.kind == GateKind::Sram6t).then(|| self.pins[0].as_str())
    }

    pub fn role(&self, role: &str) -> Option<&'static TransistorRole> {
        self.kind.roles().iter().find(|r| r.role == role)
    }

    pub fn transistor_name(&self, role: &str) -> String {
        format!("{}.{}", self.name, role)
    }

    pub fn transistor_names(&self) -> impl Iterator<Item = String> + '_ {
        self.kind
            .roles()
            .iter()
            .map(|r| self.transistor_name(r.role))
    }

    /// Installs or replaces the override for one role.
    pub fn set_override(&mut self, role: &str, ov: BiasOverride<T>) -> Result<()> {
        if self.role(role).is_none() {
            return Err(HciError::UnknownTarget(self.transistor_name(role)));
        }
        self.bias_overrides.insert(role.to_string(), ov);
        Ok(())
    }
}

/// Gate-level circuit. Combinational logic must be acyclic; SRAM cells are sinks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetlist<T>", bound = "T: Real")]
pub struct Netlist<T> {
    gates: Vec<Gate<T>>,
    primary_inputs: Vec<String>,
    primary_outputs: Vec<String>,
    #[serde(skip)]
    order: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawNetlist<T> {
    gates: Vec<Gate<T>>,
    primary_inputs: Vec<String>,
    primary_outputs: Vec<String>,
}

impl<T: Real> TryFrom<RawNetlist<T>> for Netlist<T> {
    type Error = HciError;

    fn try_from(raw: RawNetlist<T>) -> Result<Self> {
        Netlist::new(raw.gates, raw.primary_inputs, raw.primary_outputs)
    }
}

impl<T: Real> Netlist<T> {
    pub fn new(
        gates: Vec<Gate<T>>,
        primary_inputs: Vec<String>,
        primary_outputs: Vec<String>,
    ) -> Result<Self> {
        let mut netlist = Netlist {
            gates,
            primary_inputs,
            primary_outputs,
            order: Vec::new(),
        };
        netlist.order = netlist.validate()?;
        Ok(netlist)
    }

    /// Checks structure and returns a topological gate order.
    fn validate(&self) -> Result<Vec<usize>> {
        let bad = |m: String| Err(HciError::InvalidNetlist(m));
        if self.gates.is_empty() {
            return bad("netlist has no gates".into());
        }
        let mut names = BTreeSet::new();
        let mut drivers: BTreeMap<&str, Option<usize>> = BTreeMap::new();
        for net in &self.primary_inputs {
            if drivers.insert(net.as_str(), None).is_some() {
                return bad(format!("primary input `{net}` declared twice"));
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            if g.name.is_empty() || g.name.contains('.') {
                return bad(format!("invalid gate name `{}`", g.name));
            }
            if !names.insert(g.name.as_str()) {
                return bad(format!("duplicate gate name `{}`", g.name));
            }
            if g.pins.len() != g.kind.pin_count() {
                return bad(format!(
                    "gate `{}` ({}) needs {} nets, got {}",
                    g.name,
                    g.kind,
                    g.kind.pin_count(),
                    g.pins.len()
                ));
            }
            for role in g.bias_overrides.keys() {
                if g.role(role).is_none() {
                    return Err(HciError::UnknownTarget(g.transistor_name(role)));
                }
            }
            if let Some(out) = g.output() {
                if drivers.insert(out, Some(i)).is_some() {
                    return bad(format!("net `{out}` has more than one driver"));
                }
            }
        }
        for g in &self.gates {
            for net in g.inputs() {
                if !drivers.contains_key(net.as_str()) {
                    return bad(format!("net `{net}` read by `{}` is never driven", g.name));
                }
            }
        }
        for net in &self.primary_outputs {
            if !drivers.contains_key(net.as_str()) {
                return bad(format!("primary output `{net}` is never driven"));
            }
        }

        // Kahn's algorithm over gate -> gate edges.
        let n = self.gates.len();
        let mut indegree = vec![0usize; n];
        let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, g) in self.gates.iter().enumerate() {
            for net in g.inputs() {
                if let Some(Some(src)) = drivers.get(net.as_str()) {
                    fanout[*src].push(i);
                    indegree[i] += 1;
                }
            }
        }
        let mut ready: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_front() {
            order.push(i);
            for &j in &fanout[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push_back(j);
                }
            }
        }
        if order.len() != n {
            let stuck: Vec<_> = (0..n)
                .filter(|&i| indegree[i] > 0)
                .map(|i| self.gates[i].name.as_str())
                .collect();
            return bad(format!("combinational loop through {}", stuck.join(", ")));
        }
        Ok(order)
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn primary_inputs(&self) -> &[String] {
        &self.primary_inputs
    }

    pub fn primary_outputs(&self) -> &[String] {
        &self.primary_outputs
    }

    /// Gates in dependency order.
    pub fn topological(&self) -> impl Iterator<Item = &Gate<T>> {
        self.order.iter().map(move |&i| &self.gates[i])
    }

    pub fn gate(&self, name: &str) -> Option<&Gate<T>> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn gate_mut(&mut self, name: &str) -> Option<&mut Gate<T>> {
        self.gates.iter_mut().find(|g| g.name == name)
    }

    pub fn nets(&self) -> BTreeSet<&str> {
        let mut nets: BTreeSet<&str> = self.primary_inputs.iter().map(String::as_str).collect();
        for g in &self.gates {
            nets.extend(g.pins.iter().map(String::as_str));
        }
        nets
    }

    pub fn transistor_count(&self) -> usize {
        self.gates.iter().map(|g| g.kind.roles().len()).sum()
    }

    /// Splits `gate.role` and checks both parts exist.
    pub fn resolve_transistor(&self, name: &str) -> Result<(&Gate<T>, &'static TransistorRole)> {
        let (gate, role) = name
            .split_once('.')
            .ok_or_else(|| HciError::UnknownTarget(name.to_string()))?;
        let g = self
            .gate(gate)
            .ok_or_else(|| HciError::UnknownTarget(name.to_string()))?;
        let r = g
            .role(role)
            .ok_or_else(|| HciError::UnknownTarget(name.to_string()))?;
        Ok((g, r))
    }

    /// Expands a transistor selector: `gate.ROLE`, `gate.*`, `*.ROLE` or `*`.
    pub fn select_transistors(&self, selector: &str) -> Result<Vec<String>> {
        let (gate_pat, role_pat) = selector.split_once('.').unwrap_or((selector, "*"));
        let mut hits = Vec::new();
        for g in &self.gates {
            if gate_pat != "*" && gate_pat != g.name {
                continue;
            }
            for r in g.kind.roles() {
                if role_pat == "*" || role_pat == r.role {
                    hits.push(g.transistor_name(r.role));
                }
            }
        }
        if hits.is_empty() {
            return Err(HciError::UnknownTarget(selector.to_string()));
        }
        Ok(hits)
    }

    pub fn set_override(&mut self, transistor: &str, ov: BiasOverride<T>) -> Result<()> {
        let (gate, role) = transistor
            .split_once('.')
            .ok_or_else(|| HciError::UnknownTarget(transistor.to_string()))?;
        self.gate_mut(gate)
            .ok_or_else(|| HciError::UnknownTarget(transistor.to_string()))?
            .set_override(role, ov)
    }

    /// Hash of gates and connectivity only; bias overrides are excluded.
    pub fn structural_digest(&self) -> String {
        let mut h = Sha256::new();
        for net in &self.primary_inputs {
            h.update(b"in\0");
            h.update(net.as_bytes());
            h.update(b"\n");
        }
        for net in &self.primary_outputs {
            h.update(b"out\0");
            h.update(net.as_bytes());
            h.update(b"\n");
        }
        for g in &self.gates {
            h.update(b"gate\0");
            h.update(g.name.as_bytes());
            h.update(b"\0");
            h.update(g.kind.to_string().as_bytes());
            for p in &g.pins {
                h.update(b"\0");
                h.update(p.as_bytes());
            }
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}
