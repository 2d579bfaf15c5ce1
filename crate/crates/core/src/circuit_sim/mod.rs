//! Gate-level circuits, switching activity, delay and write-margin observables,
//! and lifetime simulation.

pub mod activity;
pub mod delay;
pub mod device;
pub mod lifetime;
pub mod netlist;
pub mod parse;

pub use activity::{
    propagate_activity, transistor_bias, ActivityProfile, NetActivity, OperatingPoint,
};
pub use delay::{
    alpha_power_delay, gate_delay, sram_write_check, DelayModelConfig, GateDelays, WriteCheck,
};
pub use device::{CircuitBundle, Device, FailureCause, Measurement, ModelConfig};
pub use lifetime::{
    simulate_lifetime, simulate_lifetime_observed, transistor_lifetimes, Failure, LifetimeResult,
    TraceSample,
};
pub use netlist::{BiasOverride, Gate, GateKind, Netlist, TransistorRole};
pub use parse::{parse_netlist, NetlistFile};
