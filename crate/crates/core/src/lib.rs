//! Hot-carrier-injection aging of gate-level circuits, HCI trojan injection,
//! and the detection techniques used to screen for it.
//!
//! The models are generic over the scalar ([`Real`], implemented for `f32` and
//! `f64`). The aliases at the crate root fix the scalar to `f64`; the `*32`
//! variants use `f32`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit_sim;
pub mod detection;
pub mod device_aging;
pub mod error;
pub mod harness;
pub mod scalar;
pub mod trojan;

pub use error::{HciError, Result};
pub use scalar::Real;

pub type Device = circuit_sim::Device<f64>;
pub type Device32 = circuit_sim::Device<f32>;
pub type Netlist = circuit_sim::Netlist<f64>;
pub type CircuitBundle = circuit_sim::CircuitBundle<f64>;
pub type ModelConfig = circuit_sim::ModelConfig<f64>;
pub type AgingModelConfig = device_aging::AgingModelConfig<f64>;
pub type AgingModelConfig32 = device_aging::AgingModelConfig<f32>;
pub type BiasCondition = device_aging::BiasCondition<f64>;
pub type ProcessProfile = device_aging::ProcessProfile<f64>;
pub type TransistorState = device_aging::TransistorState<f64>;
pub type TrojanScenario = trojan::TrojanScenario<f64>;
pub type DiagnosticProtocol = detection::DiagnosticProtocol<f64>;
pub type DiagnosticReport = detection::DiagnosticReport<f64>;
pub type ScenarioConfig = harness::ScenarioConfig<f64>;
pub type RunReport = harness::RunReport<f64>;
