#![allow(dead_code)]

use std::path::PathBuf;

use hci_core::circuit_sim::{parse_netlist, CircuitBundle, Device, ModelConfig};
use hci_core::device_aging::ProcessProfile;

pub const YEAR: f64 = 365.25 * 86400.0;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn corpus_scenarios() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

pub fn bundle(text: &str) -> CircuitBundle<f64> {
    let f = parse_netlist(text, "test").unwrap();
    CircuitBundle {
        netlist: f.netlist,
        stimulus: f.activity,
        process: ProcessProfile::default(),
    }
}

pub fn device(text: &str) -> Device<f64> {
    Device::new(bundle(text), ModelConfig::default()).unwrap()
}

pub fn inverter_chain(n: usize, rate: f64) -> String {
    let mut text = format!("input n0 rate={rate}\n");
    for i in 0..n {
        text.push_str(&format!("gate g{i} INV n{i} n{}\n", i + 1));
    }
    text.push_str(&format!("output n{n}\n"));
    text
}

pub fn sram_cell(write_freq: f64) -> String {
    format!(
        "input wl rate=0\ninput bl rate=0\ninput blb rate=0\n\
         gate c0 SRAM6T wl bl blb\nwrite c0 freq={write_freq}\n"
    )
}
