//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use hci_core::circuit_sim::{
    parse_netlist, simulate_lifetime, BiasOverride, CircuitBundle, Device, ModelConfig,
};
use hci_core::detection::{run_thermal_cycle_diagnostic, DiagnosticProtocol, Verdict};
use hci_core::device_aging::{
    apply_stress, calibrate_prefactor, classify_mechanisms, closed_form_delta_vt,
    prefactor_for_rate, stress_factor, AgingModelConfig, BiasCondition, Channel,
    MechanismActivation, ProcessProfile, TransistorParams, TransistorState,
};
use hci_core::harness::{
    emit_report, load_scenario, run_scenario, ReportFormat, RunReport, ScenarioConfig,
};
use hci_core::trojan::{
    apply_process_trojan, compose_scenario, BiasAlteration, ProcessNitrateDistortion,
    TrojanScenario, TrojanVector, WorkloadAmplification,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / a.abs().max(b.abs())).abs()
    }
}

fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn scenario(name: &str) -> ScenarioConfig<f64> {
    load_scenario(&corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn nmos() -> TransistorParams<f64> {
    TransistorParams::new("m", Channel::Nmos, 0.4, 1e-4).unwrap()
}

fn dominant(w: &MechanismActivation<f64>) -> &'static str {
    let all = [("dahc", w.w_dahc), ("che", w.w_che), ("she", w.w_she)];
    if all.iter().all(|(_, v)| *v == 0.0) {
        return "none";
    }
    all.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0
}

fn c1_classification() -> Outcome {
    let c = AgingModelConfig::<f64>::default();
    let tol = c.classify_tol;
    let cases = [
        ("vd = 2vg", BiasCondition::new(1.2, 0.6, 0.0, 0.0), "dahc"),
        ("vd = vg", BiasCondition::new(1.2, 1.2, 0.0, 0.0), "che"),
        (
            "|vsub| >> 0",
            BiasCondition::new(0.0, 0.0, 0.0, -1.2),
            "she",
        ),
        ("zero bias", BiasCondition::new(0.0, 0.0, 0.0, 0.0), "none"),
    ];
    for (label, bias, want) in cases {
        let w = classify_mechanisms(&bias, tol, &c).map_err(|e| e.to_string())?;
        ensure!(dominant(&w) == want, "{label}: expected {want}, got {w:?}");
    }
    let peak = classify_mechanisms(&cases[0].1, tol, &c).unwrap();
    ensure!(
        peak.w_dahc == 1.0,
        "drain-avalanche weight at vd = 2vg is {}",
        peak.w_dahc
    );
    for r in [1.0, 1.5, 1.9, 1.99, 2.01, 2.1, 2.5, 3.0] {
        let w = classify_mechanisms(&BiasCondition::new(0.6 * r, 0.6, 0.0, 0.0), tol, &c).unwrap();
        ensure!(w.w_dahc < peak.w_dahc, "ratio {r} exceeds the peak");
    }
    let che = classify_mechanisms(&cases[1].1, tol, &c).unwrap();
    ensure!(che.w_che == 1.0 && che.w_she == 0.0, "{che:?}");
    let she = classify_mechanisms(&cases[2].1, tol, &c).unwrap();
    ensure!(
        she.w_she == 1.0 && she.w_dahc == 0.0 && she.w_che == 0.0,
        "{she:?}"
    );
    let none = classify_mechanisms(&cases[3].1, tol, &c).unwrap();
    ensure!(none.is_inactive(), "{none:?}");
    Ok("4 bias cases".into())
}

fn c2_oracle_equivalence() -> Outcome {
    let base = AgingModelConfig::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_closed = 0.0f64;
    let mut worst_split = 0.0f64;
    let n = 1200;
    for _ in 0..n {
        let c = AgingModelConfig {
            prefactor: 10f64.powf(rng.gen_range(-8.0..-4.0)),
            exponent: rng.gen_range(0.2..0.8),
            ..base
        };
        let rate = 10f64.powf(rng.gen_range(-3.0..3.0));
        let steps = rng.gen_range(1..60);
        let mut s = TransistorState::pristine();
        let mut t = 0.0;
        for _ in 0..steps {
            let dt = 10f64.powf(rng.gen_range(2.0..8.0));
            s = apply_stress(&s, rate, dt, &c).map_err(|e| e.to_string())?;
            t += dt;
        }
        let closed = closed_form_delta_vt(rate, t, &c).map_err(|e| e.to_string())?;
        worst_closed = worst_closed.max(rel(s.damage, closed));

        let t1 = 10f64.powf(rng.gen_range(2.0..9.0));
        let t2 = 10f64.powf(rng.gen_range(2.0..9.0));
        let split = apply_stress(&apply_stress(&s, rate, t1, &c).unwrap(), rate, t2, &c).unwrap();
        let whole = apply_stress(&s, rate, t1 + t2, &c).unwrap();
        worst_split = worst_split
            .max(rel(split.damage, whole.damage))
            .max(rel(split.n_it, whole.n_it))
            .max(rel(split.n_ot, whole.n_ot));
    }
    ensure!(
        worst_closed < 1e-6,
        "stepped vs closed form: {worst_closed:e}"
    );
    ensure!(worst_split < 1e-9, "interval splitting: {worst_split:e}");
    Ok(format!(
        "{n} cases, closed-form err {worst_closed:.1e}, split err {worst_split:.1e}"
    ))
}

fn c3_calibration() -> Outcome {
    let target = 15.0 * YEAR;
    // direct: a single inverter calibrated on its NMOS bias
    let mut d = device("input a rate=1e6\ngate g0 INV a y\noutput y\n");
    let bias = d.biases(&d.model.operating).map_err(|e| e.to_string())?["g0.MN"];
    d.model.aging.prefactor =
        calibrate_prefactor(&bias, &d.bundle.process, &nmos(), target, &d.model.aging)
            .map_err(|e| e.to_string())?;
    let t = simulate_lifetime(&d, 40.0 * YEAR, YEAR / 12.0)
        .map_err(|e| e.to_string())?
        .first_failure
        .ok_or("inverter never failed")?
        .time;
    ensure!(t > 10.0 * YEAR, "inverter fails at {:.3} y", t / YEAR);
    ensure!(rel(t, target) < 1e-3, "inverter fails at {:.4} y", t / YEAR);
    let mut detail = format!("inverter {:.4} y", t / YEAR);

    for name in ["chain5_benign.toml", "sram_benign.toml"] {
        let cfg = scenario(name);
        let want = cfg
            .calibration
            .ok_or("benign scenario without calibration")?
            .target_lifetime;
        ensure!(rel(want, target) < 1e-3, "{name} targets {} s", want);
        let r = run_scenario(&cfg).map_err(|e| e.to_string())?;
        let t = r
            .baseline
            .failure_time()
            .ok_or(format!("{name}: never failed"))?;
        ensure!(t > 10.0 * YEAR, "{name}: fails at {:.3} y", t / YEAR);
        ensure!(rel(t, want) < 1e-3, "{name}: fails at {:.4} y", t / YEAR);
        detail += &format!(", {} {:.4} y", cfg.name, t / YEAR);
    }
    Ok(detail)
}

fn lifetime_of(r: &RunReport<f64>, transistor: &str) -> Result<(f64, f64), String> {
    let get = |o: &hci_core::harness::RunOutcome<f64>| -> Result<f64, String> {
        o.transistor_lifetimes
            .get(transistor)
            .copied()
            .flatten()
            .ok_or_else(|| format!("{}: no lifetime for {transistor}", r.scenario))
    };
    Ok((
        get(&r.baseline)?,
        get(r.infected.as_ref().ok_or("no infected run")?)?,
    ))
}

fn c4_trojan_acceleration() -> Outcome {
    let target = "g3.MN";
    let run = |n: &str| run_scenario(&scenario(n)).map_err(|e| e.to_string());
    let (base, dahc) = lifetime_of(&run("chain5_dahc.toml")?, target)?;
    let (_, nitrate) = lifetime_of(&run("chain5_nitrate.toml")?, target)?;
    let (_, both) = lifetime_of(&run("chain5_combined.toml")?, target)?;
    ensure!(dahc < base, "bias trojan: {dahc} >= {base}");
    ensure!(nitrate < base, "nitrate trojan: {nitrate} >= {base}");
    ensure!(
        both <= dahc.min(nitrate),
        "combined {both} vs {dahc}, {nitrate}"
    );

    // every transistor of the chain as target
    let mut cfg = scenario("chain5_benign.toml");
    cfg.detection.diagnostic = false;
    let transistors: Vec<String> = cfg
        .parse_netlist()
        .unwrap()
        .netlist
        .gates()
        .iter()
        .flat_map(|g| g.transistor_names().collect::<Vec<_>>())
        .collect();
    let process = TrojanVector::Process(ProcessNitrateDistortion {
        delta_c: -0.3,
        anneal_delta: 0.0,
    });
    for t in &transistors {
        let bias = TrojanVector::Bias(BiasAlteration {
            targets: vec![t.clone()],
            bias: BiasOverride::voltages(1.2, 0.6, 0.0),
        });
        let mut lifetimes = Vec::new();
        for trojans in [
            vec![bias.clone()],
            vec![process.clone()],
            vec![process.clone(), bias.clone()],
        ] {
            cfg.trojans = trojans;
            let r = run_scenario(&cfg).map_err(|e| e.to_string())?;
            lifetimes.push(lifetime_of(&r, t)?);
        }
        let b = lifetimes[0].0;
        let (x, y, z) = (lifetimes[0].1, lifetimes[1].1, lifetimes[2].1);
        ensure!(
            x < b && y < b && z <= x.min(y),
            "{t}: base {b}, bias {x}, nitrate {y}, both {z}"
        );
    }
    Ok(format!(
        "{target}: {:.2} y -> bias {:.2} y, nitrate {:.2} y, both {:.2} y; {} targets swept",
        base / YEAR,
        dahc / YEAR,
        nitrate / YEAR,
        both / YEAR,
        transistors.len()
    ))
}

fn cell_ttf(o: &hci_core::harness::RunOutcome<f64>, cell: &str) -> Option<f64> {
    o.transistor_lifetimes
        .iter()
        .filter(|(n, _)| n.starts_with(&format!("{cell}.")))
        .filter_map(|(_, t)| *t)
        .reduce(f64::min)
}

fn c5_sram() -> Outcome {
    let r = run_scenario(&scenario("sram_workload.toml")).map_err(|e| e.to_string())?;
    let inf = r.infected.as_ref().ok_or("no infected run")?;
    let first = inf
        .lifetime
        .first_failure
        .as_ref()
        .ok_or("infected cell never failed")?;
    let who = first.transistor.clone().unwrap_or_default();
    ensure!(who == "c0.PS_L", "first failure is {who}");
    let mine = inf.transistor_lifetimes["c0.PS_L"].ok_or("c0.PS_L never fails")?;
    for (n, t) in inf
        .transistor_lifetimes
        .iter()
        .filter(|(n, _)| n.starts_with("c0."))
    {
        if n != "c0.PS_L" {
            ensure!(t.is_none_or(|t| t > mine), "{n} fails before c0.PS_L");
        }
    }

    let mut cfg = scenario("sram_workload.toml");
    cfg.detection.diagnostic = false;
    let mut prev = f64::INFINITY;
    let mut ttfs = Vec::new();
    for factor in [1.0, 2.0, 4.0, 8.0] {
        cfg.trojans = vec![TrojanVector::Workload(WorkloadAmplification {
            targets: vec!["c0".into()],
            factor,
        })];
        let r = run_scenario(&cfg).map_err(|e| e.to_string())?;
        let t = cell_ttf(r.infected.as_ref().unwrap(), "c0").ok_or("cell never fails")?;
        ensure!(t < prev, "factor {factor}: {t} not below {prev}");
        prev = t;
        ttfs.push(format!("{:.2}", t / YEAR));
    }
    Ok(format!(
        "{who} fails first at {:.2} y; cell TTF over 1,2,4,8x: {} y",
        first.time / YEAR,
        ttfs.join(", ")
    ))
}

fn random_device(rng: &mut ChaCha8Rng) -> Device<f64> {
    let n = rng.gen_range(1..8);
    let mut text = format!(
        "input n0 rate={}\ninput b rate={} duty={}\n",
        rng.gen_range(1e5..5e6),
        rng.gen_range(1e5..5e6),
        rng.gen_range(0.2..0.8)
    );
    for i in 0..n {
        let kind = ["INV", "NAND2", "NOR2"][rng.gen_range(0..3)];
        let side = if kind == "INV" { "" } else { " b" };
        text.push_str(&format!("gate g{i} {kind} n{i}{side} n{}\n", i + 1));
    }
    text.push_str(&format!("output n{n}\n"));
    if rng.gen_bool(0.5) {
        text.push_str(&format!(
            "input bl rate=0\ninput blb rate=0\ngate c0 SRAM6T n{n} bl blb\n"
        ));
    }
    let f = parse_netlist(&text, "generated").unwrap();
    let mut d = Device::new(
        CircuitBundle {
            netlist: f.netlist,
            stimulus: f.activity,
            process: ProcessProfile::default(),
        },
        ModelConfig::default(),
    )
    .unwrap();
    let rates = d.stress_rates(&d.model.operating).unwrap();
    let max = rates.values().cloned().fold(0.0, f64::max);
    d.model.aging.prefactor = prefactor_for_rate(max, 15.0 * YEAR, &d.model.aging).unwrap();
    d.apply_vt0_jitter(rng.gen(), 0.01).unwrap();
    d
}

fn c6_confusion_matrix() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let protocol = DiagnosticProtocol::default();
    let mut wrong = Vec::new();
    let mut tally = [[0usize; 4]; 3];
    let col = |v: Verdict| match v {
        Verdict::NoFailure => 0,
        Verdict::HciFailure => 1,
        Verdict::NonHciDegradation => 2,
        Verdict::DiedDuringStress => 3,
    };
    for (row, want) in [
        Verdict::NoFailure,
        Verdict::HciFailure,
        Verdict::NonHciDegradation,
    ]
    .into_iter()
    .enumerate()
    {
        for i in 0..100 {
            let mut d = random_device(&mut rng);
            match want {
                Verdict::HciFailure => {
                    // years of field use under HCI stress, with a random interface/oxide split
                    let phi = rng.gen_range(0.2..0.5);
                    let years = rng.gen_range(2.0..14.0);
                    let fraction = d.model.aging.interface_fraction;
                    d.model.aging.interface_fraction = phi;
                    let rates = d.stress_rates(&d.model.operating).unwrap();
                    d.age(&rates, years * YEAR).unwrap();
                    d.model.aging.interface_fraction = fraction;
                }
                Verdict::NonHciDegradation => {
                    let c = d.model.aging;
                    for s in d.states.values_mut() {
                        let dvt = rng.gen_range(0.05..0.15);
                        *s = TransistorState::from_traps(dvt / c.k_it, 0.0, 1e8, &c);
                    }
                }
                _ => {}
            }
            let (r, _) = run_thermal_cycle_diagnostic(&d, &protocol).map_err(|e| e.to_string())?;
            tally[row][col(r.verdict)] += 1;
            if r.verdict != want {
                wrong.push(format!(
                    "{want:?} #{i} -> {:?} (shift {:?}, recovery {:?})",
                    r.verdict, r.shift, r.recovery
                ));
            }
        }
    }
    ensure!(
        wrong.is_empty(),
        "{} misclassified: {}",
        wrong.len(),
        wrong.join("; ")
    );
    Ok(format!(
        "rows no/hci/non-hci: {:?} {:?} {:?}",
        tally[0], tally[1], tally[2]
    ))
}

fn c7_stealth() -> Outcome {
    let mut checked = 0;
    for path in corpus_scenarios() {
        let cfg: ScenarioConfig<f64> = load_scenario(&path).map_err(|e| e.to_string())?;
        if cfg.trojans.is_empty() {
            continue;
        }
        let onset = cfg.expect.canary_quiet_until.ok_or(format!(
            "{}: trojan scenario without a documented onset",
            cfg.name
        ))?;
        let r = run_scenario(&cfg).map_err(|e| e.to_string())?;
        let inf = r.infected.as_ref().unwrap();
        let a = r
            .baseline
            .lifetime
            .trace
            .first()
            .ok_or("empty baseline trace")?;
        let b = inf.lifetime.trace.first().ok_or("empty infected trace")?;
        ensure!(
            a.time == 0.0 && b.time == 0.0,
            "{}: first samples not at t = 0",
            cfg.name
        );
        ensure!(
            a.indicators() == b.indicators(),
            "{}: t = 0 snapshots differ: {a:?} vs {b:?}",
            cfg.name
        );
        if let Some(t) = inf.canary_first_flag {
            ensure!(
                t >= onset,
                "{}: canary flagged at {t} s, before {onset} s",
                cfg.name
            );
        }
        ensure!(
            r.expectation.is_some_and(|e| e.met),
            "{}: expectation not met",
            cfg.name
        );
        checked += 1;
    }
    ensure!(
        checked >= 5,
        "only {checked} trojan scenarios in the corpus"
    );
    Ok(format!("{checked} trojan scenarios"))
}

fn c8_reproducibility() -> Outcome {
    let mut n = 0;
    for path in corpus_scenarios() {
        let cfg: ScenarioConfig<f64> = load_scenario(&path).map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let again: ScenarioConfig<f64> = load_scenario(&path).map_err(|e| e.to_string())?;
            let r = run_scenario(&again).map_err(|e| e.to_string())?;
            emit_report(&r, dir.path(), &[ReportFormat::Json, ReportFormat::Csv])
                .map_err(|e| e.to_string())?;
            let read = |f: &str| std::fs::read(dir.path().join(f)).map_err(|e| e.to_string());
            bytes.push((read("report.json")?, read("trace.csv")?));
        }
        ensure!(
            bytes[0].0 == bytes[1].0,
            "{}: report.json differs between runs",
            cfg.name
        );
        ensure!(
            bytes[0].1 == bytes[1].1,
            "{}: trace.csv differs between runs",
            cfg.name
        );
        n += 1;
    }
    Ok(format!("{n} scenarios byte-identical"))
}

fn dvt_at(bias: &BiasCondition<f64>, process: &ProcessProfile<f64>, t: f64) -> f64 {
    let c = AgingModelConfig::<f64>::default();
    let w = classify_mechanisms(bias, c.classify_tol, &c).unwrap();
    let s = stress_factor(&w, bias, process, &nmos(), &c).unwrap();
    apply_stress(&TransistorState::pristine(), s, t, &c)
        .unwrap()
        .delta_vt(&c)
}

fn fail<V: std::fmt::Debug>(what: &str, e: proptest::test_runner::TestError<V>) -> String {
    format!("{what}: {e}")
}

fn c9_monotonicity() -> Outcome {
    let cases = 256;
    let nominal = BiasCondition::new(1.2, 1.2, 0.0, 0.0).with_activity(1e6, 0.5);
    let process = ProcessProfile::<f64>::default();

    runner(cases)
        .run(
            &(1e-3..1e3f64, 0.0..1e9f64, 0.0..1e9f64, 0.0..0.1f64),
            |(rate, a, b, pre)| {
                let c = AgingModelConfig::<f64>::default();
                let start =
                    TransistorState::from_traps(0.6 * pre / c.k_it, 0.4 * pre / c.k_ot, 0.0, &c);
                let (t1, t2) = (a.min(b), a.max(b));
                let x = apply_stress(&start, rate, t1, &c).unwrap();
                let y = apply_stress(&start, rate, t2, &c).unwrap();
                prop_assert!(y.delta_vt(&c) >= x.delta_vt(&c));
                prop_assert!(x.delta_vt(&c) >= start.delta_vt(&c));
                Ok(())
            },
        )
        .map_err(|e| fail("time", e))?;

    runner(cases)
        .run(
            &(0.0..1e8f64, 0.0..1e8f64, 0.0..1.0f64, 1e3..1e9f64),
            |(a, b, duty, t)| {
                let lo = dvt_at(&nominal.with_activity(a.min(b), duty), &process, t);
                let hi = dvt_at(&nominal.with_activity(a.max(b), duty), &process, t);
                prop_assert!(hi >= lo);
                Ok(())
            },
        )
        .map_err(|e| fail("toggle rate", e))?;

    runner(cases)
        .run(
            &(
                0.0..1.0f64,
                0.0..1.0f64,
                0.0..1.0f64,
                0.0..1.0f64,
                1e3..1e9f64,
            ),
            |(a, b, che, she, t)| {
                let c = AgingModelConfig::<f64>::default();
                let at = |w_dahc| {
                    let w = MechanismActivation {
                        w_dahc,
                        w_che: che,
                        w_she: she,
                    };
                    let s = stress_factor(&w, &nominal, &process, &nmos(), &c).unwrap();
                    closed_form_delta_vt(s, t, &c).unwrap()
                };
                prop_assert!(at(a.max(b)) >= at(a.min(b)));
                Ok(())
            },
        )
        .map_err(|e| fail("drain-avalanche weight", e))?;

    // approaching vd = 2vg from below, past the channel-hot-electron band
    runner(cases)
        .run(
            &(1.12..2.0f64, 1.12..2.0f64, 0.2..1.2f64, 1e3..1e9f64),
            |(a, b, vg, t)| {
                let bias =
                    |r: f64| BiasCondition::new(r * vg, vg, 0.0, 0.0).with_activity(1e6, 0.5);
                prop_assert!(
                    dvt_at(&bias(a.max(b)), &process, t) >= dvt_at(&bias(a.min(b)), &process, t)
                );
                Ok(())
            },
        )
        .map_err(|e| fail("drain-avalanche ratio", e))?;

    runner(cases)
        .run(
            &(0.0..0.5f64, 0.0..0.5f64, prop::bool::ANY, 1e3..1e9f64),
            |(a, b, below, t)| {
                let sign = if below { -1.0 } else { 1.0 };
                let at = |m: f64| {
                    let p = apply_process_trojan(
                        &process,
                        &ProcessNitrateDistortion {
                            delta_c: sign * m,
                            anneal_delta: 0.0,
                        },
                    )
                    .unwrap();
                    dvt_at(&nominal, &p, t)
                };
                prop_assert!(at(a.max(b)) >= at(a.min(b)));
                Ok(())
            },
        )
        .map_err(|e| fail("nitrate distortion", e))?;

    let netlist = (
        prop::collection::vec(0u8..3, 1..7),
        1e4..5e6f64,
        1.0..8.0f64,
        -0.4..0.4f64,
        0.3..0.9f64,
    );
    runner(cases)
        .run(&netlist, |(kinds, rate, factor, dc, vg)| {
            let mut text = format!(
                "input n0 rate={rate}\ninput b rate=3e5\ninput bl rate=0\ninput blb rate=0\n"
            );
            for (i, k) in kinds.iter().enumerate() {
                let g = ["INV", "NAND2", "NOR2"][*k as usize];
                let side = if g == "INV" { "" } else { " b" };
                text.push_str(&format!("gate g{i} {g} n{i}{side} n{}\n", i + 1));
            }
            text.push_str(&format!("gate c0 SRAM6T n{} bl blb\n", kinds.len()));
            let mut d = device(&text);
            let trojans = TrojanScenario {
                trojans: vec![
                    TrojanVector::Process(ProcessNitrateDistortion {
                        delta_c: dc,
                        anneal_delta: 0.0,
                    }),
                    TrojanVector::Bias(BiasAlteration {
                        targets: vec!["g0.*".into()],
                        bias: BiasOverride::voltages(2.0 * vg, vg, 0.0),
                    }),
                    TrojanVector::Workload(WorkloadAmplification {
                        targets: vec!["*".into()],
                        factor,
                    }),
                ],
            };
            let rates = d.stress_rates(&d.model.operating).unwrap();
            let max = rates.values().cloned().fold(0.0, f64::max);
            d.model.aging.prefactor = prefactor_for_rate(max, 15.0 * YEAR, &d.model.aging).unwrap();
            d.bundle = compose_scenario(&d.bundle, &trojans).unwrap();
            let r = simulate_lifetime(&d, 40.0 * YEAR, YEAR / 4.0).unwrap();
            prop_assert!(r.trace.len() >= 2);
            for w in r.trace.windows(2) {
                prop_assert!(w[1].ring_freq <= w[0].ring_freq, "{:?}", w);
            }
            Ok(())
        })
        .map_err(|e| fail("ring frequency", e))?;

    Ok(format!(
        "{cases} cases each for time, toggle, drain-avalanche (weight, ratio), nitrate, ring"
    ))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(u32, &str, Check, u64); 9] = [
        (1, "mechanism classification", c1_classification, 1),
        (2, "oracle equivalence", c2_oracle_equivalence, 5),
        (3, "lifetime calibration", c3_calibration, 10),
        (4, "trojan acceleration", c4_trojan_acceleration, 30),
        (5, "SRAM passthrough and workload", c5_sram, 30),
        (6, "diagnostic confusion matrix", c6_confusion_matrix, 60),
        (7, "stealth at t = 0", c7_stealth, 30),
        (8, "reproducibility", c8_reproducibility, 30),
        (9, "monotonicity suite", c9_monotonicity, 60),
    ];
    assert!(Path::new(&corpus_dir()).is_dir(), "scenario corpus missing");
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > Duration::from_secs(budget) => Err(format!(
                "took {:.2} s, budget {budget} s",
                elapsed.as_secs_f64()
            )),
            r => r,
        };
        match result {
            Ok(detail) => println!(
                "PASS  criterion {id}: {name} ({:.2} s) {detail}",
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "FAIL  criterion {id}: {name} ({:.2} s) {why}",
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
