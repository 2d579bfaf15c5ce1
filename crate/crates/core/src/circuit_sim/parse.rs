//! Line-oriented netlist format.
//!
//! ```text
//! # comment
//! gate <name> <INV|NAND2|NOR2|SRAM6T> <net>...
//! input <net> rate=<Hz> [duty=<fraction>]
//! output <net>
//! write <cell> freq=<Hz>
//! override <gate>.<role> [vd=<V>] [vg=<V>] [vs=<V>] [vsub=<V>] [temp=<°C>] [rate=<Hz>] [duty=<fraction>]
//! ```
//!
//! Logic gates list their input nets followed by the output net; SRAM cells list
//! `wl bl blb`. Statements may appear in any order. Keywords and gate kinds are
//! case-insensitive; names are not.

use std::collections::BTreeMap;

use crate::circuit_sim::activity::{ActivityProfile, NetActivity};
use crate::circuit_sim::netlist::{BiasOverride, Gate, GateKind, Netlist};
use crate::error::{HciError, Result};
use crate::scalar::{lit, Real};

/// Parsed netlist plus the stimulus declared alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct NetlistFile<T> {
    pub netlist: Netlist<T>,
    pub activity: ActivityProfile<T>,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Cursor<'a> {
    origin: &'a str,
    line: usize,
}

impl Cursor<'_> {
    fn err(&self, column: usize, message: impl Into<String>) -> HciError {
        HciError::Parse {
            origin: self.origin.to_string(),
            line: self.line,
            column,
            message: message.into(),
        }
    }
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in content.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &content[s..i],
                    column: content[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &content[s..],
            column: content[..s].chars().count() + 1,
        });
    }
    tokens
}

fn key_values<'a, T: Real>(
    cur: &Cursor<'_>,
    tokens: &[Token<'a>],
    allowed: &[&str],
) -> Result<BTreeMap<&'a str, T>> {
    let mut out = BTreeMap::new();
    for tok in tokens {
        let (key, value) = tok.text.split_once('=').ok_or_else(|| {
            cur.err(
                tok.column,
                format!("expected key=value, found `{}`", tok.text),
            )
        })?;
        if !allowed.contains(&key) {
            return Err(cur.err(
                tok.column,
                format!(
                    "unknown key `{key}` (expected one of {})",
                    allowed.join(", ")
                ),
            ));
        }
        let v: f64 = value.parse().map_err(|_| {
            cur.err(
                tok.column + key.len() + 1,
                format!("`{value}` is not a number"),
            )
        })?;
        if !v.is_finite() {
            return Err(cur.err(tok.column + key.len() + 1, "value must be finite"));
        }
        if out.insert(key, lit::<T>(v)).is_some() {
            return Err(cur.err(tok.column, format!("key `{key}` given twice")));
        }
    }
    Ok(out)
}

fn check_name(cur: &Cursor<'_>, tok: &Token<'_>, what: &str) -> Result<()> {
    let ok = tok
        .text
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '[' | ']' | '$' | '-'));
    if ok {
        Ok(())
    } else {
        Err(cur.err(tok.column, format!("invalid {what} name `{}`", tok.text)))
    }
}

pub fn parse_netlist<T: Real>(text: &str, origin: &str) -> Result<NetlistFile<T>> {
    let mut gates: Vec<Gate<T>> = Vec::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut activity = ActivityProfile::default();
    // (line, column of target, gate, role, override)
    let mut overrides = Vec::new();
    let mut writes = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let cur = Cursor {
            origin,
            line: idx + 1,
        };
        let tokens = tokenize(line);
        let Some(head) = tokens.first() else {
            continue;
        };
        let args = &tokens[1..];
        match head.text.to_ascii_lowercase().as_str() {
            "gate" => {
                if args.len() < 2 {
                    return Err(cur.err(head.column, "expected `gate <name> <kind> <net>...`"));
                }
                check_name(&cur, &args[0], "gate")?;
                let kind = GateKind::parse(args[1].text).ok_or_else(|| {
                    cur.err(
                        args[1].column,
                        format!(
                            "unknown gate kind `{}` (expected INV, NAND2, NOR2 or SRAM6T)",
                            args[1].text
                        ),
                    )
                })?;
                let nets = &args[2..];
                if nets.len() != kind.pin_count() {
                    return Err(cur.err(
                        args[1].column,
                        format!(
                            "{kind} takes {} nets, found {}",
                            kind.pin_count(),
                            nets.len()
                        ),
                    ));
                }
                for n in nets {
                    check_name(&cur, n, "net")?;
                }
                if gates.iter().any(|g| g.name == args[0].text) {
                    return Err(
                        cur.err(args[0].column, format!("duplicate gate `{}`", args[0].text))
                    );
                }
                gates.push(Gate::new(
                    args[0].text,
                    kind,
                    nets.iter().map(|t| t.text.to_string()).collect(),
                ));
            }
            "input" => {
                let Some(net) = args.first() else {
                    return Err(cur.err(head.column, "expected `input <net> rate=<Hz>`"));
                };
                check_name(&cur, net, "net")?;
                let kv = key_values::<T>(&cur, &args[1..], &["rate", "duty"])?;
                let rate = *kv
                    .get("rate")
                    .ok_or_else(|| cur.err(net.column, "input needs rate=<Hz>"))?;
                let duty = kv.get("duty").copied().unwrap_or_else(|| lit(0.5));
                if rate < T::zero() {
                    return Err(cur.err(net.column, "rate must be >= 0"));
                }
                if !(duty >= T::zero() && duty <= T::one()) {
                    return Err(cur.err(net.column, "duty must lie in [0, 1]"));
                }
                if inputs.iter().any(|n| n == net.text) {
                    return Err(cur.err(net.column, format!("input `{}` declared twice", net.text)));
                }
                inputs.push(net.text.to_string());
                activity
                    .nets
                    .insert(net.text.to_string(), NetActivity { rate, duty });
            }
            "output" => {
                if args.len() != 1 {
                    return Err(cur.err(head.column, "expected `output <net>`"));
                }
                check_name(&cur, &args[0], "net")?;
                outputs.push(args[0].text.to_string());
            }
            "write" => {
                let Some(cell) = args.first() else {
                    return Err(cur.err(head.column, "expected `write <cell> freq=<Hz>`"));
                };
                let kv = key_values::<T>(&cur, &args[1..], &["freq"])?;
                let freq = *kv
                    .get("freq")
                    .ok_or_else(|| cur.err(cell.column, "write needs freq=<Hz>"))?;
                if freq < T::zero() {
                    return Err(cur.err(cell.column, "freq must be >= 0"));
                }
                writes.push((cur.line, cell.column, cell.text.to_string(), freq));
            }
            "override" => {
                let Some(target) = args.first() else {
                    return Err(cur.err(
                        head.column,
                        "expected `override <gate>.<role> key=value...`",
                    ));
                };
                let Some((gate, role)) = target.text.split_once('.') else {
                    return Err(cur.err(target.column, "override target must be <gate>.<role>"));
                };
                let kv = key_values::<T>(
                    &cur,
                    &args[1..],
                    &["vd", "vg", "vs", "vsub", "temp", "rate", "duty"],
                )?;
                if kv.is_empty() {
                    return Err(cur.err(target.column, "override sets no fields"));
                }
                let ov = BiasOverride {
                    vd: kv.get("vd").copied(),
                    vg: kv.get("vg").copied(),
                    vs: kv.get("vs").copied(),
                    vsub: kv.get("vsub").copied(),
                    temperature: kv.get("temp").copied(),
                    toggle_rate: kv.get("rate").copied(),
                    duty: kv.get("duty").copied(),
                };
                if ov.toggle_rate.is_some_and(|r| r < T::zero()) {
                    return Err(cur.err(target.column, "rate must be >= 0"));
                }
                if ov.duty.is_some_and(|d| !(d >= T::zero() && d <= T::one())) {
                    return Err(cur.err(target.column, "duty must lie in [0, 1]"));
                }
                overrides.push((
                    cur.line,
                    target.column,
                    gate.to_string(),
                    role.to_string(),
                    ov,
                ));
            }
            other => {
                return Err(cur.err(
                    head.column,
                    format!("unknown statement `{other}` (expected gate, input, output, write or override)"),
                ));
            }
        }
    }

    for (line, column, gate, role, ov) in overrides {
        let cur = Cursor { origin, line };
        let g = gates
            .iter_mut()
            .find(|g| g.name == gate)
            .ok_or_else(|| cur.err(column, format!("override of unknown gate `{gate}`")))?;
        if g.role(&role).is_none() {
            return Err(cur.err(column, format!("{} has no transistor `{role}`", g.kind)));
        }
        g.bias_overrides.insert(role, ov);
    }
    for (line, column, cell, freq) in writes {
        let cur = Cursor { origin, line };
        match gates.iter().find(|g| g.name == cell) {
            Some(g) if g.kind == GateKind::Sram6t => {
                activity.writes.insert(cell, freq);
            }
            Some(_) => return Err(cur.err(column, format!("`{cell}` is not an SRAM6T cell"))),
            None => return Err(cur.err(column, format!("write to unknown cell `{cell}`"))),
        }
    }

    let netlist = Netlist::new(gates, inputs, outputs).map_err(|e| match e {
        HciError::InvalidNetlist(m) => HciError::Parse {
            origin: origin.to_string(),
            line: 0,
            column: 0,
            message: m,
        },
        other => other,
    })?;
    Ok(NetlistFile { netlist, activity })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = "\
# three-stage chain
input a rate=1e6
gate g0 INV a n1
gate g1 inv n1 n2   # lower-case kind is fine
gate g2 INV n2 y
output y
override g1.MN vd=1.2 vg=0.6 vsub=0
";

    #[test]
    fn parses_chain_with_override() {
        let f = parse_netlist::<f64>(CHAIN, "chain.net").unwrap();
        assert_eq!(f.netlist.gates().len(), 3);
        assert_eq!(f.activity.nets["a"].rate, 1e6);
        assert_eq!(f.activity.nets["a"].duty, 0.5);
        let ov = f.netlist.gate("g1").unwrap().bias_overrides["MN"];
        assert_eq!(ov.vd, Some(1.2));
        assert_eq!(ov.vg, Some(0.6));
        assert_eq!(ov.toggle_rate, None);
    }

    #[test]
    fn unknown_kind_reports_position() {
        let err =
            parse_netlist::<f64>("input a rate=1\ngate g0 XOR2 a b y\n", "t.net").unwrap_err();
        match err {
            HciError::Parse {
                line,
                column,
                message,
                ..
            } => {
                assert_eq!((line, column), (2, 9));
                assert!(message.contains("XOR2"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_values_are_located() {
        let err = parse_netlist::<f64>("input a rate=fast\n", "t.net").unwrap_err();
        assert!(
            matches!(
                err,
                HciError::Parse {
                    line: 1,
                    column: 14,
                    ..
                }
            ),
            "{err}"
        );
        let err = parse_netlist::<f64>("input a speed=1\n", "t.net").unwrap_err();
        assert!(
            matches!(
                err,
                HciError::Parse {
                    line: 1,
                    column: 9,
                    ..
                }
            ),
            "{err}"
        );
        let err = parse_netlist::<f64>("frobnicate x\n", "t.net").unwrap_err();
        assert!(
            matches!(
                err,
                HciError::Parse {
                    line: 1,
                    column: 1,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn override_targets_are_checked() {
        let text = "input a rate=1\ngate g0 INV a y\noverride g0.PS_L vd=1\n";
        let err = parse_netlist::<f64>(text, "t.net").unwrap_err();
        assert!(
            matches!(
                err,
                HciError::Parse {
                    line: 3,
                    column: 10,
                    ..
                }
            ),
            "{err}"
        );
        let text = "input a rate=1\ngate g0 INV a y\noverride g7.MN vd=1\n";
        assert!(parse_netlist::<f64>(text, "t.net").is_err());
    }

    #[test]
    fn sram_writes() {
        let text = "input wl rate=0\ninput bl rate=0\ninput blb rate=0\ngate c0 SRAM6T wl bl blb\nwrite c0 freq=2e5\n";
        let f = parse_netlist::<f64>(text, "t.net").unwrap();
        assert_eq!(f.activity.writes["c0"], 2e5);
        let bad = "input a rate=0\ngate g0 INV a y\nwrite g0 freq=1\n";
        assert!(parse_netlist::<f64>(bad, "t.net").is_err());
    }

    #[test]
    fn structural_errors_surface_as_parse_errors() {
        let err = parse_netlist::<f64>("gate g0 INV x y\n", "t.net").unwrap_err();
        assert!(err.to_string().contains("never driven"), "{err}");
        assert!(parse_netlist::<f64>("", "t.net").is_err());
    }
}
