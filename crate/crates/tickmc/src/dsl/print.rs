use std::fmt::Write;

use super::PropertyFile;
use crate::engine::{QueryKind, TickBound, TickMode};
use crate::model::{format_rational, Network, ScenarioConfig};

/// Canonical text of a network.
///
/// Domains, variables and constants come out sorted by name; machines keep
/// their update order, and states and transitions their declaration order.
pub fn pretty_print(net: &Network) -> String {
    let mut out = String::new();
    for domain in net.domains.values() {
        let _ = writeln!(out, "domain {} {{ {} }}", domain.name, domain.values.join(", "));
    }
    section_break(&mut out);
    for var in net.vars.values() {
        let _ = writeln!(out, "var {} : {} = {};", var.name, var.domain, var.initial);
    }
    section_break(&mut out);
    for c in net.constants.values() {
        match &c.value {
            Some(v) => {
                let _ = writeln!(out, "const {} : {} = {};", c.name, c.kind, format_rational(v));
            }
            None => {
                let _ = writeln!(out, "const {} : {};", c.name, c.kind);
            }
        }
    }
    section_break(&mut out);
    if let Some(h) = &net.horizon {
        let _ = writeln!(out, "horizon {h};");
    }
    for m in &net.machines {
        section_break(&mut out);
        let _ = writeln!(out, "machine {} {{", m.name);
        let _ = writeln!(out, "  initial {};", m.initial);
        for s in &m.states {
            let prefix = if s.is_final { "final " } else { "" };
            let _ = writeln!(out, "  {prefix}state {};", s.name);
        }
        for t in &m.transitions {
            let _ = write!(out, "  from {}", t.source);
            if !t.guard.is_true() {
                let _ = write!(out, " when {}", t.guard);
            }
            out.push_str(" goto");
            for (i, b) in t.branches.iter().enumerate() {
                if i > 0 {
                    out.push_str("\n    or");
                }
                let _ = write!(out, " [{}] {}", b.weight, b.target);
                if !b.updates.is_empty() {
                    let updates: Vec<String> = b
                        .updates
                        .iter()
                        .map(|u| format!("{} := {}", u.var, u.value))
                        .collect();
                    let _ = write!(out, " set {}", updates.join(", "));
                }
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }
    out
}

fn section_break(out: &mut String) {
    if !out.is_empty() && !out.ends_with("\n\n") {
        out.push('\n');
    }
}

/// Canonical text of configuration blocks, in the given order.
pub fn pretty_print_configs(configs: &[ScenarioConfig]) -> String {
    let mut out = String::new();
    for (i, cfg) in configs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "config {} {{", cfg.name);
        for (name, value) in &cfg.bindings {
            let _ = writeln!(out, "  {name} = {};", format_rational(value));
        }
        out.push_str("}\n");
    }
    out
}

pub fn pretty_print_properties(file: &PropertyFile) -> String {
    let mut out = String::new();
    for import in &file.imports {
        let _ = writeln!(out, "import {import}::*");
    }
    for q in &file.queries {
        section_break(&mut out);
        let _ = writeln!(out, "prob property {}:", q.id);
        match &q.kind {
            QueryKind::DeadlockFreedom => out.push_str("  not Exists [Finally deadlock]\n"),
            QueryKind::Probability { predicate, ticks } => {
                let mut atoms: Vec<String> = predicate
                    .atoms
                    .iter()
                    .map(|a| format!("{}{}{}", a.var, a.op.symbol(), a.value))
                    .collect();
                let bound = |b: TickBound| match b {
                    TickBound::Param => "t".to_string(),
                    TickBound::At(t) => t.to_string(),
                };
                match ticks {
                    TickMode::Exact(b) => atoms.push(format!("ticks=={}", bound(*b))),
                    TickMode::Cumulative(b) => atoms.push(format!("ticks<={}", bound(*b))),
                    TickMode::Unbounded => {}
                }
                if atoms.is_empty() {
                    atoms.push("true".into());
                }
                let _ = writeln!(out, "  Prob=? of [Finally {}]", atoms.join(" /\\ "));
            }
        }
        let _ = write!(out, "  with constants {}", q.config);
        if let Some(range) = &q.sweep {
            let _ = write!(out, " for t in {}..{}", range.start(), range.end());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_config, parse_model, parse_properties};

    #[test]
    fn minimal_model_is_stable() {
        let text = "const N : count;\nhorizon N;\nmachine M { initial S; state S; }";
        let net = parse_model(text).unwrap();
        let printed = pretty_print(&net);
        assert_eq!(
            printed,
            "const N : count;\n\nhorizon N;\n\nmachine M {\n  initial S;\n  state S;\n}\n"
        );
        assert_eq!(pretty_print(&parse_model(&printed).unwrap()), printed);
    }

    #[test]
    fn declaration_order_does_not_matter() {
        let a = "domain D { x, y } var v : D = x; const p : probability; const N : count; horizon N;";
        let b = "const N : count; horizon N; var v : D = x; const p : probability; domain D { x, y }";
        let pa = pretty_print(&parse_model(a).unwrap());
        let pb = pretty_print(&parse_model(b).unwrap());
        assert_eq!(pa, pb);
    }

    #[test]
    fn configs_round_trip() {
        let text = "config B { q = 0.25; p = 1; }\nconfig A { }";
        let configs = parse_config(text).unwrap();
        assert_eq!(parse_config(&pretty_print_configs(&configs)).unwrap(), configs);
    }

    #[test]
    fn properties_round_trip() {
        let text = "import m::*
            prob property P1: Prob=? of [Finally a==x /\\ b!=y /\\ ticks==t] with constants C1 for t in 0..4
            prob property P2: not Exists [Finally deadlock] with constant C1
            prob property P3: Prob=? of [Finally ticks <= 5] with constants C1";
        let file = parse_properties(text).unwrap();
        let printed = pretty_print_properties(&file);
        assert_eq!(parse_properties(&printed).unwrap(), file);
    }
}
