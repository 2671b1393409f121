use std::fmt::Write;

use super::SparseDtmc;

/// Graphviz rendering. Nodes show machine states, the valuation and the
/// tick; edges carry probabilities with six decimals.
pub fn to_dot(dtmc: &SparseDtmc) -> String {
    let mut out = String::from("digraph dtmc {\n  node [shape=box, fontname=\"monospace\"];\n");
    for i in 0..dtmc.state_count() {
        let s = dtmc.state(i);
        let locals: Vec<String> = dtmc
            .machines()
            .iter()
            .zip(&s.locals)
            .map(|(m, &l)| format!("{}={}", m.name, m.states[l as usize]))
            .collect();
        let valuation: Vec<String> = dtmc
            .vars()
            .iter()
            .zip(&s.valuation)
            .map(|(v, &x)| format!("{}={}", v.name, v.values[x as usize]))
            .collect();
        let mut label = locals.join(", ");
        if !valuation.is_empty() {
            label.push_str("\\n");
            label.push_str(&valuation.join(", "));
        }
        let _ = write!(label, "\\nticks={}", s.ticks);
        let mut attrs = format!("label=\"{label}\"");
        if i == dtmc.initial() {
            attrs.push_str(", penwidth=2");
        }
        if dtmc.is_deadlock(i) {
            attrs.push_str(", color=red");
        }
        let _ = writeln!(out, "  s{i} [{attrs}];");
    }
    for i in 0..dtmc.state_count() {
        for (j, p) in dtmc.row(i) {
            let _ = writeln!(out, "  s{i} -> s{j} [label=\"{p:.6}\"];");
        }
    }
    out.push_str("}\n");
    out
}
