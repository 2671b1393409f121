use std::fmt::Write;

use super::SparseDtmc;

/// Flat PRISM DTMC with one guarded command per non-deadlocked state.
///
/// Each machine becomes an integer variable `<machine>_state`, each shared
/// variable keeps its name, and `ticks` counts macro-steps. Value indices
/// follow declaration order and are listed in comments.
pub fn to_prism(dtmc: &SparseDtmc) -> String {
    let mut out = String::new();
    out.push_str("// Flattened tick-synchronized network.\n");
    out.push_str("// One command per reachable state; each command is one tick.\n");
    out.push_str("dtmc\n\nmodule composed\n");

    let mut names: Vec<String> = Vec::new();
    let init = dtmc.state(dtmc.initial());
    for (m, &l) in dtmc.machines().iter().zip(&init.locals) {
        let name = format!("{}_state", m.name);
        let _ = writeln!(
            out,
            "  {name} : [0..{}] init {l}; // {}",
            m.states.len().saturating_sub(1),
            enumerate(&m.states)
        );
        names.push(name);
    }
    for (v, &x) in dtmc.vars().iter().zip(&init.valuation) {
        let _ = writeln!(
            out,
            "  {} : [0..{}] init {x}; // {}",
            v.name,
            v.values.len().saturating_sub(1),
            enumerate(&v.values)
        );
        names.push(v.name.clone());
    }
    let _ = writeln!(out, "  ticks : [0..{}] init 0;\n", dtmc.horizon());

    let assignment = |i: usize| -> Vec<(String, u32)> {
        let s = dtmc.state(i);
        s.locals
            .iter()
            .chain(&s.valuation)
            .map(|&x| x as u32)
            .chain(std::iter::once(s.ticks))
            .zip(names.iter().cloned().chain(std::iter::once("ticks".to_string())))
            .map(|(x, n)| (n, x))
            .collect()
    };

    for i in 0..dtmc.state_count() {
        if dtmc.is_deadlock(i) {
            let _ = writeln!(out, "  // state {i} has no outgoing transitions");
            continue;
        }
        let here = assignment(i);
        let guard: Vec<String> = here.iter().map(|(n, x)| format!("{n}={x}")).collect();
        let updates: Vec<String> = dtmc
            .row(i)
            .map(|(j, p)| {
                if j == i {
                    return format!("{p} : true");
                }
                let changed: Vec<String> = assignment(j)
                    .iter()
                    .zip(&here)
                    .filter(|((_, after), (_, before))| after != before)
                    .map(|((n, x), _)| format!("({n}'={x})"))
                    .collect();
                format!("{p} : {}", changed.join(" & "))
            })
            .collect();
        let _ = writeln!(out, "  [] {} -> {};", guard.join(" & "), updates.join(" + "));
    }
    out.push_str("endmodule\n\n");

    for (v, var) in dtmc.vars().iter().enumerate() {
        for (x, value) in var.values.iter().enumerate() {
            let _ = writeln!(out, "label \"{}_{}\" = {}={};", var.name, value, dtmc.vars()[v].name, x);
        }
    }
    out.push_str(
        "// label \"deadlock\" is built into the checker: it marks states without\n\
         // outgoing commands, which is how deadlocked states are exported above.\n",
    );
    out
}

fn enumerate(names: &[String]) -> String {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| format!("{i}={n}"))
        .collect::<Vec<_>>()
        .join(" ")
}
