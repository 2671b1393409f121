use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed};

use super::{GuardExpr, Loc, Network, ProbExpr, Rational, SourceSpan};

/// Largest admissible deviation of a transition's branch-weight sum from 1.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Valuation spaces larger than this are not enumerated when checking guard
/// exclusivity; a warning is emitted instead.
const EXCLUSIVITY_ENUMERATION_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// Where in a network a diagnostic applies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Location {
    pub machine: Option<String>,
    pub state: Option<String>,
    /// Index of the transition within its machine.
    pub transition: Option<usize>,
    /// Top-level item (domain, variable, constant) name.
    pub item: Option<String>,
}

impl Location {
    pub fn item(name: &str) -> Self {
        Self {
            item: Some(name.to_string()),
            ..Self::default()
        }
    }

    pub fn machine(name: &str) -> Self {
        Self {
            machine: Some(name.to_string()),
            ..Self::default()
        }
    }

    fn with_state(mut self, state: &str) -> Self {
        self.state = Some(state.to_string());
        self
    }

    fn with_transition(mut self, index: usize) -> Self {
        self.transition = Some(index);
        self
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(item) = &self.item {
            parts.push(format!("`{item}`"));
        }
        if let Some(machine) = &self.machine {
            parts.push(format!("machine {machine}"));
        }
        if let Some(state) = &self.state {
            parts.push(format!("state {state}"));
        }
        if let Some(index) = self.transition {
            parts.push(format!("transition #{}", index + 1));
        }
        if parts.is_empty() {
            f.write_str("network")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub span: Option<SourceSpan>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(location: Location, loc: &Loc, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            location,
            span: loc.span().cloned(),
            message: message.into(),
        }
    }

    pub fn warning(location: Location, loc: &Loc, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(location, loc, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = &self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{}: {} ({})", self.severity, self.message, self.location)
    }
}

/// Checks every structural invariant of a network and returns the
/// violations found. An empty report means the network is well formed.
///
/// Branch-weight sums and ranges are only checked for weights whose
/// constants are all bound; binding re-runs validation with every constant
/// resolved.
pub fn validate_network(net: &Network) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_declarations(net, &mut out);
    check_horizon(net, &mut out);
    let bound = net.bound_values();
    let mut writers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for machine in &net.machines {
        for var in machine.writes() {
            writers.entry(var).or_default().push(&machine.name);
        }
        check_machine(net, machine, &bound, &mut out);
    }
    for (var, machines) in writers {
        if machines.len() > 1 {
            let loc = net.vars.get(var).map(|v| &v.loc).unwrap_or(&Loc::NONE);
            out.push(Diagnostic::error(
                Location::item(var),
                loc,
                format!(
                    "shared variable written by multiple machines: {}",
                    machines.join(", ")
                ),
            ));
        }
    }
    let mut seen = BTreeSet::new();
    for machine in &net.machines {
        if !seen.insert(machine.name.as_str()) {
            out.push(Diagnostic::error(
                Location::machine(&machine.name),
                &machine.loc,
                "duplicate machine name",
            ));
        }
    }
    out
}

fn check_declarations(net: &Network, out: &mut Vec<Diagnostic>) {
    for domain in net.domains.values() {
        if domain.values.is_empty() {
            out.push(Diagnostic::error(
                Location::item(&domain.name),
                &domain.loc,
                "domain has no values",
            ));
        }
        let mut seen = BTreeSet::new();
        for value in &domain.values {
            if !seen.insert(value) {
                out.push(Diagnostic::error(
                    Location::item(&domain.name),
                    &domain.loc,
                    format!("duplicate value `{value}` in domain"),
                ));
            }
        }
    }
    for var in net.vars.values() {
        match net.domains.get(&var.domain) {
            None => out.push(Diagnostic::error(
                Location::item(&var.name),
                &var.loc,
                format!("unknown domain `{}`", var.domain),
            )),
            Some(domain) if domain.position(&var.initial).is_none() => {
                out.push(Diagnostic::error(
                    Location::item(&var.name),
                    &var.loc,
                    format!(
                        "initial value `{}` is not in domain `{}`",
                        var.initial, domain.name
                    ),
                ))
            }
            Some(_) => {}
        }
    }
    for constant in net.constants.values() {
        if let Some(value) = &constant.value {
            if !constant.kind.admits(value) {
                out.push(Diagnostic::error(
                    Location::item(&constant.name),
                    &constant.loc,
                    format!(
                        "value {} is not {}",
                        super::format_rational(value),
                        constant.kind.describe_range()
                    ),
                ));
            }
        }
    }
}

fn check_horizon(net: &Network, out: &mut Vec<Diagnostic>) {
    match &net.horizon {
        None => out.push(Diagnostic::error(
            Location::default(),
            &Loc::NONE,
            "no tick horizon declared",
        )),
        Some(name) => match net.constants.get(name) {
            None => out.push(Diagnostic::error(
                Location::item(name),
                &net.horizon_loc,
                format!("horizon refers to unknown constant `{name}`"),
            )),
            Some(c) if c.kind != super::ConstantKind::Count => out.push(Diagnostic::error(
                Location::item(name),
                &net.horizon_loc,
                format!("horizon constant `{name}` must have kind count"),
            )),
            Some(_) => {}
        },
    }
}

fn check_machine(
    net: &Network,
    machine: &super::MachineDef,
    bound: &BTreeMap<String, Rational>,
    out: &mut Vec<Diagnostic>,
) {
    let here = || Location::machine(&machine.name);
    if machine.states.is_empty() {
        out.push(Diagnostic::error(here(), &machine.loc, "machine has no states"));
    }
    let mut names = BTreeSet::new();
    for state in &machine.states {
        if !names.insert(state.name.as_str()) {
            out.push(Diagnostic::error(
                here().with_state(&state.name),
                &state.loc,
                "duplicate state name",
            ));
        }
    }
    if machine.state_index(&machine.initial).is_none() {
        out.push(Diagnostic::error(
            here(),
            &machine.loc,
            format!("initial state `{}` is not declared", machine.initial),
        ));
    }

    for (index, transition) in machine.transitions.iter().enumerate() {
        let at = || here().with_state(&transition.source).with_transition(index);
        match machine.states.iter().find(|s| s.name == transition.source) {
            None => out.push(Diagnostic::error(
                at(),
                &transition.loc,
                format!("unknown source state `{}`", transition.source),
            )),
            Some(state) if state.is_final => out.push(Diagnostic::error(
                at(),
                &transition.loc,
                "final state has an outgoing transition",
            )),
            Some(_) => {}
        }
        check_atoms(net, &transition.guard, &at(), &transition.loc, out);
        if transition.branches.is_empty() {
            out.push(Diagnostic::error(at(), &transition.loc, "transition has no branches"));
        }
        let mut weights = Vec::new();
        for branch in &transition.branches {
            if machine.state_index(&branch.target).is_none() {
                out.push(Diagnostic::error(
                    at(),
                    &branch.loc,
                    format!("unknown target state `{}`", branch.target),
                ));
            }
            let mut updated = BTreeSet::new();
            for update in &branch.updates {
                if !updated.insert(update.var.as_str()) {
                    out.push(Diagnostic::error(
                        at(),
                        &branch.loc,
                        format!("variable `{}` assigned twice in one branch", update.var),
                    ));
                }
                match net.var_domain(&update.var) {
                    None => out.push(Diagnostic::error(
                        at(),
                        &branch.loc,
                        format!("unknown shared variable `{}`", update.var),
                    )),
                    Some(domain) if domain.position(&update.value).is_none() => {
                        out.push(Diagnostic::error(
                            at(),
                            &branch.loc,
                            format!(
                                "value `{}` is not in the domain of `{}`",
                                update.value, update.var
                            ),
                        ))
                    }
                    Some(_) => {}
                }
            }
            weights.push(check_weight(net, &branch.weight, bound, &at(), &branch.loc, out));
        }
        if let Some(weights) = weights.into_iter().collect::<Option<Vec<_>>>() {
            let sum: Rational = weights.iter().sum();
            let deviation = (sum.clone() - Rational::one()).abs();
            if super::rational_to_f64(&deviation) > WEIGHT_TOLERANCE {
                out.push(Diagnostic::error(
                    at(),
                    &transition.loc,
                    format!("branch weights sum to {}", super::format_rational(&sum)),
                ));
            }
        }
    }
    check_exclusivity(net, machine, out);
}

fn check_atoms(
    net: &Network,
    guard: &GuardExpr,
    at: &Location,
    loc: &Loc,
    out: &mut Vec<Diagnostic>,
) {
    for (var, value) in guard.atoms() {
        match net.var_domain(var) {
            None => out.push(Diagnostic::error(
                at.clone(),
                loc,
                format!("guard refers to unknown shared variable `{var}`"),
            )),
            Some(domain) if domain.position(value).is_none() => out.push(Diagnostic::error(
                at.clone(),
                loc,
                format!("guard value `{value}` is not in the domain of `{var}`"),
            )),
            Some(_) => {}
        }
    }
}

/// Returns the evaluated weight when every constant is bound and the
/// expression is well defined.
fn check_weight(
    net: &Network,
    weight: &ProbExpr,
    bound: &BTreeMap<String, Rational>,
    at: &Location,
    loc: &Loc,
    out: &mut Vec<Diagnostic>,
) -> Option<Rational> {
    let mut complete = true;
    for name in weight.constants() {
        if !net.constants.contains_key(name) {
            out.push(Diagnostic::error(
                at.clone(),
                loc,
                format!("weight refers to unknown constant `{name}`"),
            ));
            complete = false;
        } else if !bound.contains_key(name) {
            complete = false;
        }
    }
    if !complete {
        return None;
    }
    match weight.evaluate(bound) {
        Ok(value) => {
            let tol = super::parse_decimal("1e-9").expect("literal");
            if value < -tol.clone() || value > Rational::one() + tol {
                out.push(Diagnostic::error(
                    at.clone(),
                    loc,
                    format!(
                        "branch weight `{weight}` evaluates to {}, outside [0, 1]",
                        super::format_rational(&value)
                    ),
                ));
            }
            Some(value)
        }
        Err(err) => {
            out.push(Diagnostic::error(
                at.clone(),
                loc,
                format!("branch weight `{weight}`: {err}"),
            ));
            None
        }
    }
}

/// For each state, enumerate every valuation of the variables its guards
/// mention and require that at most one guard holds.
fn check_exclusivity(net: &Network, machine: &super::MachineDef, out: &mut Vec<Diagnostic>) {
    for state in &machine.states {
        let outgoing: Vec<(usize, &super::Transition)> = machine
            .transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.source == state.name)
            .collect();
        if outgoing.len() < 2 {
            continue;
        }
        let mut vars: Vec<&str> = outgoing
            .iter()
            .flat_map(|(_, t)| t.guard.atoms())
            .map(|(var, _)| var)
            .collect();
        vars.sort_unstable();
        vars.dedup();
        let Some(domains) = vars
            .iter()
            .map(|v| net.var_domain(v).map(|d| &d.values))
            .collect::<Option<Vec<_>>>()
        else {
            // unknown variables are already reported
            continue;
        };
        if domains.iter().any(|d| d.is_empty()) {
            continue;
        }
        let space = domains
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(d.len()));
        if space.is_none_or(|s| s > EXCLUSIVITY_ENUMERATION_LIMIT) {
            out.push(Diagnostic::warning(
                Location::machine(&machine.name).with_state(&state.name),
                &state.loc,
                "guard valuation space too large to check exclusivity",
            ));
            continue;
        }
        let mut digits = vec![0usize; vars.len()];
        'valuations: loop {
            let valuation: BTreeMap<String, String> = vars
                .iter()
                .enumerate()
                .map(|(k, v)| (v.to_string(), domains[k][digits[k]].clone()))
                .collect();
            let enabled: Vec<usize> = outgoing
                .iter()
                .filter(|(_, t)| t.guard.evaluate(&valuation).unwrap_or(false))
                .map(|(i, _)| *i)
                .collect();
            if enabled.len() > 1 {
                let shown: Vec<String> =
                    valuation.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                out.push(Diagnostic::error(
                    Location::machine(&machine.name)
                        .with_state(&state.name)
                        .with_transition(enabled[1]),
                    &machine.transitions[enabled[1]].loc,
                    format!(
                        "guards of transitions #{} and #{} overlap when {}",
                        enabled[0] + 1,
                        enabled[1] + 1,
                        if shown.is_empty() {
                            "always".to_string()
                        } else {
                            shown.join(", ")
                        }
                    ),
                ));
                break 'valuations;
            }
            // odometer increment
            let mut k = 0;
            loop {
                if k == digits.len() {
                    break 'valuations;
                }
                digits[k] += 1;
                if digits[k] < domains[k].len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Branch, ConstantDef, ConstantKind, EnumDomain, MachineDef, ProbExpr, SharedVar,
        Transition,
    };

    fn base() -> Network {
        let mut net = Network::new();
        net.add_domain(EnumDomain::new("Flag", &["off", "on"])).unwrap();
        net.add_var(SharedVar {
            name: "flag".into(),
            domain: "Flag".into(),
            initial: "off".into(),
            loc: Loc::NONE,
        })
        .unwrap();
        net.add_constant(ConstantDef {
            name: "N".into(),
            kind: ConstantKind::Count,
            value: None,
            loc: Loc::NONE,
        })
        .unwrap();
        net.horizon = Some("N".into());
        net
    }

    fn two_machines(second_writes: bool) -> Network {
        let mut net = base();
        net.add_machine(
            MachineDef::new("A", "S")
                .state("S")
                .state("T")
                .transition(Transition::new("S", GuardExpr::True).branch(
                    Branch::new(ProbExpr::one(), "T").set("flag", "on"),
                )),
        )
        .unwrap();
        let mut branch = Branch::new(ProbExpr::one(), "Y");
        if second_writes {
            branch = branch.set("flag", "off");
        }
        net.add_machine(
            MachineDef::new("B", "X")
                .state("X")
                .state("Y")
                .transition(Transition::new("X", GuardExpr::eq("flag", "on")).branch(branch)),
        )
        .unwrap();
        net
    }

    #[test]
    fn well_formed_network_has_empty_report() {
        assert_eq!(validate_network(&two_machines(false)), vec![]);
    }

    #[test]
    fn multiple_writers_are_reported() {
        let report = validate_network(&two_machines(true));
        assert_eq!(report.len(), 1);
        assert!(report[0]
            .message
            .contains("shared variable written by multiple machines"));
    }

    #[test]
    fn weight_sum_is_reported() {
        let mut net = base();
        net.add_machine(
            MachineDef::new("A", "S").state("S").state("T").transition(
                Transition::new("S", GuardExpr::True)
                    .branch(Branch::new(ProbExpr::decimal("0.5"), "S"))
                    .branch(Branch::new(ProbExpr::decimal("0.4"), "T")),
            ),
        )
        .unwrap();
        let report = validate_network(&net);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].message, "branch weights sum to 0.9");
        assert_eq!(report[0].location.machine.as_deref(), Some("A"));
        assert_eq!(report[0].location.transition, Some(0));
    }

    #[test]
    fn overlapping_guards_are_reported() {
        let mut net = base();
        net.add_machine(
            MachineDef::new("A", "S")
                .state("S")
                .transition(
                    Transition::new("S", GuardExpr::eq("flag", "on"))
                        .branch(Branch::new(ProbExpr::one(), "S")),
                )
                .transition(
                    Transition::new("S", GuardExpr::ne("flag", "off"))
                        .branch(Branch::new(ProbExpr::one(), "S")),
                ),
        )
        .unwrap();
        let report = validate_network(&net);
        assert_eq!(report.len(), 1, "{report:?}");
        assert!(report[0].message.contains("overlap when flag = on"));
    }

    #[test]
    fn unknown_references_are_reported() {
        let mut net = base();
        net.add_machine(
            MachineDef::new("A", "Nowhere").state("S").transition(
                Transition::new("S", GuardExpr::eq("flag", "maybe"))
                    .branch(Branch::new(ProbExpr::constant("q"), "Gone").set("ghost", "x")),
            ),
        )
        .unwrap();
        let messages: Vec<String> = validate_network(&net).into_iter().map(|d| d.message).collect();
        assert!(messages.iter().any(|m| m.contains("initial state `Nowhere`")));
        assert!(messages.iter().any(|m| m.contains("guard value `maybe`")));
        assert!(messages.iter().any(|m| m.contains("unknown constant `q`")));
        assert!(messages.iter().any(|m| m.contains("unknown target state `Gone`")));
        assert!(messages.iter().any(|m| m.contains("unknown shared variable `ghost`")));
    }

    #[test]
    fn missing_horizon_is_reported() {
        let mut net = two_machines(false);
        net.horizon = None;
        let report = validate_network(&net);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].message, "no tick horizon declared");
    }
}
