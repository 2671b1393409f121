use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::{
    format_rational, rational_to_f64, validate_network, CmpOp, ConstantKind, Diagnostic,
    GuardExpr, Network, Rational, ScenarioConfig,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BindError {
    #[error("constant `{0}` is not bound by the configuration")]
    Unbound(String),
    #[error("configuration binds unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("constant `{name}` = {value} is out of range for kind {kind}")]
    OutOfRange {
        name: String,
        value: String,
        kind: ConstantKind,
    },
    #[error("horizon {0} does not fit the tick counter")]
    HorizonTooLarge(String),
    #[error("network is invalid: {}", first_error(.0))]
    Invalid(Vec<Diagnostic>),
}

fn first_error(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .find(|d| d.is_error())
        .map(|d| d.to_string())
        .unwrap_or_default()
}

/// Shared variable as seen by the analysis layers: values are indices into
/// `values`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub values: Vec<String>,
    pub initial: u16,
}

impl VarInfo {
    pub fn value_index(&self, value: &str) -> Option<u16> {
        self.values.iter().position(|v| v == value).map(|i| i as u16)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompiledGuard {
    True,
    Eq(usize, u16),
    Ne(usize, u16),
    Not(Box<CompiledGuard>),
    And(Box<CompiledGuard>, Box<CompiledGuard>),
    Or(Box<CompiledGuard>, Box<CompiledGuard>),
}

impl CompiledGuard {
    pub fn holds(&self, valuation: &[u16]) -> bool {
        match self {
            CompiledGuard::True => true,
            CompiledGuard::Eq(var, value) => valuation[*var] == *value,
            CompiledGuard::Ne(var, value) => valuation[*var] != *value,
            CompiledGuard::Not(inner) => !inner.holds(valuation),
            CompiledGuard::And(lhs, rhs) => lhs.holds(valuation) && rhs.holds(valuation),
            CompiledGuard::Or(lhs, rhs) => lhs.holds(valuation) || rhs.holds(valuation),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledBranch {
    pub probability: f64,
    pub exact: Rational,
    pub target: u16,
    pub updates: Vec<(usize, u16)>,
}

impl CompiledBranch {
    pub fn apply(&self, valuation: &mut [u16]) {
        for &(var, value) in &self.updates {
            valuation[var] = value;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledTransition {
    pub guard: CompiledGuard,
    /// Only branches with positive weight are kept.
    pub branches: Vec<CompiledBranch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledMachine {
    pub name: String,
    pub states: Vec<String>,
    pub is_final: Vec<bool>,
    pub initial: u16,
    /// Outgoing transitions indexed by source state.
    pub outgoing: Vec<Vec<CompiledTransition>>,
}

impl CompiledMachine {
    /// The transition enabled in `state` under `valuation`, or `None` when
    /// the machine idles this tick. Validation guarantees at most one.
    pub fn enabled(&self, state: u16, valuation: &[u16]) -> Option<&CompiledTransition> {
        self.outgoing[state as usize]
            .iter()
            .find(|t| t.guard.holds(valuation))
    }

    pub fn state_index(&self, name: &str) -> Option<u16> {
        self.states.iter().position(|s| s == name).map(|i| i as u16)
    }
}

/// A validated network with every constant resolved, plus an index-based
/// form of its machines for fast stepping.
#[derive(Debug, Clone)]
pub struct ConcreteNetwork {
    network: Network,
    config: String,
    horizon: u32,
    vars: Vec<VarInfo>,
    machines: Vec<CompiledMachine>,
}

impl PartialEq for ConcreteNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.network == other.network
            && self.config == other.config
            && self.horizon == other.horizon
    }
}

impl ConcreteNetwork {
    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn config_name(&self) -> &str {
        &self.config
    }

    /// Value of the horizon constant.
    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn machines(&self) -> &[CompiledMachine] {
        &self.machines
    }

    pub fn constant(&self, name: &str) -> Option<&Rational> {
        self.network.constants.get(name)?.value.as_ref()
    }

    pub fn initial_locals(&self) -> Vec<u16> {
        self.machines.iter().map(|m| m.initial).collect()
    }

    pub fn initial_valuation(&self) -> Vec<u16> {
        self.vars.iter().map(|v| v.initial).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Same network with a different horizon value; other bindings kept.
    pub fn with_horizon(&self, horizon: u32) -> Result<ConcreteNetwork, BindError> {
        let name = self
            .network
            .horizon
            .clone()
            .expect("validated network has a horizon");
        let cfg = ScenarioConfig {
            name: self.config.clone(),
            bindings: BTreeMap::from([(name, Rational::from_integer(horizon.into()))]),
        };
        bind_constants(&self.network, &cfg)
    }
}

/// Resolves every open constant of `net` with the values from `cfg`.
///
/// Bindings in `cfg` override values already present in the network, so
/// binding a concrete network again with the same configuration is a no-op.
pub fn bind_constants(net: &Network, cfg: &ScenarioConfig) -> Result<ConcreteNetwork, BindError> {
    let mut bound = net.clone();
    for (name, value) in &cfg.bindings {
        let constant = bound
            .constants
            .get_mut(name)
            .ok_or_else(|| BindError::UnknownConstant(name.clone()))?;
        if !constant.kind.admits(value) {
            return Err(BindError::OutOfRange {
                name: name.clone(),
                value: format_rational(value),
                kind: constant.kind,
            });
        }
        constant.value = Some(value.clone());
    }
    if let Some(open) = bound.constants.values().find(|c| c.value.is_none()) {
        return Err(BindError::Unbound(open.name.clone()));
    }
    let diagnostics = validate_network(&bound);
    if diagnostics.iter().any(Diagnostic::is_error) {
        return Err(BindError::Invalid(diagnostics));
    }
    let horizon_value = bound
        .horizon
        .as_ref()
        .and_then(|h| bound.constants.get(h))
        .and_then(|c| c.value.clone())
        .expect("validated horizon is bound");
    let horizon = horizon_value
        .to_integer()
        .to_u32()
        .filter(|&h| h < u32::MAX)
        .ok_or_else(|| BindError::HorizonTooLarge(format_rational(&horizon_value)))?;
    let (vars, machines) = compile(&bound);
    Ok(ConcreteNetwork {
        network: bound,
        config: cfg.name.clone(),
        horizon,
        vars,
        machines,
    })
}

fn compile(net: &Network) -> (Vec<VarInfo>, Vec<CompiledMachine>) {
    let vars: Vec<VarInfo> = net
        .vars
        .values()
        .map(|v| {
            let domain = &net.domains[&v.domain];
            VarInfo {
                name: v.name.clone(),
                values: domain.values.clone(),
                initial: domain.position(&v.initial).expect("validated") as u16,
            }
        })
        .collect();
    let var_index = |name: &str| vars.iter().position(|v| v.name == name).expect("validated");
    let value_index =
        |var: usize, value: &str| vars[var].value_index(value).expect("validated");
    let bindings = net.bound_values();

    let machines = net
        .machines
        .iter()
        .map(|m| {
            let mut outgoing = vec![Vec::new(); m.states.len()];
            for t in &m.transitions {
                let source = m.state_index(&t.source).expect("validated");
                let branches = t
                    .branches
                    .iter()
                    .filter_map(|b| {
                        let exact = b.weight.evaluate(&bindings).expect("validated");
                        if exact.is_zero() {
                            return None;
                        }
                        Some(CompiledBranch {
                            probability: rational_to_f64(&exact),
                            exact,
                            target: m.state_index(&b.target).expect("validated") as u16,
                            updates: b
                                .updates
                                .iter()
                                .map(|u| {
                                    let var = var_index(&u.var);
                                    (var, value_index(var, &u.value))
                                })
                                .collect(),
                        })
                    })
                    .collect();
                outgoing[source].push(CompiledTransition {
                    guard: compile_guard(&t.guard, &var_index, &value_index),
                    branches,
                });
            }
            CompiledMachine {
                name: m.name.clone(),
                states: m.states.iter().map(|s| s.name.clone()).collect(),
                is_final: m.states.iter().map(|s| s.is_final).collect(),
                initial: m.state_index(&m.initial).expect("validated") as u16,
                outgoing,
            }
        })
        .collect();
    (vars, machines)
}

fn compile_guard(
    guard: &GuardExpr,
    var_index: &dyn Fn(&str) -> usize,
    value_index: &dyn Fn(usize, &str) -> u16,
) -> CompiledGuard {
    let rec = |g: &GuardExpr| Box::new(compile_guard(g, var_index, value_index));
    match guard {
        GuardExpr::True => CompiledGuard::True,
        GuardExpr::Atom { var, op, value } => {
            let var = var_index(var);
            let value = value_index(var, value);
            match op {
                CmpOp::Eq => CompiledGuard::Eq(var, value),
                CmpOp::Ne => CompiledGuard::Ne(var, value),
            }
        }
        GuardExpr::Not(inner) => CompiledGuard::Not(rec(inner)),
        GuardExpr::And(lhs, rhs) => CompiledGuard::And(rec(lhs), rec(rhs)),
        GuardExpr::Or(lhs, rhs) => CompiledGuard::Or(rec(lhs), rec(rhs)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        parse_decimal, Branch, ConstantDef, EnumDomain, Loc, MachineDef, ProbExpr, SharedVar,
        Transition,
    };

    fn coin() -> Network {
        let mut net = Network::new();
        net.add_domain(EnumDomain::new("Side", &["none", "heads", "tails"]))
            .unwrap();
        net.add_var(SharedVar {
            name: "side".into(),
            domain: "Side".into(),
            initial: "none".into(),
            loc: Loc::NONE,
        })
        .unwrap();
        for (name, kind) in [("p", ConstantKind::Probability), ("N", ConstantKind::Count)] {
            net.add_constant(ConstantDef {
                name: name.into(),
                kind,
                value: None,
                loc: Loc::NONE,
            })
            .unwrap();
        }
        net.horizon = Some("N".into());
        net.add_machine(
            MachineDef::new("Coin", "Up")
                .state("Up")
                .state("Down")
                .transition(
                    Transition::new("Up", GuardExpr::True)
                        .branch(Branch::new(ProbExpr::constant("p"), "Down").set("side", "heads"))
                        .branch(
                            Branch::new(ProbExpr::constant("p").complement(), "Down")
                                .set("side", "tails"),
                        ),
                ),
        )
        .unwrap();
        net
    }

    fn cfg(p: &str, n: &str) -> ScenarioConfig {
        ScenarioConfig::new("C")
            .with_decimal("p", p)
            .with_decimal("N", n)
    }

    #[test]
    fn binds_and_compiles() {
        let concrete = bind_constants(&coin(), &cfg("0.25", "3")).unwrap();
        assert_eq!(concrete.horizon(), 3);
        let coin = &concrete.machines()[0];
        let t = coin.enabled(0, &concrete.initial_valuation()).unwrap();
        assert_eq!(t.branches.len(), 2);
        assert_eq!(t.branches[1].exact, parse_decimal("0.75").unwrap());
        assert!(coin.enabled(1, &[0]).is_none());
    }

    #[test]
    fn zero_weight_branches_are_dropped() {
        let concrete = bind_constants(&coin(), &cfg("1", "3")).unwrap();
        assert_eq!(concrete.machines()[0].outgoing[0][0].branches.len(), 1);
    }

    #[test]
    fn missing_binding_is_named() {
        let cfg = ScenarioConfig::new("C").with_decimal("N", "3");
        assert_eq!(
            bind_constants(&coin(), &cfg),
            Err(BindError::Unbound("p".into()))
        );
    }

    #[test]
    fn out_of_range_probability() {
        let err = bind_constants(&coin(), &cfg("1.3", "3")).unwrap_err();
        assert!(matches!(err, BindError::OutOfRange { ref name, .. } if name == "p"));
        let err = bind_constants(&coin(), &cfg("0.5", "2.5")).unwrap_err();
        assert!(matches!(err, BindError::OutOfRange { ref name, .. } if name == "N"));
    }

    #[test]
    fn unknown_binding_is_rejected() {
        let cfg = cfg("0.5", "1").with_decimal("q", "0.1");
        assert_eq!(
            bind_constants(&coin(), &cfg),
            Err(BindError::UnknownConstant("q".into()))
        );
    }

    #[test]
    fn binding_is_idempotent() {
        let cfg = cfg("0.3", "4");
        let once = bind_constants(&coin(), &cfg).unwrap();
        let twice = bind_constants(once.network(), &cfg).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.machines(), twice.machines());
    }
}
