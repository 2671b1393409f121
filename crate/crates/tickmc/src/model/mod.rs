//! In-memory model of tick-synchronized probabilistic state machines.
//!
//! A [`Network`] is the unit of analysis: enum domains, shared variables,
//! constants, a tick horizon and an ordered list of machines. The order of
//! `machines` is the per-tick update order. Validation lives in
//! [`validate`], constant binding and the compiled index form used by the
//! composer and the simulator live in [`bind`].

mod bind;
mod expr;
mod span;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use bind::{
    bind_constants, BindError, CompiledBranch, CompiledGuard, CompiledMachine, CompiledTransition,
    ConcreteNetwork, VarInfo,
};
pub use expr::{
    format_rational, parse_decimal, rational_to_f64, BinOp, CmpOp, EvalError, GuardExpr, ProbExpr,
    Rational,
};
pub use span::{Loc, SourceSpan};
pub use validate::{validate_network, Diagnostic, Location, Severity, WEIGHT_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("duplicate {kind} `{name}`")]
pub struct DuplicateDefinition {
    pub kind: &'static str,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumDomain {
    pub name: String,
    pub values: Vec<String>,
    pub loc: Loc,
}

impl EnumDomain {
    pub fn new(name: impl Into<String>, values: &[&str]) -> Self {
        Self {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
            loc: Loc::NONE,
        }
    }

    pub fn position(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedVar {
    pub name: String,
    pub domain: String,
    pub initial: String,
    pub loc: Loc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstantKind {
    /// A value in `[0, 1]`.
    Probability,
    /// A non-negative integer, e.g. a tick horizon.
    Count,
    /// A non-negative rational, e.g. a sojourn ratio.
    Ratio,
}

impl ConstantKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ConstantKind::Probability => "probability",
            ConstantKind::Count => "count",
            ConstantKind::Ratio => "ratio",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        match word {
            "probability" => Some(ConstantKind::Probability),
            "count" => Some(ConstantKind::Count),
            "ratio" => Some(ConstantKind::Ratio),
            _ => None,
        }
    }

    /// Whether `value` is admissible for this kind.
    pub fn admits(self, value: &Rational) -> bool {
        use num_traits::{One, Signed};
        match self {
            ConstantKind::Probability => !value.is_negative() && *value <= Rational::one(),
            ConstantKind::Count => !value.is_negative() && value.is_integer(),
            ConstantKind::Ratio => !value.is_negative(),
        }
    }

    fn describe_range(self) -> &'static str {
        match self {
            ConstantKind::Probability => "a probability in [0, 1]",
            ConstantKind::Count => "a non-negative integer",
            ConstantKind::Ratio => "a non-negative number",
        }
    }
}

impl fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantDef {
    pub name: String,
    pub kind: ConstantKind,
    /// `None` while the constant is open.
    pub value: Option<Rational>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Update {
    pub var: String,
    pub value: String,
}

/// One outcome of a probabilistic junction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub weight: ProbExpr,
    pub target: String,
    pub updates: Vec<Update>,
    pub loc: Loc,
}

impl Branch {
    pub fn new(weight: ProbExpr, target: impl Into<String>) -> Self {
        Self {
            weight,
            target: target.into(),
            updates: Vec::new(),
            loc: Loc::NONE,
        }
    }

    pub fn set(mut self, var: impl Into<String>, value: impl Into<String>) -> Self {
        self.updates.push(Update {
            var: var.into(),
            value: value.into(),
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: String,
    pub guard: GuardExpr,
    pub branches: Vec<Branch>,
    pub loc: Loc,
}

impl Transition {
    pub fn new(source: impl Into<String>, guard: GuardExpr) -> Self {
        Self {
            source: source.into(),
            guard,
            branches: Vec::new(),
            loc: Loc::NONE,
        }
    }

    pub fn branch(mut self, branch: Branch) -> Self {
        self.branches.push(branch);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDef {
    pub name: String,
    /// A final state accepts no further ticks; a network with a machine in a
    /// final state deadlocks until the horizon.
    pub is_final: bool,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineDef {
    pub name: String,
    pub initial: String,
    pub states: Vec<StateDef>,
    pub transitions: Vec<Transition>,
    pub loc: Loc,
}

impl MachineDef {
    pub fn new(name: impl Into<String>, initial: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            initial: initial.into(),
            states: Vec::new(),
            transitions: Vec::new(),
            loc: Loc::NONE,
        }
    }

    pub fn state(mut self, name: impl Into<String>) -> Self {
        self.states.push(StateDef {
            name: name.into(),
            is_final: false,
            loc: Loc::NONE,
        });
        self
    }

    pub fn final_state(mut self, name: impl Into<String>) -> Self {
        self.states.push(StateDef {
            name: name.into(),
            is_final: true,
            loc: Loc::NONE,
        });
        self
    }

    pub fn transition(mut self, transition: Transition) -> Self {
        self.transitions.push(transition);
        self
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    /// Shared variables updated by any branch of this machine.
    pub fn writes(&self) -> BTreeSet<&str> {
        self.transitions
            .iter()
            .flat_map(|t| &t.branches)
            .flat_map(|b| &b.updates)
            .map(|u| u.var.as_str())
            .collect()
    }
}

/// A set of machines sharing enum variables and constants, advanced in
/// lock-step by a built-in tick counter bounded by `horizon`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Network {
    pub domains: BTreeMap<String, EnumDomain>,
    pub vars: BTreeMap<String, SharedVar>,
    pub constants: BTreeMap<String, ConstantDef>,
    /// Name of the count constant bounding `ticks`.
    pub horizon: Option<String>,
    pub horizon_loc: Loc,
    pub machines: Vec<MachineDef>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_domain(&mut self, domain: EnumDomain) -> Result<(), DuplicateDefinition> {
        insert_unique(&mut self.domains, domain.name.clone(), domain, "domain")
    }

    pub fn add_var(&mut self, var: SharedVar) -> Result<(), DuplicateDefinition> {
        insert_unique(&mut self.vars, var.name.clone(), var, "shared variable")
    }

    pub fn add_constant(&mut self, constant: ConstantDef) -> Result<(), DuplicateDefinition> {
        insert_unique(&mut self.constants, constant.name.clone(), constant, "constant")
    }

    pub fn add_machine(&mut self, machine: MachineDef) -> Result<(), DuplicateDefinition> {
        if self.machine(&machine.name).is_some() {
            return Err(DuplicateDefinition {
                kind: "machine",
                name: machine.name,
            });
        }
        self.machines.push(machine);
        Ok(())
    }

    pub fn machine(&self, name: &str) -> Option<&MachineDef> {
        self.machines.iter().find(|m| m.name == name)
    }

    /// Domain of a shared variable, if both exist.
    pub fn var_domain(&self, var: &str) -> Option<&EnumDomain> {
        self.vars.get(var).and_then(|v| self.domains.get(&v.domain))
    }

    /// Bindings of all constants that currently carry a value.
    pub fn bound_values(&self) -> BTreeMap<String, Rational> {
        self.constants
            .values()
            .filter_map(|c| c.value.clone().map(|v| (c.name.clone(), v)))
            .collect()
    }
}

fn insert_unique<T>(
    map: &mut BTreeMap<String, T>,
    key: String,
    value: T,
    kind: &'static str,
) -> Result<(), DuplicateDefinition> {
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Occupied(e) => Err(DuplicateDefinition {
            kind,
            name: e.key().clone(),
        }),
        Entry::Vacant(e) => {
            e.insert(value);
            Ok(())
        }
    }
}

/// Named binding of open constants, e.g. `C1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScenarioConfig {
    pub name: String,
    pub bindings: BTreeMap<String, Rational>,
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            bindings: BTreeMap::new(),
        }
    }

    pub fn with(mut self, constant: impl Into<String>, value: Rational) -> Self {
        self.bindings.insert(constant.into(), value);
        self
    }

    pub fn with_decimal(self, constant: impl Into<String>, text: &str) -> Self {
        self.with(constant, parse_decimal(text).expect("malformed decimal literal"))
    }
}
