use std::fmt;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::model::{CmpOp, Loc, VarInfo};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("predicate refers to unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("predicate refers to unknown value `{value}` of `{var}`")]
    UnknownValue { var: String, value: String },
    #[error("tick bound {t} exceeds the horizon {horizon}")]
    TickOutOfRange { t: u32, horizon: u32 },
    #[error("query `{0}` has an unresolved tick parameter")]
    UnresolvedParameter(String),
    #[error("query `{0}` is not a probability query")]
    NotProbability(String),
}

/// `var == value` or `var != value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarAtom {
    pub var: String,
    pub op: CmpOp,
    pub value: String,
}

/// Conjunction of variable atoms; the empty conjunction is `true`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Predicate {
    pub atoms: Vec<VarAtom>,
}

impl Predicate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn eq(mut self, var: impl Into<String>, value: impl Into<String>) -> Self {
        self.atoms.push(VarAtom {
            var: var.into(),
            op: CmpOp::Eq,
            value: value.into(),
        });
        self
    }

    pub fn ne(mut self, var: impl Into<String>, value: impl Into<String>) -> Self {
        self.atoms.push(VarAtom {
            var: var.into(),
            op: CmpOp::Ne,
            value: value.into(),
        });
        self
    }

    /// Resolves names against a variable table.
    pub fn resolve(&self, vars: &[VarInfo]) -> Result<ResolvedPredicate, QueryError> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let index = vars
                    .iter()
                    .position(|v| v.name == a.var)
                    .ok_or_else(|| QueryError::UnknownVariable(a.var.clone()))?;
                let value =
                    vars[index]
                        .value_index(&a.value)
                        .ok_or_else(|| QueryError::UnknownValue {
                            var: a.var.clone(),
                            value: a.value.clone(),
                        })?;
                Ok((index, a.op == CmpOp::Eq, value))
            })
            .collect::<Result<_, _>>()?;
        Ok(ResolvedPredicate { atoms })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" /\\ ")?;
            }
            write!(f, "{}{}{}", a.var, a.op.symbol(), a.value)?;
        }
        Ok(())
    }
}

/// Predicate with variable and value names replaced by indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedPredicate {
    atoms: Vec<(usize, bool, u16)>,
}

impl ResolvedPredicate {
    pub fn holds(&self, valuation: &[u16]) -> bool {
        self.atoms
            .iter()
            .all(|&(var, eq, value)| (valuation[var] == value) == eq)
    }

    /// Whether the predicate is unsatisfiable on its face (two equalities
    /// on the same variable with different values).
    pub fn is_contradictory(&self) -> bool {
        self.atoms.iter().any(|&(v1, eq1, x1)| {
            self.atoms
                .iter()
                .any(|&(v2, eq2, x2)| v1 == v2 && ((eq1 && eq2 && x1 != x2) || (eq1 != eq2 && x1 == x2)))
        })
    }
}

/// A tick bound: the sweep parameter `t` or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TickBound {
    Param,
    At(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TickMode {
    /// Target holds with `ticks == t`.
    Exact(TickBound),
    /// Target holds with `ticks <= t`.
    Cumulative(TickBound),
    /// No tick atom: target holds at any tick up to the horizon.
    Unbounded,
}

impl TickMode {
    pub fn bound(self) -> Option<TickBound> {
        match self {
            TickMode::Exact(b) | TickMode::Cumulative(b) => Some(b),
            TickMode::Unbounded => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TickMode::Exact(_) => "exact",
            TickMode::Cumulative(_) => "cumulative",
            TickMode::Unbounded => "unbounded",
        }
    }

    /// Same mode with its bound replaced.
    pub fn with_bound(self, bound: TickBound) -> Self {
        match self {
            TickMode::Exact(_) => TickMode::Exact(bound),
            TickMode::Cumulative(_) => TickMode::Cumulative(bound),
            TickMode::Unbounded => TickMode::Unbounded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryKind {
    /// `P=? [F (predicate ∧ tick condition)]`
    Probability { predicate: Predicate, ticks: TickMode },
    /// `¬E [F "deadlock"]`
    DeadlockFreedom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub id: String,
    pub config: String,
    pub kind: QueryKind,
    /// Values of `t` to evaluate when the tick bound is the parameter.
    pub sweep: Option<RangeInclusive<u32>>,
    pub loc: Loc,
}

impl Query {
    pub fn probability(
        id: impl Into<String>,
        config: impl Into<String>,
        predicate: Predicate,
        ticks: TickMode,
    ) -> Self {
        Self {
            id: id.into(),
            config: config.into(),
            kind: QueryKind::Probability { predicate, ticks },
            sweep: None,
            loc: Loc::NONE,
        }
    }

    pub fn deadlock_freedom(id: impl Into<String>, config: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            config: config.into(),
            kind: QueryKind::DeadlockFreedom,
            sweep: None,
            loc: Loc::NONE,
        }
    }

    pub fn with_sweep(mut self, range: RangeInclusive<u32>) -> Self {
        self.sweep = Some(range);
        self
    }

    pub fn tick_mode(&self) -> Option<TickMode> {
        match &self.kind {
            QueryKind::Probability { ticks, .. } => Some(*ticks),
            QueryKind::DeadlockFreedom => None,
        }
    }

    /// Copy of this query with the tick parameter fixed to `t`.
    pub fn at(&self, t: u32) -> Query {
        let mut q = self.clone();
        if let QueryKind::Probability { ticks, .. } = &mut q.kind {
            if ticks.bound() == Some(TickBound::Param) {
                *ticks = ticks.with_bound(TickBound::At(t));
            }
        }
        q.sweep = None;
        q
    }

    /// Copy of this query evaluated in `mode` ("exact" or "cumulative"),
    /// keeping its bound.
    pub fn with_mode(&self, cumulative: bool) -> Query {
        let mut q = self.clone();
        if let QueryKind::Probability { ticks, .. } = &mut q.kind {
            if let Some(bound) = ticks.bound() {
                *ticks = if cumulative {
                    TickMode::Cumulative(bound)
                } else {
                    TickMode::Exact(bound)
                };
            }
        }
        q
    }
}
