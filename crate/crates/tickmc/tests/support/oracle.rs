//! Brute-force reference: enumerates every tick-bounded path of a network
//! straight from its definition, with exact rational weights.
//!
//! Only the model types are shared with the library; binding, composition
//! and analysis are all redone here by name.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use tickmc::model::{CmpOp, GuardExpr, Network, ScenarioConfig};

pub type Valuation = BTreeMap<String, String>;

/// Path sums per tick for one target predicate.
#[derive(Debug, Clone)]
pub struct PathSums {
    /// Mass of paths whose state at tick `k` satisfies the target.
    pub exact: Vec<BigRational>,
    /// Mass of paths that first satisfy the target at tick `k`.
    pub first_hit: Vec<BigRational>,
    /// Mass of paths that end in a deadlock before the horizon.
    pub deadlocked: BigRational,
    pub paths: usize,
}

impl PathSums {
    pub fn exact_f64(&self, t: usize) -> f64 {
        self.exact[t].to_f64().unwrap()
    }

    pub fn cumulative_f64(&self, t: usize) -> f64 {
        let sum: BigRational = self.first_hit[..=t].iter().cloned().sum();
        sum.to_f64().unwrap()
    }
}

struct Walker<'a> {
    net: &'a Network,
    constants: BTreeMap<String, BigRational>,
    horizon: usize,
    target: &'a dyn Fn(&Valuation) -> bool,
    sums: PathSums,
}

pub fn enumerate(
    net: &Network,
    cfg: &ScenarioConfig,
    horizon: usize,
    target: &dyn Fn(&Valuation) -> bool,
) -> PathSums {
    let mut constants = net.bound_values();
    constants.extend(cfg.bindings.clone());
    let zero = vec![BigRational::zero(); horizon + 1];
    let mut walker = Walker {
        net,
        constants,
        horizon,
        target,
        sums: PathSums {
            exact: zero.clone(),
            first_hit: zero,
            deadlocked: BigRational::zero(),
            paths: 0,
        },
    };
    let locals: Vec<String> = net.machines.iter().map(|m| m.initial.clone()).collect();
    let vals: Valuation = net
        .vars
        .values()
        .map(|v| (v.name.clone(), v.initial.clone()))
        .collect();
    walker.visit(&locals, &vals, BigRational::from_integer(1.into()), 0, false);
    walker.sums
}

impl Walker<'_> {
    fn visit(&mut self, locals: &[String], vals: &Valuation, p: BigRational, tick: usize, hit: bool) {
        let holds = (self.target)(vals);
        if holds {
            self.sums.exact[tick] += &p;
            if !hit {
                self.sums.first_hit[tick] += &p;
            }
        }
        let hit = hit || holds;
        if tick == self.horizon {
            self.sums.paths += 1;
            return;
        }
        let stuck = self.net.machines.iter().zip(locals).any(|(m, l)| {
            m.states.iter().any(|s| &s.name == l && s.is_final)
        });
        if stuck {
            self.sums.paths += 1;
            self.sums.deadlocked += &p;
            return;
        }
        let mut outcomes = Vec::new();
        self.tick(0, locals.to_vec(), vals.clone(), p, &mut outcomes);
        for (l, v, q) in outcomes {
            self.visit(&l, &v, q, tick + 1, hit);
        }
    }

    /// Expands machine `k` onward within one tick.
    fn tick(
        &self,
        k: usize,
        locals: Vec<String>,
        vals: Valuation,
        p: BigRational,
        out: &mut Vec<(Vec<String>, Valuation, BigRational)>,
    ) {
        let Some(machine) = self.net.machines.get(k) else {
            out.push((locals, vals, p));
            return;
        };
        let enabled: Vec<_> = machine
            .transitions
            .iter()
            .filter(|t| t.source == locals[k] && guard(&t.guard, &vals))
            .collect();
        assert!(enabled.len() <= 1, "overlapping guards in {}", machine.name);
        let Some(t) = enabled.first() else {
            return self.tick(k + 1, locals, vals, p, out);
        };
        for b in &t.branches {
            let w = b.weight.evaluate(&self.constants).unwrap();
            if w.is_zero() {
                continue;
            }
            let mut l = locals.clone();
            l[k] = b.target.clone();
            let mut v = vals.clone();
            for u in &b.updates {
                v.insert(u.var.clone(), u.value.clone());
            }
            self.tick(k + 1, l, v, &p * &w, out);
        }
    }
}

fn guard(g: &GuardExpr, vals: &Valuation) -> bool {
    match g {
        GuardExpr::True => true,
        GuardExpr::Atom { var, op, value } => (&vals[var] == value) == (*op == CmpOp::Eq),
        GuardExpr::Not(inner) => !guard(inner, vals),
        GuardExpr::And(a, b) => guard(a, vals) && guard(b, vals),
        GuardExpr::Or(a, b) => guard(a, vals) || guard(b, vals),
    }
}
