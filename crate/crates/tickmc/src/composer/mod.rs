//! Product construction of a concrete network into an explicit DTMC.
//!
//! One DTMC step is one tick. Within a tick the machines move in network
//! order and each one reads the valuation already updated by the machines
//! before it. The probability of a macro-step is the product of the chosen
//! branch weights. When `ticks` reaches the horizon the state is done and
//! loops on itself with probability 1.

mod dot;
mod json;
mod prism;

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::model::{ConcreteNetwork, VarInfo};
use crate::numeric::KahanSum;

pub use dot::to_dot;
pub use json::{to_json, StateSpaceDump};
pub use prism::to_prism;

/// Default cap on the number of explored states.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;

/// Products below this trigger an underflow warning.
const UNDERFLOW_THRESHOLD: f64 = 1e-300;

/// Allowed deviation of a row sum from 1.
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComposeError {
    #[error("state space exceeds the cap of {cap} states")]
    StateSpaceOverflow { cap: usize },
    #[error("row {state} sums to {sum}, not 1")]
    NotStochastic { state: usize, sum: f64 },
    #[error("transition from state {from} to unknown state {to}")]
    BadIndex { from: usize, to: usize },
    #[error("initial state {0} is out of range")]
    BadInitial(usize),
}

/// Snapshot of the whole network at a tick boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalState {
    /// Local state index per machine, in network order.
    pub locals: Vec<u16>,
    /// Value index per shared variable, in variable order.
    pub valuation: Vec<u16>,
    pub ticks: u32,
    /// `ticks` has reached the horizon; the state is absorbing.
    pub done: bool,
}

/// Names needed to interpret [`GlobalState`] indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineInfo {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComposeOptions {
    pub state_cap: usize,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        Self {
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// Explicit chain in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDtmc {
    machines: Vec<MachineInfo>,
    vars: Vec<VarInfo>,
    horizon: u32,
    states: Vec<GlobalState>,
    initial: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    probs: Vec<f64>,
    labels: BTreeMap<String, Vec<usize>>,
}

impl SparseDtmc {
    /// Builds a chain from explicit rows. Rows must be empty (deadlock) or
    /// sum to 1 within [`ROW_TOLERANCE`].
    pub fn from_rows(
        machines: Vec<MachineInfo>,
        vars: Vec<VarInfo>,
        horizon: u32,
        states: Vec<GlobalState>,
        initial: usize,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self, ComposeError> {
        if initial >= states.len() {
            return Err(ComposeError::BadInitial(initial));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut probs = Vec::new();
        for (from, row) in rows.iter().enumerate() {
            let mut sum = KahanSum::new();
            for &(to, p) in row {
                if to >= states.len() {
                    return Err(ComposeError::BadIndex { from, to });
                }
                cols.push(to as u32);
                probs.push(p);
                sum.add(p);
            }
            if !row.is_empty() && (sum.value() - 1.0).abs() > ROW_TOLERANCE {
                return Err(ComposeError::NotStochastic {
                    state: from,
                    sum: sum.value(),
                });
            }
            row_ptr.push(cols.len());
        }
        row_ptr.resize(states.len() + 1, cols.len());
        let labels = build_labels(&vars, &states, &row_ptr);
        Ok(Self {
            machines,
            vars,
            horizon,
            states,
            initial,
            row_ptr,
            cols,
            probs,
            labels,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.cols.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn state(&self, index: usize) -> &GlobalState {
        &self.states[index]
    }

    pub fn states(&self) -> &[GlobalState] {
        &self.states
    }

    pub fn machines(&self) -> &[MachineInfo] {
        &self.machines
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    /// Outgoing `(target, probability)` pairs of a state.
    pub fn row(&self, index: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[index]..self.row_ptr[index + 1];
        self.cols[range.clone()]
            .iter()
            .zip(&self.probs[range])
            .map(|(&c, &p)| (c as usize, p))
    }

    pub fn is_deadlock(&self, index: usize) -> bool {
        self.row_ptr[index] == self.row_ptr[index + 1]
    }

    /// Label name to state indices. Labels are `var=value` for every
    /// variable atom, plus `deadlock` and `done`.
    pub fn labels(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.labels
    }

    pub fn label(&self, name: &str) -> &[usize] {
        self.labels.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Human-readable `Machine=State, var=value, ticks=k` description.
    pub fn describe_state(&self, index: usize) -> String {
        let s = &self.states[index];
        let mut parts: Vec<String> = self
            .machines
            .iter()
            .zip(&s.locals)
            .map(|(m, &l)| format!("{}={}", m.name, m.states[l as usize]))
            .collect();
        parts.extend(
            self.vars
                .iter()
                .zip(&s.valuation)
                .map(|(v, &x)| format!("{}={}", v.name, v.values[x as usize])),
        );
        parts.push(format!("ticks={}", s.ticks));
        parts.join(", ")
    }
}

fn build_labels(
    vars: &[VarInfo],
    states: &[GlobalState],
    row_ptr: &[usize],
) -> BTreeMap<String, Vec<usize>> {
    let mut labels: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (v, var) in vars.iter().enumerate() {
        for (x, value) in var.values.iter().enumerate() {
            let members = states
                .iter()
                .enumerate()
                .filter(|(_, s)| s.valuation[v] as usize == x)
                .map(|(i, _)| i)
                .collect();
            labels.insert(format!("{}={}", var.name, value), members);
        }
    }
    labels.insert(
        "deadlock".into(),
        (0..states.len())
            .filter(|&i| row_ptr[i] == row_ptr[i + 1])
            .collect(),
    );
    labels.insert(
        "done".into(),
        states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.done)
            .map(|(i, _)| i)
            .collect(),
    );
    labels
}

/// Composes with the default state cap.
pub fn compose(net: &ConcreteNetwork) -> Result<SparseDtmc, ComposeError> {
    compose_with(net, ComposeOptions::default())
}

/// Breadth-first exploration from the initial global state.
///
/// State indices follow discovery order, and successors are discovered in
/// machine order then branch order, so the indexing is a pure function of
/// the network.
pub fn compose_with(net: &ConcreteNetwork, options: ComposeOptions) -> Result<SparseDtmc, ComposeError> {
    let horizon = net.horizon();
    let n_locals = net.machines().len();
    let key_of = |locals: &[u16], valuation: &[u16], ticks: u32| -> Box<[u16]> {
        let mut key = Vec::with_capacity(locals.len() + valuation.len() + 2);
        key.extend_from_slice(locals);
        key.extend_from_slice(valuation);
        key.push((ticks & 0xffff) as u16);
        key.push((ticks >> 16) as u16);
        key.into_boxed_slice()
    };

    let mut index: HashMap<Box<[u16]>, usize> = HashMap::new();
    let mut states: Vec<GlobalState> = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut queue = VecDeque::new();

    let initial = GlobalState {
        locals: net.initial_locals(),
        valuation: net.initial_valuation(),
        ticks: 0,
        done: horizon == 0,
    };
    index.insert(key_of(&initial.locals, &initial.valuation, 0), 0);
    states.push(initial);
    queue.push_back(0usize);

    let mut underflows = 0usize;
    while let Some(current) = queue.pop_front() {
        let state = states[current].clone();
        let row = if state.done {
            vec![(current, 1.0)]
        } else if state
            .locals
            .iter()
            .zip(net.machines())
            .any(|(&l, m)| m.is_final[l as usize])
        {
            Vec::new()
        } else {
            let successors = macro_step(net, &state, &mut underflows);
            let ticks = state.ticks + 1;
            let mut row = Vec::with_capacity(successors.len());
            for (combined, p) in successors {
                let (locals, valuation) = combined.split_at(n_locals);
                let key = key_of(locals, valuation, ticks);
                let target = match index.get(&key) {
                    Some(&i) => i,
                    None => {
                        if states.len() >= options.state_cap {
                            return Err(ComposeError::StateSpaceOverflow {
                                cap: options.state_cap,
                            });
                        }
                        let i = states.len();
                        states.push(GlobalState {
                            locals: locals.to_vec(),
                            valuation: valuation.to_vec(),
                            ticks,
                            done: ticks == horizon,
                        });
                        index.insert(key, i);
                        queue.push_back(i);
                        i
                    }
                };
                row.push((target, p));
            }
            row
        };
        debug_assert_eq!(rows.len(), current);
        rows.push(row);
    }
    if underflows > 0 {
        log::warn!("{underflows} macro-step probabilities fell below {UNDERFLOW_THRESHOLD:e}");
    }
    let machines = net
        .machines()
        .iter()
        .map(|m| MachineInfo {
            name: m.name.clone(),
            states: m.states.clone(),
        })
        .collect();
    SparseDtmc::from_rows(machines, net.vars().to_vec(), horizon, states, 0, rows)
}

/// All outcomes of one tick from `state`, as `(locals ++ valuation, p)`
/// with duplicates merged in first-seen order.
fn macro_step(
    net: &ConcreteNetwork,
    state: &GlobalState,
    underflows: &mut usize,
) -> Vec<(Vec<u16>, f64)> {
    let n_locals = state.locals.len();
    let mut start = state.locals.clone();
    start.extend_from_slice(&state.valuation);
    let mut partial: Vec<(Vec<u16>, f64)> = vec![(start, 1.0)];
    for (k, machine) in net.machines().iter().enumerate() {
        let mut next = Vec::with_capacity(partial.len() * 2);
        for (combined, p) in partial {
            let local = combined[k];
            match machine.enabled(local, &combined[n_locals..]) {
                None => next.push((combined, p)),
                Some(t) => {
                    for branch in &t.branches {
                        let mut succ = combined.clone();
                        succ[k] = branch.target;
                        branch.apply(&mut succ[n_locals..]);
                        next.push((succ, p * branch.probability));
                    }
                }
            }
        }
        partial = next;
    }

    let mut merged: Vec<(Vec<u16>, KahanSum)> = Vec::with_capacity(partial.len());
    let mut seen: HashMap<Vec<u16>, usize> = HashMap::new();
    for (combined, p) in partial {
        if p < UNDERFLOW_THRESHOLD {
            *underflows += 1;
        }
        match seen.get(&combined) {
            Some(&i) => merged[i].1.add(p),
            None => {
                seen.insert(combined.clone(), merged.len());
                let mut sum = KahanSum::new();
                sum.add(p);
                merged.push((combined, sum));
            }
        }
    }
    merged.into_iter().map(|(c, s)| (c, s.value())).collect()
}
