//! Exact analysis of a composed chain.
//!
//! Probabilities are computed by forward propagation of the initial mass.
//! Every non-done transition increments `ticks`, so after `t` steps all
//! live mass sits in tick layer `t` and bounded reachability is exact after
//! at most the horizon. Deadlocked states keep their mass.

mod query;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::composer::{compose_with, ComposeError, ComposeOptions, SparseDtmc};
use crate::model::{BindError, ConcreteNetwork};
use crate::numeric::KahanSum;

pub use query::*;

/// Probabilities this far outside `[0, 1]` are internal errors rather
/// than rounding noise.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error("step {t} exceeds the horizon {horizon}")]
    StepOutOfRange { t: u32, horizon: u32 },
    #[error("internal error: probability {0} lies outside [0, 1]")]
    ProbabilityOutOfRange(f64),
}

/// One point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub t: u32,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryResult {
    pub property: String,
    pub config: String,
    pub points: Vec<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deadlock_free: Option<bool>,
    pub state_count: usize,
    pub wall_time_ms: u64,
}

/// Distribution over states after `t` steps, starting with unit mass on
/// the initial state.
pub fn transient_distribution(dtmc: &SparseDtmc, t: u32) -> Result<Vec<f64>, EngineError> {
    if t > dtmc.horizon() {
        return Err(EngineError::StepOutOfRange {
            t,
            horizon: dtmc.horizon(),
        });
    }
    let mut dist = vec![0.0; dtmc.state_count()];
    dist[dtmc.initial()] = 1.0;
    for _ in 0..t {
        dist = step(dtmc, &dist, |_| false);
    }
    Ok(dist)
}

/// One vector-matrix product. Mass on deadlocked states and on states
/// selected by `absorbing` stays put. Incoming mass per state is summed in
/// row order with compensation.
fn step(dtmc: &SparseDtmc, dist: &[f64], absorbing: impl Fn(usize) -> bool) -> Vec<f64> {
    let mut next = vec![KahanSum::new(); dtmc.state_count()];
    for (i, &mass) in dist.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        if absorbing(i) || dtmc.is_deadlock(i) {
            next[i].add(mass);
            continue;
        }
        for (j, p) in dtmc.row(i) {
            next[j].add(mass * p);
        }
    }
    next.into_iter().map(|s| s.value()).collect()
}

/// Probability of visiting a state in `target` within `steps` steps.
///
/// Target states are made absorbing and the mass they hold after `steps`
/// forward steps is summed.
pub fn bounded_reachability(dtmc: &SparseDtmc, target: &[bool], steps: u32) -> f64 {
    if !target.iter().any(|&b| b) {
        return 0.0;
    }
    let mut dist = vec![0.0; dtmc.state_count()];
    dist[dtmc.initial()] = 1.0;
    for _ in 0..steps {
        dist = step(dtmc, &dist, |i| target[i]);
    }
    dist.iter()
        .zip(target)
        .filter(|(_, &t)| t)
        .map(|(&m, _)| m)
        .collect::<KahanSum>()
        .value()
}

/// Reachable states without outgoing transitions, in index order.
pub fn find_deadlocks(dtmc: &SparseDtmc) -> Vec<usize> {
    (0..dtmc.state_count())
        .filter(|&i| dtmc.is_deadlock(i))
        .collect()
}

/// Probability of `predicate` holding at tick `t` (exact) or at some tick
/// up to `t` (cumulative).
pub fn probability(
    dtmc: &SparseDtmc,
    predicate: &Predicate,
    mode: TickMode,
    t: u32,
) -> Result<f64, EngineError> {
    let horizon = dtmc.horizon();
    if t > horizon {
        return Err(QueryError::TickOutOfRange { t, horizon }.into());
    }
    let resolved = predicate.resolve(dtmc.vars())?;
    let target: Vec<bool> = dtmc
        .states()
        .iter()
        .map(|s| {
            let tick_ok = match mode {
                TickMode::Exact(_) => s.ticks == t,
                TickMode::Cumulative(_) | TickMode::Unbounded => s.ticks <= t,
            };
            tick_ok && resolved.holds(&s.valuation)
        })
        .collect();
    clamp(bounded_reachability(dtmc, &target, t))
}

fn clamp(p: f64) -> Result<f64, EngineError> {
    if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&p) || p.is_nan() {
        return Err(EngineError::ProbabilityOutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Tick values a query is evaluated at: the explicit `ts` if given, else
/// its sweep range, else its fixed bound. Unbounded queries use the
/// horizon.
pub fn query_ticks(query: &Query, horizon: u32, ts: Option<&[u32]>) -> Result<Vec<u32>, EngineError> {
    let mode = query
        .tick_mode()
        .ok_or_else(|| QueryError::NotProbability(query.id.clone()))?;
    if let Some(ts) = ts {
        return Ok(ts.to_vec());
    }
    match mode.bound() {
        None => Ok(vec![horizon]),
        Some(TickBound::At(t)) => Ok(vec![t]),
        Some(TickBound::Param) => match &query.sweep {
            Some(range) => Ok(range.clone().collect()),
            None => Err(QueryError::UnresolvedParameter(query.id.clone()).into()),
        },
    }
}

/// Evaluates a query on a composed chain.
///
/// Probability queries produce one point per tick value; sweep points are
/// independent and run in parallel. Deadlock-freedom queries produce no
/// points and set `deadlock_free`.
pub fn eval_query(dtmc: &SparseDtmc, query: &Query, ts: Option<&[u32]>) -> Result<QueryResult, EngineError> {
    let started = Instant::now();
    let (points, deadlock_free) = match &query.kind {
        QueryKind::DeadlockFreedom => (Vec::new(), Some(find_deadlocks(dtmc).is_empty())),
        QueryKind::Probability { predicate, ticks } => {
            let ts = query_ticks(query, dtmc.horizon(), ts)?;
            let points = ts
                .par_iter()
                .map(|&t| {
                    Ok(Point {
                        t,
                        p: probability(dtmc, predicate, *ticks, t)?,
                    })
                })
                .collect::<Result<Vec<_>, EngineError>>()?;
            (points, None)
        }
    };
    Ok(QueryResult {
        property: query.id.clone(),
        config: query.config.clone(),
        points,
        deadlock_free,
        state_count: dtmc.state_count(),
        wall_time_ms: started.elapsed().as_millis() as u64,
    })
}

/// Composes `net` and evaluates `query` on it.
pub fn check(net: &ConcreteNetwork, query: &Query, ts: Option<&[u32]>, options: ComposeOptions) -> Result<QueryResult, EngineError> {
    let started = Instant::now();
    let dtmc = compose_with(net, options)?;
    let mut result = eval_query(&dtmc, query, ts)?;
    result.config = net.config_name().to_string();
    result.wall_time_ms = started.elapsed().as_millis() as u64;
    Ok(result)
}

/// Shortest path of state indices from the initial state to `target`.
pub fn path_to(dtmc: &SparseDtmc, target: usize) -> Option<Vec<usize>> {
    let n = dtmc.state_count();
    let mut parent = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([dtmc.initial()]);
    parent[dtmc.initial()] = dtmc.initial();
    while let Some(i) = queue.pop_front() {
        if i == target {
            let mut path = vec![i];
            let mut cur = i;
            while cur != dtmc.initial() {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for (j, _) in dtmc.row(i) {
            if parent[j] == usize::MAX {
                parent[j] = i;
                queue.push_back(j);
            }
        }
    }
    None
}
