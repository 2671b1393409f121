//! Monte Carlo sampling of a bound network.
//!
//! Traces are drawn straight from the compiled machines, one macro-step per
//! tick, without building the chain. Sample `i` uses its own ChaCha stream
//! `i` under the given seed, so estimates do not depend on how samples are
//! spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::composer::GlobalState;
use crate::engine::{QueryError, QueryKind, TickMode};
use crate::engine::{Predicate, Query, ResolvedPredicate};
use crate::model::ConcreteNetwork;

/// Samples per parallel work item.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("deadlock freedom cannot be estimated by sampling")]
    NotEstimable,
    #[error("at least one sample is required")]
    NoSamples,
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// One sampled trajectory: the state at each tick from 0. A trace that hits
/// a deadlock ends there.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub states: Vec<GlobalState>,
}

impl Trace {
    pub fn deadlocked(&self, horizon: u32) -> bool {
        self.states.last().is_some_and(|s| !s.done && s.ticks < horizon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Estimate {
    pub property: String,
    pub config: String,
    pub t: u32,
    pub p_hat: f64,
    pub std_err: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    fn new(query: &Query, config: &str, t: u32, hits: u64, samples: u64, seed: u64) -> Self {
        let p_hat = hits as f64 / samples as f64;
        Self {
            property: query.id.clone(),
            config: config.to_string(),
            t,
            p_hat,
            std_err: (p_hat * (1.0 - p_hat) / samples as f64).sqrt(),
            samples,
            seed,
        }
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn initial(net: &ConcreteNetwork) -> GlobalState {
    GlobalState {
        locals: net.initial_locals(),
        valuation: net.initial_valuation(),
        ticks: 0,
        done: net.horizon() == 0,
    }
}

/// Advances one tick in place. Returns false, leaving the state untouched,
/// when the state is done or deadlocked.
fn advance(net: &ConcreteNetwork, state: &mut GlobalState, rng: &mut impl Rng) -> bool {
    let machines = net.machines();
    if state.done
        || state
            .locals
            .iter()
            .zip(machines)
            .any(|(&l, m)| m.is_final[l as usize])
    {
        return false;
    }
    for (k, machine) in machines.iter().enumerate() {
        let Some(t) = machine.enabled(state.locals[k], &state.valuation) else {
            continue;
        };
        let branch = if t.branches.len() == 1 {
            &t.branches[0]
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            t.branches
                .iter()
                .find(|b| {
                    acc += b.probability;
                    u < acc
                })
                .unwrap_or_else(|| t.branches.last().expect("transition has a branch"))
        };
        state.locals[k] = branch.target;
        branch.apply(&mut state.valuation);
    }
    state.ticks += 1;
    state.done = state.ticks == net.horizon();
    true
}

/// Samples one trajectory up to the horizon.
pub fn simulate_run(net: &ConcreteNetwork, seed: u64) -> Trace {
    simulate_indexed(net, seed, 0)
}

/// Trajectory of sample `index` under `seed`.
pub fn simulate_indexed(net: &ConcreteNetwork, seed: u64, index: u64) -> Trace {
    let mut rng = rng_for(seed, index);
    let mut state = initial(net);
    let mut states = vec![state.clone()];
    while advance(net, &mut state, &mut rng) {
        states.push(state.clone());
    }
    Trace { states }
}

/// Whether one sample satisfies the target, simulating no further than `t`.
fn sample_hits(
    net: &ConcreteNetwork,
    predicate: &ResolvedPredicate,
    cumulative: bool,
    t: u32,
    rng: &mut ChaCha8Rng,
) -> bool {
    let mut state = initial(net);
    loop {
        let holds = predicate.holds(&state.valuation);
        if state.ticks == t {
            return holds;
        }
        if cumulative && holds {
            return true;
        }
        if !advance(net, &mut state, rng) {
            return false;
        }
    }
}

/// Fraction of `samples` traces satisfying the query at tick `t`.
///
/// Exact mode asks for the predicate at tick `t`; cumulative and unbounded
/// modes ask for it at some tick up to `t`.
pub fn estimate_probability(
    net: &ConcreteNetwork,
    query: &Query,
    t: u32,
    samples: u64,
    seed: u64,
) -> Result<Estimate, SimulationError> {
    let (predicate, mode) = match &query.kind {
        QueryKind::DeadlockFreedom => return Err(SimulationError::NotEstimable),
        QueryKind::Probability { predicate, ticks } => (predicate, *ticks),
    };
    if samples == 0 {
        return Err(SimulationError::NoSamples);
    }
    let horizon = net.horizon();
    if t > horizon {
        return Err(QueryError::TickOutOfRange { t, horizon }.into());
    }
    let hits = count_hits(net, predicate, !matches!(mode, TickMode::Exact(_)), t, samples, seed)?;
    Ok(Estimate::new(query, net.config_name(), t, hits, samples, seed))
}

fn count_hits(
    net: &ConcreteNetwork,
    predicate: &Predicate,
    cumulative: bool,
    t: u32,
    samples: u64,
    seed: u64,
) -> Result<u64, QueryError> {
    let resolved = predicate.resolve(net.vars())?;
    let chunks = samples.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|c| {
            (c * CHUNK..((c + 1) * CHUNK).min(samples))
                .filter(|&i| sample_hits(net, &resolved, cumulative, t, &mut rng_for(seed, i)))
                .count() as u64
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;
    use crate::engine::TickBound;
    use crate::model::{bind_constants, ScenarioConfig};

    const COIN: &str = "
domain Face { heads, tails }
var a : Face = heads;
const N : count;
const p : probability;
horizon N;
machine A {
  initial S;
  state S;
  from S goto [p] S set a := heads or [1 - p] S set a := tails;
}";

    fn coin(p: &str, n: &str) -> ConcreteNetwork {
        let cfg = ScenarioConfig::new("C").with_decimal("p", p).with_decimal("N", n);
        bind_constants(&parse_model(COIN).unwrap(), &cfg).unwrap()
    }

    fn tails(mode: TickMode) -> Query {
        Query::probability("Q", "C", Predicate::new().eq("a", "tails"), mode)
    }

    #[test]
    fn traces_cover_the_horizon() {
        let net = coin("0.5", "7");
        let trace = simulate_run(&net, 3);
        assert_eq!(trace.states.len(), 8);
        assert!(trace.states.last().unwrap().done);
        assert!(!trace.deadlocked(7));
        assert_eq!(trace, simulate_run(&net, 3));
    }

    #[test]
    fn certain_branches_ignore_the_seed() {
        let net = coin("1", "5");
        assert_eq!(simulate_run(&net, 1), simulate_run(&net, 2));
    }

    #[test]
    fn impossible_event() {
        let net = coin("1", "5");
        let e = estimate_probability(&net, &tails(TickMode::Cumulative(TickBound::At(5))), 5, 1000, 9)
            .unwrap();
        assert_eq!((e.p_hat, e.std_err), (0.0, 0.0));
    }

    #[test]
    fn single_sample() {
        let net = coin("0.5", "5");
        for seed in 0..20 {
            let e = estimate_probability(&net, &tails(TickMode::Exact(TickBound::At(2))), 2, 1, seed)
                .unwrap();
            assert!(e.p_hat == 0.0 || e.p_hat == 1.0);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let net = coin("0.5", "5");
        let q = Query::deadlock_freedom("P2", "C");
        assert_eq!(estimate_probability(&net, &q, 5, 10, 0), Err(SimulationError::NotEstimable));
        let q = tails(TickMode::Exact(TickBound::At(1)));
        assert_eq!(estimate_probability(&net, &q, 1, 0, 0), Err(SimulationError::NoSamples));
        assert!(estimate_probability(&net, &q, 6, 10, 0).is_err());
    }

    #[test]
    fn estimate_is_close() {
        let net = coin("0.25", "4");
        let q = tails(TickMode::Cumulative(TickBound::At(3)));
        let e = estimate_probability(&net, &q, 3, 200_000, 42).unwrap();
        let exact = 1.0 - 0.25f64.powi(3);
        assert!((e.p_hat - exact).abs() <= 4.0 * e.std_err);
    }
}
