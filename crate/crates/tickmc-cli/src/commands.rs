use std::collections::BTreeMap;
use std::process::ExitCode;

use tickmc::composer::{compose_with, to_dot, to_json, to_prism, ComposeOptions, SparseDtmc};
use tickmc::dsl::pretty_print_configs;
use tickmc::engine::{eval_query, find_deadlocks, path_to, Query, TickBound};
use tickmc::simulator::{estimate_probability, SimulationError};
use tickmc::uvc::scenario_table;

use crate::error::{CliError, CliResult};
use crate::load::Inputs;
use crate::manifest::{emit, RunManifest};
use crate::{CheckArgs, ExportArgs, Format, Mode, ScenariosArgs, SimulateArgs, SweepArgs};

pub(crate) fn options(state_cap: usize) -> ComposeOptions {
    ComposeOptions { state_cap }
}

pub(crate) fn with_mode(query: &Query, mode: Option<Mode>) -> Query {
    match mode {
        Some(m) => query.with_mode(m == Mode::Cumulative),
        None => query.clone(),
    }
}

pub fn check(args: CheckArgs) -> CliResult<ExitCode> {
    let common = &args.common;
    let mut inputs = Inputs::default();
    inputs.load_model(&common.model)?;
    inputs.load_properties(&args.props)?;
    inputs.load_configs(&common.configs, &common.model, Some(&args.props))?;
    let ticks = args.ticks.ticks();

    let mut chains: BTreeMap<String, SparseDtmc> = BTreeMap::new();
    let mut results = Vec::new();
    let mut violated = false;
    for query in &inputs.properties.queries {
        let config = args.config.clone().unwrap_or_else(|| query.config.clone());
        if !chains.contains_key(&config) {
            let net = inputs.bind(&config)?;
            chains.insert(config.clone(), compose_with(&net, options(common.state_cap))?);
        }
        let dtmc = &chains[&config];
        let mut query = with_mode(query, args.ticks.mode);
        query.config = config.clone();
        let ts = ticks.as_deref().filter(|_| query.tick_mode().is_some_and(|m| m.bound().is_some()));
        let result = eval_query(dtmc, &query, ts)?;
        if result.deadlock_free == Some(false) {
            violated = true;
            report_deadlock(dtmc, &query);
        }
        results.push(result);
    }
    let payload = serde_json::to_string_pretty(&results).expect("results serialize") + "\n";
    let configs = chains.keys().cloned().collect();
    emit(&payload, common.out.as_deref(), RunManifest::new(inputs.hashes, configs, None))?;
    Ok(if violated { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn report_deadlock(dtmc: &SparseDtmc, query: &Query) {
    let deadlocks = find_deadlocks(dtmc);
    eprintln!(
        "{}: {} reachable deadlock state(s) under {}",
        query.id,
        deadlocks.len(),
        query.config
    );
    if let Some(path) = deadlocks.first().and_then(|&d| path_to(dtmc, d)) {
        eprintln!("shortest path to a deadlock:");
        for i in path {
            eprintln!("  {}", dtmc.describe_state(i));
        }
    }
}

pub fn sweep(args: SweepArgs) -> CliResult<ExitCode> {
    crate::sweep::run(args)?;
    Ok(ExitCode::SUCCESS)
}

pub fn simulate(args: SimulateArgs) -> CliResult<ExitCode> {
    let common = &args.common;
    let mut inputs = Inputs::default();
    inputs.load_model(&common.model)?;
    inputs.load_properties(&args.props)?;
    inputs.load_configs(&common.configs, &common.model, Some(&args.props))?;
    let query = inputs.probability_query(args.property.as_deref())?;
    let config = args.config.clone().unwrap_or_else(|| query.config.clone());
    let net = inputs.bind(&config)?;
    let query = with_mode(query, args.mode);
    let t = match (args.t, query.tick_mode().and_then(|m| m.bound())) {
        (Some(t), _) => t,
        (None, Some(TickBound::At(t))) => t,
        (None, None) if query.tick_mode().is_some() => net.horizon(),
        (None, _) => {
            return Err(CliError::input(format!(
                "property `{}` needs a tick; pass --t",
                query.id
            )))
        }
    };
    let estimate = estimate_probability(&net, &query, t, args.samples, args.seed).map_err(|e| match e {
        SimulationError::NotEstimable | SimulationError::NoSamples | SimulationError::Query(_) => {
            CliError::input(e)
        }
    })?;
    let payload = serde_json::to_string_pretty(&estimate).expect("estimate serializes") + "\n";
    emit(
        &payload,
        common.out.as_deref(),
        RunManifest::new(inputs.hashes, vec![config], Some(args.seed)),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn export(args: ExportArgs) -> CliResult<ExitCode> {
    let common = &args.common;
    let mut inputs = Inputs::default();
    inputs.load_model(&common.model)?;
    inputs.load_configs(&common.configs, &common.model, None)?;
    let net = inputs.bind(&args.config)?;
    let dtmc = compose_with(&net, options(common.state_cap))?;
    let payload = match args.format {
        Format::Dot => to_dot(&dtmc),
        Format::Json => to_json(&dtmc) + "\n",
        Format::Prism => to_prism(&dtmc),
    };
    emit(
        &payload,
        common.out.as_deref(),
        RunManifest::new(inputs.hashes, vec![args.config], None),
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn scenarios(args: ScenariosArgs) -> CliResult<ExitCode> {
    let table = scenario_table();
    let names = table.iter().map(|c| c.name.clone()).collect();
    emit(
        &pretty_print_configs(&table),
        args.out.as_deref(),
        RunManifest::new(BTreeMap::new(), names, None),
    )?;
    Ok(ExitCode::SUCCESS)
}
