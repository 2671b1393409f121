//! The `sweep` command: one probability property over many
//! configurations and ticks, written as CSV.

use std::fmt::Write;

use rayon::prelude::*;
use tickmc::composer::compose_with;
use tickmc::engine::{probability, query_ticks, QueryKind};
use tickmc::model::{parse_decimal, ScenarioConfig};
use tickmc::uvc::{risk_reduction_and_sil, AwarenessLevel, OdsProfile};

use crate::commands::{options, with_mode};
use crate::error::{CliError, CliResult};
use crate::load::Inputs;
use crate::manifest::{emit, RunManifest};
use crate::SweepArgs;

pub const HEADER: &str = "scenario,awareness,ods,t,probability,mode";
pub const RRF_HEADER: &str = "baseline,scenario,awareness,ods,t,p_baseline,p_mitigated,rrf,sil";

struct Row {
    scenario: String,
    t: u32,
    p: f64,
}

/// Scenario labels recovered from the bound values, `-` when they match no
/// bundled level.
struct Labels {
    awareness: Option<AwarenessLevel>,
    ods: Option<OdsProfile>,
}

fn matches(cfg: &ScenarioConfig, names: &[&str], values: &[&str]) -> bool {
    names
        .iter()
        .zip(values)
        .all(|(n, v)| cfg.bindings.get(*n) == parse_decimal(v).as_ref())
}

fn classify(cfg: &ScenarioConfig) -> Labels {
    let awareness = AwarenessLevel::ALL.into_iter().find(|a| {
        matches(
            cfg,
            &["p_approach_robot", "p_approach_yellow", "p_approach_red"],
            &a.probabilities(),
        )
    });
    let ods = OdsProfile::ALL
        .into_iter()
        .find(|o| matches(cfg, &["p_ods_green", "p_ods_yellow"], &o.probabilities()));
    Labels { awareness, ods }
}

fn label<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn run(args: SweepArgs) -> CliResult<()> {
    let common = &args.common;
    let mut inputs = Inputs::default();
    inputs.load_model(&common.model)?;
    inputs.load_properties(&args.props)?;
    inputs.load_configs(&common.configs, &common.model, Some(&args.props))?;
    let query = with_mode(inputs.probability_query(args.property.as_deref())?, args.ticks.mode);
    let QueryKind::Probability { predicate, ticks: mode } = &query.kind else {
        return Err(CliError::input(format!("property `{}` is not a probability query", query.id)));
    };
    let mut names: Vec<String> = if args.names.is_empty() {
        inputs.configs.iter().map(|c| c.name.clone()).collect()
    } else {
        args.names.clone()
    };
    names.sort();
    names.dedup();
    let configs: Vec<&ScenarioConfig> = names.iter().map(|n| inputs.config(n)).collect::<CliResult<_>>()?;
    let ticks = args.ticks.ticks();

    let per_config: Vec<Vec<Row>> = configs
        .par_iter()
        .map(|cfg| -> CliResult<Vec<Row>> {
            let net = inputs.bind(&cfg.name)?;
            let dtmc = compose_with(&net, options(common.state_cap))?;
            let ts = query_ticks(&query, dtmc.horizon(), ticks.as_deref())?;
            ts.into_iter()
                .map(|t| {
                    Ok(Row {
                        scenario: cfg.name.clone(),
                        t,
                        p: probability(&dtmc, predicate, *mode, t)?,
                    })
                })
                .collect()
        })
        .collect::<CliResult<_>>()?;
    let labels: Vec<Labels> = configs.iter().map(|c| classify(c)).collect();

    let mut csv = String::new();
    csv.push_str(HEADER);
    csv.push('\n');
    for (rows, l) in per_config.iter().zip(&labels) {
        let mut rows: Vec<&Row> = rows.iter().collect();
        rows.sort_by_key(|r| r.t);
        for r in rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                r.scenario,
                label(l.awareness),
                label(l.ods),
                r.t,
                r.p,
                mode.name()
            );
        }
    }
    if let Some(baseline) = &args.rrf_baseline {
        csv.push('\n');
        csv.push_str(&summary(baseline, &per_config, &labels)?);
    }
    emit(
        &csv,
        common.out.as_deref(),
        RunManifest::new(inputs.hashes.clone(), names, None),
    )
}

/// Risk-reduction rows at each scenario's last tick.
///
/// A scenario baseline is compared with every other scenario. An ODS
/// profile baseline is compared, per awareness level, with the other
/// profiles at that level.
fn summary(baseline: &str, per_config: &[Vec<Row>], labels: &[Labels]) -> CliResult<String> {
    let last = |i: usize| per_config[i].iter().max_by_key(|r| r.t);
    let index = |name: &str| per_config.iter().position(|rows| rows.first().is_some_and(|r| r.scenario == name));
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if let Some(b) = index(baseline) {
        pairs.extend((0..per_config.len()).filter(|&i| i != b).map(|i| (b, i)));
    } else if let Some(profile) = OdsProfile::from_name(baseline) {
        for (b, lb) in labels.iter().enumerate() {
            if lb.ods != Some(profile) || lb.awareness.is_none() {
                continue;
            }
            pairs.extend(
                labels
                    .iter()
                    .enumerate()
                    .filter(|(i, l)| *i != b && l.awareness == lb.awareness && l.ods != Some(profile))
                    .map(|(i, _)| (b, i)),
            );
        }
    } else {
        return Err(CliError::input(format!(
            "--rrf-baseline `{baseline}` is neither a swept scenario nor an ODS profile"
        )));
    }
    let mut out = String::new();
    out.push_str(RRF_HEADER);
    out.push('\n');
    for (b, m) in pairs {
        let (Some(rb), Some(rm)) = (last(b), last(m)) else {
            continue;
        };
        let (rrf, sil) = match risk_reduction_and_sil(rb.p, rm.p) {
            Ok((rrf, sil)) => (rrf.to_string(), sil.to_string()),
            Err(_) => ("-".to_string(), "-".to_string()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            rb.scenario,
            rm.scenario,
            label(labels[m].awareness),
            label(labels[m].ods),
            rm.t,
            rb.p,
            rm.p,
            rrf,
            sil
        );
    }
    Ok(out)
}
