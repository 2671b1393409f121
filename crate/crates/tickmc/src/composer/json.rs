use std::collections::BTreeMap;

use serde::Serialize;

use super::SparseDtmc;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StateDump {
    pub index: usize,
    pub machine_states: BTreeMap<String, String>,
    pub valuation: BTreeMap<String, String>,
    pub ticks: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeDump {
    pub from: usize,
    pub to: usize,
    pub p: f64,
}

/// State-space dump: every state with its names resolved, and every edge.
#[derive(Debug, Clone, Serialize)]
pub struct StateSpaceDump {
    pub states: Vec<StateDump>,
    pub edges: Vec<EdgeDump>,
}

impl StateSpaceDump {
    pub fn new(dtmc: &SparseDtmc) -> Self {
        let states = (0..dtmc.state_count())
            .map(|i| {
                let s = dtmc.state(i);
                StateDump {
                    index: i,
                    machine_states: dtmc
                        .machines()
                        .iter()
                        .zip(&s.locals)
                        .map(|(m, &l)| (m.name.clone(), m.states[l as usize].clone()))
                        .collect(),
                    valuation: dtmc
                        .vars()
                        .iter()
                        .zip(&s.valuation)
                        .map(|(v, &x)| (v.name.clone(), v.values[x as usize].clone()))
                        .collect(),
                    ticks: s.ticks,
                }
            })
            .collect();
        let edges = (0..dtmc.state_count())
            .flat_map(|i| dtmc.row(i).map(move |(j, p)| EdgeDump { from: i, to: j, p }))
            .collect();
        Self { states, edges }
    }
}

pub fn to_json(dtmc: &SparseDtmc) -> String {
    serde_json::to_string_pretty(&StateSpaceDump::new(dtmc)).expect("dump serializes")
}
