//! The UVC treatment robot case study.
//!
//! A worker approaches a UVC treatment robot at the end of a crop row. The
//! robot pauses its lamps when its object detection system (ODS) reports a
//! human; injury is possible when the human is in the red zone while the
//! robot is transitioning between rows with the lamps on.

mod risk;

use std::fmt;

use crate::engine::{Predicate, Query, TickBound, TickMode};
use crate::model::{
    Branch, ConstantDef, ConstantKind, EnumDomain, GuardExpr, Loc, MachineDef, Network, ProbExpr,
    ScenarioConfig, SharedVar, Transition,
};

pub use risk::*;

/// The bundled model, property and configuration files.
pub const UVC_MODEL: &str = include_str!("../../models/uvc.psm");
pub const UVC_PROPERTIES: &str = include_str!("../../models/uvc.pprop");
pub const UVC_CONFIGS: &str = include_str!("../../models/uvc.pcfg");
/// The nine scenarios of [`scenario_table`] as a configuration file.
pub const SCENARIO_CONFIGS: &str = include_str!("../../models/scenarios.pcfg");

/// Horizon used by the bundled scenarios.
pub const DEFAULT_TICKS: u32 = 30;
pub const P_AWARE_OF_RISK: &str = "0.01";
pub const P_TRANSITION_RATIO: &str = "10";

/// Zones around the robot, from farthest to nearest. Distances are for
/// documentation only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Zone {
    OutOfRange,
    /// Beyond 7 m.
    Green,
    /// Between 3 and 7 m.
    Yellow,
    /// Within 3 m.
    Red,
}

impl Zone {
    pub const ALL: [Zone; 4] = [Zone::OutOfRange, Zone::Green, Zone::Yellow, Zone::Red];

    /// Value of `shuman` for this zone.
    pub fn value(self) -> &'static str {
        match self {
            Zone::OutOfRange => "outOfRange",
            Zone::Green => "inGreen",
            Zone::Yellow => "inYellow",
            Zone::Red => "inRed",
        }
    }

    /// Human machine state for this zone.
    pub fn state(self) -> &'static str {
        match self {
            Zone::OutOfRange => "OutOfRange",
            Zone::Green => "InGreenZone",
            Zone::Yellow => "InYellowZone",
            Zone::Red => "InRedZone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AwarenessLevel {
    Deliberate,
    Aware,
    LessAware,
}

impl AwarenessLevel {
    /// Ordered from most to least risky.
    pub const ALL: [AwarenessLevel; 3] = [
        AwarenessLevel::Deliberate,
        AwarenessLevel::LessAware,
        AwarenessLevel::Aware,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AwarenessLevel::Deliberate => "deliberate",
            AwarenessLevel::Aware => "aware",
            AwarenessLevel::LessAware => "lessAware",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    /// `(p_approach_robot, p_approach_yellow, p_approach_red)`
    pub fn probabilities(self) -> [&'static str; 3] {
        match self {
            AwarenessLevel::Deliberate => ["1", "1", "1"],
            AwarenessLevel::Aware => ["0.5", "0.5", "0.3"],
            AwarenessLevel::LessAware => ["0.7", "0.7", "0.5"],
        }
    }
}

impl fmt::Display for AwarenessLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OdsProfile {
    High,
    Normal,
    Failure,
}

impl OdsProfile {
    /// Ordered from worst to best detection.
    pub const ALL: [OdsProfile; 3] = [OdsProfile::Failure, OdsProfile::Normal, OdsProfile::High];

    pub fn name(self) -> &'static str {
        match self {
            OdsProfile::High => "high",
            OdsProfile::Normal => "normal",
            OdsProfile::Failure => "failure",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "highPerformance" => Some(OdsProfile::High),
            _ => Self::ALL.into_iter().find(|o| o.name() == name),
        }
    }

    /// `(p_ods_green, p_ods_yellow)`
    pub fn probabilities(self) -> [&'static str; 2] {
        match self {
            OdsProfile::High => ["0.99", "0.99"],
            OdsProfile::Normal => ["0.4", "0.7"],
            OdsProfile::Failure => ["0", "0"],
        }
    }
}

impl fmt::Display for OdsProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Name of the scenario combining an awareness level and an ODS profile.
pub fn scenario_name(awareness: AwarenessLevel, ods: OdsProfile) -> String {
    format!("{}_{}", awareness.name(), ods.name())
}

/// Configuration binding all eight open constants of the UVC network.
pub fn scenario(awareness: AwarenessLevel, ods: OdsProfile) -> ScenarioConfig {
    let [robot, yellow, red] = awareness.probabilities();
    let [green, ods_yellow] = ods.probabilities();
    ScenarioConfig::new(scenario_name(awareness, ods))
        .with_decimal("p_approach_robot", robot)
        .with_decimal("p_approach_yellow", yellow)
        .with_decimal("p_approach_red", red)
        .with_decimal("p_aware_of_risk", P_AWARE_OF_RISK)
        .with_decimal("p_ods_green", green)
        .with_decimal("p_ods_yellow", ods_yellow)
        .with_decimal("p_transition_ratio", P_TRANSITION_RATIO)
        .with("N_ticks", crate::model::Rational::from_integer(DEFAULT_TICKS.into()))
}

/// The nine awareness × ODS scenarios, awareness-major.
pub fn scenario_table() -> Vec<ScenarioConfig> {
    AwarenessLevel::ALL
        .into_iter()
        .flat_map(|a| OdsProfile::ALL.into_iter().map(move |o| scenario(a, o)))
        .collect()
}

/// Splits a scenario name into its awareness level and ODS profile.
pub fn parse_scenario_name(name: &str) -> Option<(AwarenessLevel, OdsProfile)> {
    let (a, o) = name.split_once('_')?;
    Some((AwarenessLevel::from_name(a)?, OdsProfile::from_name(o)?))
}

/// Injury event: human in red while the robot transitions between rows.
pub fn injury_predicate() -> Predicate {
    Predicate::new()
        .eq("shuman", Zone::Red.value())
        .eq("srobot", "transitionRow")
}

/// P1 at tick `t`, exact or cumulative.
pub fn injury_query(config: &str, t: u32, cumulative: bool) -> Query {
    let mode = if cumulative {
        TickMode::Cumulative(TickBound::At(t))
    } else {
        TickMode::Exact(TickBound::At(t))
    };
    Query::probability("P1", config, injury_predicate(), mode)
}

pub fn deadlock_query(config: &str) -> Query {
    Query::deadlock_freedom("P2", config)
}

fn constant(net: &mut Network, name: &str, kind: ConstantKind) {
    net.add_constant(ConstantDef {
        name: name.into(),
        kind,
        value: None,
        loc: Loc::NONE,
    })
    .expect("fresh constant");
}

fn var(net: &mut Network, name: &str, domain: &str, initial: &str) {
    net.add_var(SharedVar {
        name: name.into(),
        domain: domain.into(),
        initial: initial.into(),
        loc: Loc::NONE,
    })
    .expect("fresh variable");
}

fn stay_or(p: &str, target: &str, zone: Zone, source: &str) -> Transition {
    let p = ProbExpr::constant(p);
    Transition::new(source, GuardExpr::True)
        .branch(Branch::new(p.clone(), target).set("shuman", zone.value()))
        .branch(Branch::new(p.complement(), source))
}

fn human() -> MachineDef {
    let mut m = MachineDef::new("Human", Zone::OutOfRange.state());
    for z in Zone::ALL {
        m = m.state(z.state());
    }
    m.transition(stay_or("p_approach_robot", "InGreenZone", Zone::Green, "OutOfRange"))
        .transition(stay_or("p_approach_yellow", "InYellowZone", Zone::Yellow, "InGreenZone"))
        .transition(stay_or("p_approach_red", "InRedZone", Zone::Red, "InYellowZone"))
        .transition(stay_or("p_aware_of_risk", "InYellowZone", Zone::Yellow, "InRedZone"))
}

fn ods() -> MachineDef {
    let none = || Branch::new(ProbExpr::one(), "NoHumanDetected").set("sods", "noHumanDetected");
    let detect = |p: &str, state: &str, value: &str| {
        let p = ProbExpr::constant(p);
        [
            Branch::new(p.clone(), state).set("sods", value),
            Branch::new(p.complement(), "NoHumanDetected").set("sods", "noHumanDetected"),
        ]
    };
    let states = ["NoHumanDetected", "HumanDetectedInGreen", "HumanDetectedInYellow"];
    let mut m = MachineDef::new("ODS", states[0]);
    for s in states {
        m = m.state(s);
    }
    for s in states {
        let [g1, g2] = detect("p_ods_green", "HumanDetectedInGreen", "humanDetectedInGreen");
        let [y1, y2] = detect("p_ods_yellow", "HumanDetectedInYellow", "humanDetectedInYellow");
        m = m
            .transition(Transition::new(s, GuardExpr::eq("shuman", Zone::OutOfRange.value())).branch(none()))
            .transition(
                Transition::new(s, GuardExpr::eq("shuman", Zone::Green.value()))
                    .branch(g1)
                    .branch(g2),
            )
            .transition(
                Transition::new(
                    s,
                    GuardExpr::eq("shuman", Zone::Yellow.value())
                        .or(GuardExpr::eq("shuman", Zone::Red.value())),
                )
                .branch(y1)
                .branch(y2),
            );
    }
    m
}

fn robot() -> MachineDef {
    let seen = || GuardExpr::ne("sods", "noHumanDetected");
    let clear = || GuardExpr::eq("sods", "noHumanDetected");
    let certain = |target: &str| Branch::new(ProbExpr::one(), target);
    let exit = ProbExpr::bin(
        crate::model::BinOp::Div,
        ProbExpr::one(),
        ProbExpr::constant("p_transition_ratio"),
    );
    MachineDef::new("Robot", "MoveAlongRow")
        .state("MoveAlongRow")
        .state("TransitionBetweenRows")
        .state("Paused")
        .transition(
            Transition::new("MoveAlongRow", seen()).branch(certain("Paused").set("srobot", "paused")),
        )
        .transition(
            Transition::new("MoveAlongRow", clear())
                .branch(Branch::new(exit.clone(), "TransitionBetweenRows").set("srobot", "transitionRow"))
                .branch(Branch::new(exit.complement(), "MoveAlongRow")),
        )
        .transition(
            Transition::new("TransitionBetweenRows", seen())
                .branch(certain("Paused").set("srobot", "paused")),
        )
        .transition(
            Transition::new("TransitionBetweenRows", clear())
                .branch(certain("MoveAlongRow").set("srobot", "moveAlongRow")),
        )
        .transition(
            Transition::new("Paused", clear()).branch(certain("MoveAlongRow").set("srobot", "moveAlongRow")),
        )
        .transition(Transition::new("Paused", seen()).branch(certain("Paused")))
}

/// The UVC network with every constant open. Machines update in the order
/// Human, ODS, Robot.
pub fn build_uvc_network() -> Network {
    let mut net = Network::new();
    for domain in [
        EnumDomain::new("HumanZone", &Zone::ALL.map(Zone::value)),
        EnumDomain::new(
            "OdsReport",
            &["noHumanDetected", "humanDetectedInGreen", "humanDetectedInYellow"],
        ),
        EnumDomain::new("RobotActivity", &["moveAlongRow", "transitionRow", "paused"]),
    ] {
        net.add_domain(domain).expect("fresh domain");
    }
    var(&mut net, "shuman", "HumanZone", Zone::OutOfRange.value());
    var(&mut net, "sods", "OdsReport", "noHumanDetected");
    var(&mut net, "srobot", "RobotActivity", "moveAlongRow");
    for name in [
        "p_approach_robot",
        "p_approach_yellow",
        "p_approach_red",
        "p_aware_of_risk",
        "p_ods_green",
        "p_ods_yellow",
    ] {
        constant(&mut net, name, ConstantKind::Probability);
    }
    constant(&mut net, "p_transition_ratio", ConstantKind::Ratio);
    constant(&mut net, "N_ticks", ConstantKind::Count);
    net.horizon = Some("N_ticks".into());
    for m in [human(), ods(), robot()] {
        net.add_machine(m).expect("fresh machine");
    }
    net
}
