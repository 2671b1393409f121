//! Explicit-state analysis of tick-synchronized probabilistic state machines.
//!
//! Networks of machines are written in a small textual language ([`dsl`]),
//! validated and bound to a constant configuration ([`model`]), compiled to
//! an explicit discrete-time Markov chain ([`composer`]) and checked for
//! bounded reachability and deadlock freedom ([`engine`]). A Monte Carlo
//! [`simulator`] serves as an independent oracle, and [`uvc`] bundles the
//! UVC light-treatment robot case study.

pub mod composer;
pub mod dsl;
pub mod engine;
pub mod model;
pub mod numeric;
pub mod simulator;
pub mod uvc;
