//! Deterministic simulator: scripted actors, adversaries and goal checks.
//!
//! A [`Scenario`] is stepped one event at a time against a shared identity
//! ledger and meeting ledger. Every observable outcome lands in a
//! [`Transcript`], which [`check_goals`] then judges.

mod adversary;
mod goals;
mod scenario;
mod transcript;
mod world;

use thiserror::Error;

pub use adversary::{Adversary, AdversaryCtx, AdversaryRegistry, AdversarySpec, AttackOutcome, MIX_SOURCE};
pub use goals::{check_goals, GoalReport, GoalResult, GOALS};
pub use scenario::{Action, ActorSpec, InfoSpec, Scenario, ScriptEvent};
pub use transcript::{Event, EventKind, Transcript, TxOutcome};
pub use world::{run_scenario, run_scenario_with, simulate, Registries, Run};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("line {line}: {message}")]
    MalformedScenario { line: usize, message: String },
    /// A well-formed script asked for something the protocol cannot do at that point.
    #[error("line {line}: {message}")]
    Script { line: usize, message: String },
}

impl SimError {
    pub(crate) fn malformed(line: usize, message: &str) -> Self {
        SimError::MalformedScenario {
            line,
            message: message.to_owned(),
        }
    }

    pub(crate) fn script(line: usize, message: impl Into<String>) -> Self {
        SimError::Script {
            line,
            message: message.into(),
        }
    }
}

/// Runs `scenario` with `spec` injected after the target meeting's first packet.
pub fn run_adversary(scenario: &Scenario, spec: &AdversarySpec) -> Result<Transcript, SimError> {
    run_scenario(&spec.inject(scenario)?)
}

/// Scenario files shipped with the crate, by name.
pub fn bundled() -> Vec<(&'static str, &'static str)> {
    vec![
        ("honest", include_str!("../../scenarios/honest.scn")),
        ("leave_rekey", include_str!("../../scenarios/leave_rekey.scn")),
        ("designation", include_str!("../../scenarios/designation.scn")),
        ("time_order", include_str!("../../scenarios/time_order.scn")),
        ("impersonate", include_str!("../../scenarios/impersonate.scn")),
        ("tamper_ledger", include_str!("../../scenarios/tamper_ledger.scn")),
        ("mix_keys", include_str!("../../scenarios/mix_keys.scn")),
        ("replay", include_str!("../../scenarios/replay.scn")),
        ("eavesdrop_tamper", include_str!("../../scenarios/eavesdrop_tamper.scn")),
        ("policies", include_str!("../../scenarios/policies.scn")),
    ]
}

/// Parses a bundled scenario by name.
pub fn bundled_scenario(name: &str) -> Option<Scenario> {
    bundled()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::parse(text).expect("bundled scenarios parse"))
}
