//! Security goals judged over a finished transcript.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::transcript::{Event, EventKind, Transcript, TxOutcome};

/// Every goal, in report order.
pub const GOALS: [&str; 9] = [
    "confidentiality",
    "expulsion",
    "integrity",
    "delivery",
    "availability",
    "epochs",
    "nonces",
    "attacks",
    "agreement",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalResult {
    pub name: &'static str,
    pub passed: bool,
    /// The first violating event, rendered.
    pub first: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalReport {
    pub goals: Vec<GoalResult>,
}

impl GoalReport {
    pub fn all_passed(&self) -> bool {
        self.goals.iter().all(|g| g.passed)
    }

    pub fn get(&self, name: &str) -> Option<&GoalResult> {
        self.goals.iter().find(|g| g.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &GoalResult> + '_ {
        self.goals.iter().filter(|g| !g.passed)
    }

    /// Verdicts only, without the cited events; stable across seeds.
    pub fn verdicts(&self) -> Vec<(&'static str, bool)> {
        self.goals.iter().map(|g| (g.name, g.passed)).collect()
    }
}

impl fmt::Display for GoalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.goals {
            write!(f, "goal {}={}", g.name, if g.passed { "pass" } else { "fail" })?;
            if let Some(first) = &g.first {
                write!(f, " first=[{first}]")?;
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "note availability=ledger-acceptance (no network model; loss and reordering are not simulated)"
        )
    }
}

/// Per-goal state while scanning.
#[derive(Default)]
struct Scan {
    first: BTreeMap<&'static str, String>,
}

impl Scan {
    fn flag(&mut self, goal: &'static str, event: &Event) {
        self.first.entry(goal).or_insert_with(|| event.to_string());
    }
}

/// Judges every goal. Goal lines already in the transcript are ignored.
pub fn check_goals(transcript: &Transcript) -> GoalReport {
    let mut scan = Scan::default();
    // (meeting, epoch) -> actors entitled to that epoch's key.
    let mut entitled: BTreeMap<(&str, u32), BTreeSet<&str>> = BTreeMap::new();
    let mut epochs: BTreeMap<&str, Option<u32>> = BTreeMap::new();
    let mut nonces: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut last_tx: Option<&TxOutcome> = None;

    for event in &transcript.events {
        match &event.kind {
            EventKind::Tx {
                honest,
                outcome,
                meeting,
                tag,
                ..
            } => {
                if *honest && !matches!(outcome, TxOutcome::Accepted { .. }) {
                    scan.flag("availability", event);
                }
                if *tag == "publish_meeting" && matches!(outcome, TxOutcome::Accepted { .. }) {
                    epochs.insert(meeting, None);
                }
                last_tx = Some(outcome);
            }
            EventKind::Epoch {
                meeting,
                epoch,
                leader,
                recipients,
                ..
            } => {
                let expected = epochs.get(meeting.as_str()).copied().flatten().map_or(0, |e| e + 1);
                if *epoch != expected {
                    scan.flag("epochs", event);
                }
                epochs.insert(meeting, Some(*epoch));
                let set = entitled.entry((meeting, *epoch)).or_default();
                set.insert(leader);
                set.extend(recipients.iter().map(String::as_str));
            }
            EventKind::KeyAccept { spliced, result, .. } => {
                if *spliced && result.is_ok() {
                    scan.flag("integrity", event);
                }
            }
            EventKind::Packet { key_fp, nonce, .. } => {
                if !nonces.insert((key_fp, nonce)) {
                    scan.flag("nonces", event);
                }
            }
            EventKind::Decrypt {
                actor,
                meeting,
                epoch,
                held,
                retained,
                tampered,
                result,
                ..
            } => {
                let ok = result.is_ok();
                let allowed = entitled
                    .get(&(meeting.as_str(), *epoch))
                    .is_some_and(|s| s.contains(actor.as_str()));
                if ok && !allowed {
                    scan.flag("confidentiality", event);
                }
                if ok && *tampered {
                    scan.flag("integrity", event);
                }
                if ok && *retained && held.is_some_and(|h| *epoch > h) {
                    scan.flag("expulsion", event);
                }
                if !ok && !*retained && !*tampered {
                    scan.flag("delivery", event);
                }
            }
            EventKind::Validate { result, .. } => {
                let agrees = match (last_tx, result) {
                    (Some(TxOutcome::Accepted { .. }), Ok(())) => true,
                    (Some(TxOutcome::Rejected { reason }), Err(code)) => reason == code,
                    _ => false,
                };
                if !agrees {
                    scan.flag("agreement", event);
                }
            }
            EventKind::Attack { succeeded, .. } => {
                if *succeeded {
                    scan.flag("attacks", event);
                }
            }
            EventKind::Fault { kind, .. } => {
                if kind == "leak_key" {
                    scan.flag("confidentiality", event);
                }
            }
            EventKind::Register { .. }
            | EventKind::Verify { .. }
            | EventKind::Purge { .. }
            | EventKind::Goal { .. } => {}
        }
    }

    GoalReport {
        goals: GOALS
            .iter()
            .map(|name| {
                let first = scan.first.remove(name);
                GoalResult {
                    name,
                    passed: first.is_none(),
                    first,
                }
            })
            .collect(),
    }
}
