use ledgermeet::sim::{
    bundled, bundled_scenario, check_goals, run_adversary, run_scenario, run_scenario_with, Action, Adversary,
    AdversaryCtx, AdversaryRegistry, AdversarySpec, AttackOutcome, EventKind, Registries, Scenario, SimError,
    Transcript, GOALS,
};
use proptest::prelude::*;

const SMALL: &str = "\
seed 11
actor lead lead laptop plain:Lead
actor m1 ann phone
actor m2 ben tablet
tick 1 lead publish mt sync
tick 2 m1 request mt
tick 3 m2 request mt
tick 4 lead verify_all mt
tick 5 lead distribute mt
tick 6 m1 packet mt 1 10
tick 7 lead dismiss mt
";

fn run(text: &str) -> Transcript {
    run_scenario(&Scenario::parse(text).unwrap()).unwrap()
}

fn decrypts(t: &Transcript) -> impl Iterator<Item = (&str, bool, bool, Result<(), &'static str>)> + '_ {
    t.events.iter().filter_map(|e| match &e.kind {
        EventKind::Decrypt {
            actor,
            retained,
            tampered,
            result,
            ..
        } => Some((actor.as_str(), *retained, *tampered, *result)),
        _ => None,
    })
}

fn goal_events(t: &Transcript) -> Vec<(&'static str, bool)> {
    t.events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Goal { name, passed, .. } => Some((*name, *passed)),
            _ => None,
        })
        .collect()
}

fn assert_all_pass(name: &str, t: &Transcript) {
    let report = check_goals(t);
    assert!(report.all_passed(), "{name}:\n{report}");
    assert_eq!(goal_events(t), report.verdicts(), "{name}: recorded verdicts");
}

#[test]
fn honest_run_decrypts_everything_and_passes_every_goal() {
    let t = run(SMALL);
    let all: Vec<_> = decrypts(&t).collect();
    assert_eq!(all.len(), 20, "two receivers for each of ten packets");
    assert!(all.iter().all(|d| d.3.is_ok()));
    assert_all_pass("small", &t);
}

#[test]
fn every_bundled_scenario_passes_every_goal() {
    for (name, text) in bundled() {
        assert_all_pass(name, &run(text));
    }
}

#[test]
fn departed_member_cannot_read_after_rekey() {
    let script = format!(
        "{}tick 8 m2 leave mt\ntick 9 lead rekey mt\ntick 10 m1 packet mt 1 5\n",
        SMALL.replace("tick 7 lead dismiss mt\n", "")
    );
    let t = run(&script);
    let after: Vec<_> = decrypts(&t).filter(|d| d.0 == "m2" && d.1).collect();
    assert_eq!(after.len(), 5);
    assert!(after.iter().all(|d| d.3 == Err("auth_fail")));
    assert_all_pass("leave", &t);
}

#[test]
fn same_seed_same_bytes_other_seed_same_verdicts() {
    for (name, text) in bundled() {
        let sc = Scenario::parse(text).unwrap();
        let a = run_scenario(&sc).unwrap().render();
        let b = run_scenario(&sc).unwrap().render();
        assert_eq!(a, b, "{name}");
        let other = run_scenario(&Scenario {
            seed: sc.seed ^ 0x5eed,
            ..sc.clone()
        })
        .unwrap();
        assert_ne!(a, other.render(), "{name}");
        assert_eq!(
            check_goals(&other).verdicts(),
            check_goals(&run(text)).verdicts(),
            "{name}"
        );
    }
}

#[test]
fn transcript_matches_golden_file() {
    let t = run(bundled().iter().find(|(n, _)| *n == "leave_rekey").unwrap().1);
    let golden = include_str!("golden/leave_rekey.txt");
    assert_eq!(t.render(), golden);
}

#[test]
fn leaked_key_fails_confidentiality_citing_the_leak() {
    let script = SMALL.replace(
        "tick 6 m1 packet mt 1 10",
        "actor eve eve laptop\ntick 6 eve fault.leak_key mt\ntick 6 m1 packet mt 1 3",
    );
    let t = run(&script);
    let report = check_goals(&t);
    let conf = report.get("confidentiality").unwrap();
    assert!(!conf.passed);
    assert!(conf.first.as_deref().unwrap().contains("fault kind=leak_key actor=eve"));
    assert!(decrypts(&t).any(|d| d.0 == "eve" && d.3.is_ok()));
    assert!(report.get("integrity").unwrap().passed);
}

#[test]
fn disabled_tag_check_fails_integrity() {
    let script = SMALL.replace("tick 7", "tick 7 m2 fault.skip_tag_check mt\ntick 8");
    let report = check_goals(&run(&script));
    let integrity = report.get("integrity").unwrap();
    assert!(!integrity.passed);
    assert!(integrity.first.as_deref().unwrap().contains("actor=m2"));
    assert!(integrity.first.as_deref().unwrap().contains("tampered result=ok"));
    assert_eq!(report.failures().count(), 1, "{report}");
}

#[test]
fn every_adversary_fails_against_every_bundled_scenario() {
    for (name, _) in bundled() {
        let base = bundled_scenario(name).unwrap();
        for kind in AdversarySpec::KINDS {
            let (sc, spec) = AdversarySpec::default_for(&base, kind).unwrap();
            let t = run_adversary(&sc, &spec).unwrap();
            let attacks: Vec<_> = t
                .events
                .iter()
                .filter_map(|e| match &e.kind {
                    EventKind::Attack { kind: k, succeeded, .. } => Some((k.clone(), *succeeded)),
                    _ => None,
                })
                .collect();
            assert!(attacks.iter().any(|(k, _)| k == kind), "{name}/{kind} never ran");
            assert!(attacks.iter().all(|(_, s)| !s), "{name}/{kind}");
            assert_all_pass(&format!("{name}/{kind}"), &t);
        }
    }
}

#[test]
fn injected_attack_lands_after_the_first_packet() {
    let base = Scenario::parse(SMALL).unwrap();
    let spec = AdversarySpec::EavesdropOnly { meeting: "mt".into() };
    let sc = spec.inject(&base).unwrap();
    let at = sc
        .events
        .iter()
        .position(|e| matches!(e.action, Action::Adversary { .. }))
        .unwrap();
    assert!(matches!(sc.events[at - 1].action, Action::Packet { .. }));
    assert!(sc.actors.iter().any(|a| a.adversarial));
}

#[derive(Debug)]
struct Boast;

impl Adversary for Boast {
    fn name(&self) -> &'static str {
        "boast"
    }

    fn execute(&self, _: &mut AdversaryCtx<'_, '_>, _: &[String]) -> Result<AttackOutcome, String> {
        Ok(AttackOutcome {
            succeeded: true,
            detail: "claim=everything".into(),
        })
    }
}

#[test]
fn adversaries_resolve_by_name_from_the_registry() {
    let script = format!("{SMALL}adversary z z z\ntick 8 z adversary.boast\n");
    let sc = Scenario::parse(&script).unwrap();
    let err = run_scenario(&sc).unwrap_err();
    assert!(matches!(err, SimError::MalformedScenario { line: 13, .. }), "{err:?}");

    let mut adversaries = AdversaryRegistry::builtin();
    adversaries.register(Box::new(Boast));
    let registries = Registries {
        adversaries,
        ..Registries::builtin()
    };
    let t = run_scenario_with(&sc, &registries).unwrap();
    let report = check_goals(&t);
    assert!(!report.get("attacks").unwrap().passed);
    assert!(report
        .get("attacks")
        .unwrap()
        .first
        .as_deref()
        .unwrap()
        .contains("attack=succeeded"));
}

#[test]
fn unknown_policy_is_a_malformed_scenario() {
    let sc = Scenario::parse(&format!("policy astrology\n{SMALL}")).unwrap();
    assert!(matches!(run_scenario(&sc), Err(SimError::MalformedScenario { .. })));
}

#[test]
fn impossible_actions_are_script_errors() {
    let script = SMALL.replace("tick 6 m1 packet", "tick 6 m1 leave mt\ntick 6 m1 packet");
    assert!(matches!(
        run_scenario(&Scenario::parse(&script).unwrap()),
        Err(SimError::Script { line: 11, .. })
    ));
}

#[test]
fn a_stream_has_one_sender_per_epoch() {
    let shared = SMALL.replace("tick 7 lead dismiss mt", "tick 7 m2 packet mt 1 1");
    assert!(matches!(
        run_scenario(&Scenario::parse(&shared).unwrap()),
        Err(SimError::Script { line: 11, .. })
    ));
    let own = SMALL.replace("tick 7 lead dismiss mt", "tick 7 m2 packet mt 2 3");
    assert_all_pass("own stream", &run(&own));
}

#[test]
fn goal_list_is_stable() {
    let t = run(SMALL);
    let names: Vec<_> = goal_events(&t).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, GOALS);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_seed_gives_a_clean_honest_run(seed in any::<u64>()) {
        let sc = Scenario { seed, ..Scenario::parse(SMALL).unwrap() };
        let t = run_scenario(&sc).unwrap();
        prop_assert!(check_goals(&t).all_passed());
        prop_assert_eq!(t.render(), run_scenario(&sc).unwrap().render());
    }

    #[test]
    fn checker_ignores_its_own_verdict_lines(seed in any::<u64>()) {
        let sc = Scenario { seed, ..Scenario::parse(SMALL).unwrap() };
        let t = run_scenario(&sc).unwrap();
        let mut stripped = t.clone();
        stripped.events.retain(|e| !matches!(e.kind, EventKind::Goal { .. }));
        prop_assert_eq!(check_goals(&t), check_goals(&stripped));
    }
}
