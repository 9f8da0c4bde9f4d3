use std::path::{Path, PathBuf};
use std::process::{Command as Proc, Output};

use ledgermeet_cli::{execute, CliConfig, Command, EXIT_CHECK, EXIT_OK, EXIT_USAGE, LEDGER_FILES};

const BIN: &str = env!("CARGO_BIN_EXE_ledgermeet");

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/scenarios")
        .join(format!("{name}.scn"))
}

fn cli(args: &[&str]) -> Output {
    Proc::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const THREE: &str = "\
seed 3
actor lead lead laptop
actor ann ann phone
actor ben ben tablet
tick 1 lead publish mt standup
tick 2 ann request mt
tick 3 ben request mt
tick 4 lead verify_all mt
tick 5 lead distribute mt
tick 6 ann packet mt 1 4
tick 7 lead dismiss mt
";

#[test]
fn honest_three_actor_run_exits_zero_with_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("three.scn");
    std::fs::write(&path, THREE).unwrap();
    let o = cli(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("tag=publish_meeting"));
    assert!(text.contains("goal confidentiality=pass"));
    assert!(stderr(&o).is_empty());
}

#[test]
fn impersonation_run_exits_zero_with_failed_attack() {
    let o = cli(&["run", "--scenario", scenario("impersonate").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    assert!(stdout(&o).contains("attack=failed"));
    assert!(!stdout(&o).contains("attack=succeeded"));
}

#[test]
fn broken_scenario_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.scn");
    std::fs::write(&path, "seed one\nactor\n").unwrap();
    let o = cli(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(stderr(&o).contains("line 1"));
}

#[test]
fn unknown_adversary_is_malformed_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("adv.scn");
    std::fs::write(&path, format!("{THREE}adversary z z z\ntick 8 z adversary.nobody\n")).unwrap();
    let o = cli(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(stderr(&o).contains("malformed scenario"));
}

#[test]
fn failed_goal_exits_one_and_prints_the_failing_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("leak.scn");
    let script = THREE.replace(
        "tick 6 ann packet mt 1 4",
        "actor eve eve laptop\ntick 6 eve fault.leak_key mt\ntick 6 ann packet mt 1 4",
    );
    std::fs::write(&path, script).unwrap();
    let o = cli(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_CHECK));
    assert!(stderr(&o).contains("goal confidentiality=fail first=["));

    let g = cli(&["goals", "--scenario", path.to_str().unwrap()]);
    assert_eq!(g.status.code(), Some(EXIT_CHECK));
    assert!(stdout(&g).contains("goal confidentiality=fail"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["run"][..],
        &["goals"],
        &["inspect"],
        &["launch"],
        &["run", "--scenario"],
        &["vectors", "--seed", "minus-one"],
    ] {
        assert_eq!(cli(args).status.code(), Some(EXIT_USAGE), "{args:?}");
    }
    assert_eq!(
        cli(&["run", "--scenario", "/nonexistent/x.scn"]).status.code(),
        Some(EXIT_USAGE)
    );
}

#[test]
fn seed_override_changes_keys_but_not_verdicts() {
    let path = scenario("leave_rekey");
    let p = path.to_str().unwrap();
    let a = cli(&["run", "--scenario", p]);
    let b = cli(&["run", "--scenario", p, "--seed", "99"]);
    assert_eq!(a.status.code(), Some(EXIT_OK));
    assert_eq!(b.status.code(), Some(EXIT_OK));
    assert_ne!(a.stdout, b.stdout);
    let verdicts = |o: &Output| -> Vec<String> {
        stdout(o)
            .lines()
            .filter(|l| l.contains(" goal "))
            .map(|l| l.split_once(' ').unwrap().1.to_owned())
            .collect()
    };
    assert_eq!(verdicts(&a), verdicts(&b));
    assert_eq!(cli(&["run", "--scenario", p]).stdout, a.stdout);
}

#[test]
fn transcript_goes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.txt");
    let o = cli(&[
        "run",
        "--scenario",
        scenario("honest").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(out).unwrap().contains("goal agreement=pass"));
}

#[test]
fn inspect_after_persisted_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = cli(&[
        "run",
        "--scenario",
        scenario("mix_keys").to_str().unwrap(),
        "--persist",
        d,
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stderr(&o));
    for name in LEDGER_FILES {
        assert!(dir.path().join(name).exists(), "{name}");
    }

    let first = cli(&["inspect", "--persist", d]);
    assert_eq!(first.status.code(), Some(EXIT_OK));
    let dump = stdout(&first);
    let publishes = dump.lines().filter(|l| l.contains(" tag=publish_meeting ")).count();
    let meetings = stdout(&cli(&["run", "--scenario", scenario("mix_keys").to_str().unwrap()]))
        .lines()
        .filter(|l| l.contains("tag=publish_meeting") && l.contains("result=accepted"))
        .count();
    assert_eq!(publishes, meetings);
    assert!(publishes >= 2);
    for line in dump.lines().filter(|l| l.starts_with("block=")) {
        let fields: Vec<&str> = line.split(' ').collect();
        assert_eq!(fields.len(), 4, "{line}");
        assert!(fields[2].strip_prefix("signer=").unwrap().len() == 8, "{line}");
    }
    assert_eq!(cli(&["inspect", "--persist", d]).stdout, first.stdout);
}

#[test]
fn persisted_files_hold_one_block_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = CliConfig {
        scenario_path: Some(scenario("honest")),
        persist_dir: Some(dir.path().to_path_buf()),
        ..CliConfig::new(Command::Run)
    };
    assert_eq!(execute(&config, &mut Vec::new(), &mut Vec::new()), EXIT_OK);
    let image = std::fs::read_to_string(dir.path().join("meeting.ledger")).unwrap();
    for line in image.lines().skip(1) {
        let (bytes, hash) = line.split_once(' ').unwrap();
        let bytes = hex::decode(bytes).unwrap();
        assert_eq!(hex::encode(ring::digest::digest(&ring::digest::SHA256, &bytes)), hash);
    }
}

#[test]
fn inspect_without_ledgers_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["inspect", "--persist", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_USAGE));
    assert!(o.stdout.is_empty());
}

#[test]
fn inspect_flags_a_tampered_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let config = CliConfig {
        scenario_path: Some(scenario("honest")),
        persist_dir: Some(dir.path().to_path_buf()),
        ..CliConfig::new(Command::Run)
    };
    assert_eq!(execute(&config, &mut Vec::new(), &mut Vec::new()), EXIT_OK);
    let path = dir.path().join("meeting.ledger");
    let image = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = image.lines().map(str::to_owned).collect();
    // Flip one hex digit inside block 2's timestamp.
    let target = &mut lines[3];
    let pos = 2 * (8 + 32 + 7);
    let flipped = if &target[pos..pos + 1] == "0" { "1" } else { "0" };
    target.replace_range(pos..pos + 1, flipped);
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    let mut out = Vec::new();
    let mut err = Vec::new();
    let inspect = CliConfig {
        persist_dir: Some(dir.path().to_path_buf()),
        ..CliConfig::new(Command::Inspect)
    };
    assert_eq!(execute(&inspect, &mut out, &mut err), EXIT_CHECK);
    assert!(String::from_utf8(err).unwrap().contains("ledger=meeting"));
}
