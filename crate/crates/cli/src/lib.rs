//! Command-line driver: run scenarios, judge goals, inspect persisted
//! ledgers and emit test vectors.
//!
//! Every command returns an exit code: [`EXIT_OK`], [`EXIT_CHECK`] when a
//! goal or chain check fails, [`EXIT_USAGE`] for bad flags or input.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ledgermeet::ledger::Ledger;
use ledgermeet::record::signer_of;
use ledgermeet::sim::{check_goals, simulate, Registries, Run, Scenario, SimError};

pub mod vectors;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Persisted ledger files, in inspect order.
pub const LEDGER_FILES: [&str; 2] = ["identity.ledger", "meeting.ledger"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Run,
    Inspect,
    Vectors,
    Goals,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliConfig {
    pub command: Command,
    pub scenario_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub persist_dir: Option<PathBuf>,
}

impl CliConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            scenario_path: None,
            seed: None,
            output_path: None,
            persist_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.command {
            Command::Run | Command::Goals if self.scenario_path.is_none() => {
                Err("--scenario is required for run and goals".into())
            }
            Command::Inspect if self.persist_dir.is_none() && self.output_path.is_none() => {
                Err("inspect needs --persist <dir>".into())
            }
            _ => Ok(()),
        }
    }
}

/// Dispatches `config.command`.
pub fn execute(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Err(msg) = config.validate() {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    match config.command {
        Command::Run => cmd_run(config, out, err),
        Command::Goals => cmd_goals(config, out, err),
        Command::Inspect => cmd_inspect(config, out, err),
        Command::Vectors => cmd_vectors(config, out, err),
    }
}

fn load_scenario(config: &CliConfig, err: &mut dyn Write) -> Result<Scenario, i32> {
    let path = config.scenario_path.as_deref().ok_or(EXIT_USAGE)?;
    let text = fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "error: {}: {e}", path.display());
        EXIT_USAGE
    })?;
    let mut scenario = Scenario::parse(&text).map_err(|e| {
        let _ = writeln!(err, "error: {}: {e}", path.display());
        EXIT_USAGE
    })?;
    if let Some(seed) = config.seed {
        scenario.seed = seed;
    }
    Ok(scenario)
}

fn simulate_or_report(config: &CliConfig, err: &mut dyn Write) -> Result<Run, i32> {
    let scenario = load_scenario(config, err)?;
    simulate(&scenario, &Registries::builtin()).map_err(|e| {
        let path = config.scenario_path.as_deref().unwrap_or(Path::new("-"));
        let kind = match e {
            SimError::MalformedScenario { .. } => "malformed scenario",
            SimError::Script { .. } => "script error",
        };
        let _ = writeln!(err, "error: {}: {kind}: {e}", path.display());
        EXIT_USAGE
    })
}

fn emit(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write, text: &str) -> Result<(), i32> {
    let written = match &config.output_path {
        Some(path) => fs::write(path, text).map_err(|e| (path.display().to_string(), e)),
        None => out.write_all(text.as_bytes()).map_err(|e| ("stdout".to_owned(), e)),
    };
    written.map_err(|(target, e)| {
        let _ = writeln!(err, "error: writing {target}: {e}");
        EXIT_USAGE
    })
}

fn persist(dir: &Path, run: &Run) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, ledger) in LEDGER_FILES.iter().zip([&run.identity, &run.meeting]) {
        fs::write(dir.join(name), ledger.persist())?;
    }
    Ok(())
}

/// Runs the scenario, writes the transcript, then reports failing goals.
pub fn cmd_run(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let run = match simulate_or_report(config, err) {
        Ok(run) => run,
        Err(code) => return code,
    };
    if let Err(code) = emit(config, out, err, &run.transcript.render()) {
        return code;
    }
    if let Some(dir) = &config.persist_dir {
        if let Err(e) = persist(dir, &run) {
            let _ = writeln!(err, "error: persisting to {}: {e}", dir.display());
            return EXIT_USAGE;
        }
    }
    report_failures(&run, err)
}

fn report_failures(run: &Run, err: &mut dyn Write) -> i32 {
    let report = check_goals(&run.transcript);
    let mut code = EXIT_OK;
    for goal in report.failures() {
        let _ = writeln!(
            err,
            "goal {}=fail first=[{}]",
            goal.name,
            goal.first.as_deref().unwrap_or("")
        );
        code = EXIT_CHECK;
    }
    code
}

/// Runs the scenario and prints only the goal report.
pub fn cmd_goals(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let run = match simulate_or_report(config, err) {
        Ok(run) => run,
        Err(code) => return code,
    };
    let report = check_goals(&run.transcript);
    if let Err(code) = emit(config, out, err, &report.to_string()) {
        return code;
    }
    report_failures(&run, err)
}

/// Dumps every persisted ledger found in the directory.
pub fn cmd_inspect(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(dir) = config.persist_dir.as_deref().or(config.output_path.as_deref()) else {
        let _ = writeln!(err, "error: inspect needs --persist <dir>");
        return EXIT_USAGE;
    };
    let mut text = String::new();
    let mut found = 0;
    let mut code = EXIT_OK;
    for name in LEDGER_FILES {
        let path = dir.join(name);
        let Ok(image) = fs::read_to_string(&path) else {
            continue;
        };
        let ledger = match Ledger::load(&image) {
            Ok(ledger) => ledger,
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", path.display());
                return EXIT_USAGE;
            }
        };
        found += 1;
        let intact = ledger.verify_chain();
        let header = format!(
            "ledger={} blocks={} head={} chain={}\n",
            ledger.kind(),
            ledger.len(),
            ledger.head().block_hash().to_hex(),
            if intact { "ok" } else { "broken" }
        );
        if !intact {
            let _ = write!(err, "{header}");
            code = EXIT_CHECK;
        }
        text.push_str(&header);
        text.push_str(&ledger.dump(signer_of));
    }
    if found == 0 {
        let _ = writeln!(err, "error: no persisted ledgers in {}", dir.display());
        return EXIT_USAGE;
    }
    if let Err(c) = out.write_all(text.as_bytes()) {
        let _ = writeln!(err, "error: writing stdout: {c}");
        return EXIT_USAGE;
    }
    code
}

/// Emits the vector file for `--seed`, or the default seed.
pub fn cmd_vectors(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let seed = config.seed.unwrap_or(vectors::DEFAULT_SEED);
    let text = vectors::render(&vectors::generate(seed));
    match emit(config, out, err, &text) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}
