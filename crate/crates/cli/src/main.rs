use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use alertagent::alert::{AlertBody, SnapshotReason};
use alertagent::{
    kb_load, kb_save, load_config, parse_scenario, read_log, run_scenario, AgentConfig, AlertKind, AlertLog,
    BatteryActionKind, Error, ItemKind, KnowledgeBase,
};

#[derive(Parser)]
#[command(name = "alertagent", version, about = "Context-aware alert agent simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the alert log.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        kb_out: Option<PathBuf>,
    },
    /// Check one input file without running anything.
    #[command(group(ArgGroup::new("input").required(true).args(["scenario", "kb", "config"])))]
    Validate {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Summarize an alert log.
    Report {
        #[arg(long)]
        log: PathBuf,
    },
}

/// Failure of one invocation, mapped to an exit code.
enum Failure {
    Invalid(String),
    Internal(String),
}

impl Failure {
    fn input(err: Error) -> Self {
        if err.is_invalid_input() {
            Failure::Invalid(err.to_string())
        } else {
            Failure::Internal(err.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            scenario,
            kb,
            config,
            out,
            kb_out,
        } => cmd_run(&scenario, &kb, config.as_deref(), &out, kb_out.as_deref()),
        Command::Validate { scenario, kb, config } => {
            if let Some(p) = scenario {
                read_scenario(&p).map(drop)
            } else if let Some(p) = kb {
                read_kb(&p).map(drop)
            } else if let Some(p) = config {
                read_config(Some(&p)).map(drop)
            } else {
                unreachable!("clap requires one input")
            }
            .map(|()| println!("ok"))
        }
        Command::Report { log } => cmd_report(&log),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

// A missing or unreadable input counts as invalid input.
fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn read_scenario(path: &Path) -> Result<alertagent::Scenario, Failure> {
    let name = path.display().to_string();
    let scenario = parse_scenario(open(path)?, &name).map_err(Failure::input)?;
    scenario
        .validate()
        .map_err(|m| Failure::Invalid(format!("{name}: {m}")))?;
    Ok(scenario)
}

fn read_kb(path: &Path) -> Result<KnowledgeBase, Failure> {
    kb_load(open(path)?, &path.display().to_string()).map_err(Failure::input)
}

fn read_config(path: Option<&Path>) -> Result<AgentConfig, Failure> {
    match path {
        Some(p) => load_config(open(p)?, &p.display().to_string()).map_err(Failure::input),
        None => Ok(AgentConfig::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn io_failure(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Internal(format!("{}: {e}", path.display()))
}

fn cmd_run(scenario: &Path, kb: &Path, config: Option<&Path>, out: &Path, kb_out: Option<&Path>) -> Outcome {
    let scenario_data = read_scenario(scenario)?;
    let kb_data = read_kb(kb)?;
    let config_data = read_config(config)?;
    let (log, updated) = run_scenario(&scenario_data, &config_data, kb_data).map_err(Failure::input)?;

    let mut writer = create(out)?;
    log.write_to(&mut writer).map_err(|e| Failure::Internal(format!("{}: {e}", out.display())))?;
    writer.flush().map_err(io_failure(out))?;
    if let Some(path) = kb_out {
        let mut writer = create(path)?;
        kb_save(&updated, &mut writer).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))?;
        writer.flush().map_err(io_failure(path))?;
    }
    for d in &log.diagnostics {
        eprintln!("note: {d}");
    }
    println!(
        "{} events, {} alerts, {} diagnostics",
        scenario_data.events.len(),
        log.entries.len(),
        log.diagnostics.len()
    );
    Ok(())
}

fn cmd_report(path: &Path) -> Outcome {
    let log = read_log(open(path)?, &path.display().to_string()).map_err(Failure::input)?;
    let stdout = io::stdout();
    let mut w = stdout.lock();
    write_report(&log, &mut w).map_err(|e| Failure::Internal(e.to_string()))
}

#[derive(Default)]
struct Missed {
    calls: u64,
    messages: u64,
}

fn missed_by_caller(log: &AlertLog) -> BTreeMap<&str, Missed> {
    let mut out: BTreeMap<&str, Missed> = BTreeMap::new();
    for alert in &log.entries {
        let (caller, item) = match &alert.body {
            AlertBody::SuppressNote { caller, item, .. } => (caller, *item),
            AlertBody::Ring { caller, answered: false } => (caller, ItemKind::Call),
            AlertBody::Beep { sender } => (sender, ItemKind::Message),
            AlertBody::BatteryAction {
                action: BatteryActionKind::DivertGroupA,
                caller: Some(caller),
                ..
            } => (caller, ItemKind::Call),
            _ => continue,
        };
        let entry = out.entry(caller.as_str()).or_default();
        match item {
            ItemKind::Call => entry.calls += 1,
            ItemKind::Message => entry.messages += 1,
        }
    }
    out
}

fn write_report(log: &AlertLog, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "alerts: {}", log.entries.len())?;
    for kind in AlertKind::ALL {
        writeln!(w, "{}: {}", kind, log.count(kind))?;
    }

    writeln!(w)?;
    writeln!(w, "missed by caller:")?;
    let missed = missed_by_caller(log);
    if missed.is_empty() {
        writeln!(w, "  none")?;
    }
    for (caller, m) in &missed {
        writeln!(w, "  {caller}: {} calls, {} messages", m.calls, m.messages)?;
    }

    writeln!(w)?;
    let last = log.entries.iter().rev().find_map(|a| match &a.body {
        AlertBody::SortedListSnapshot { reason, entries } => Some((a.t, reason, entries)),
        _ => None,
    });
    match last {
        None => writeln!(w, "no snapshot")?,
        Some((t, reason, entries)) => {
            let reason = reason_str(reason);
            writeln!(w, "callback list (t={t}, {reason}):")?;
            if entries.is_empty() {
                writeln!(w, "  empty")?;
            }
            for (i, e) in entries.iter().enumerate() {
                writeln!(
                    w,
                    "  {}. {} {} x{} (latest t={}, score {:.4})",
                    i + 1,
                    e.caller,
                    e.item.as_str(),
                    e.n,
                    e.latest_ms,
                    e.score
                )?;
            }
        }
    }
    Ok(())
}

fn reason_str(reason: &SnapshotReason) -> &'static str {
    match reason {
        SnapshotReason::Request => "request",
        SnapshotReason::BatteryCritical => "battery_critical",
    }
}
