use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use collacc::sim::{load_scenario, run, validate_scenario, Trace};
use similar::TextDiff;
use tracing_subscriber::EnvFilter;

/// Runs, validates and shows two-agent dialogue scenarios.
///
/// Exit codes: 0 success or golden match, 1 invalid scenario or golden
/// mismatch, 2 usage, I/O or parse errors.
#[derive(Debug, Parser)]
#[command(name = "collacc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its trace.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Compare the trace byte for byte against this file.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Write the trace here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario file and report every error with its location.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Print a trace as a transcript.
    Show {
        #[arg(long)]
        trace: PathBuf,
        /// 1 adds per-event state summaries, 2 adds final states and reports.
        #[arg(short, long, default_value_t = 0)]
        verbosity: u8,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .without_time()
        .init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            scenario,
            golden,
            out,
        } => cmd_run(&scenario, golden.as_deref(), out.as_deref()),
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Show { trace, verbosity } => cmd_show(&trace, verbosity),
    };
    ExitCode::from(code)
}

fn read(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        2
    })
}

fn cmd_run(scenario: &Path, golden: Option<&Path>, out: Option<&Path>) -> u8 {
    let text = match read(scenario) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let world = match load_scenario(&text) {
        Ok(w) => w,
        Err(errors) => {
            for e in &errors.0 {
                eprintln!("{}:{e}", scenario.display());
            }
            return 2;
        }
    };
    let trace = run(world).to_text();
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, &trace) {
                eprintln!("{}: {e}", path.display());
                return 2;
            }
        }
        None if golden.is_none() => print!("{trace}"),
        None => {}
    }
    let Some(golden) = golden else {
        return 0;
    };
    let expected = match read(golden) {
        Ok(t) => t,
        Err(code) => return code,
    };
    if expected == trace {
        return 0;
    }
    let diff = TextDiff::from_lines(&expected, &trace);
    eprint!(
        "{}",
        diff.unified_diff()
            .header(&golden.display().to_string(), "actual")
    );
    1
}

fn cmd_validate(scenario: &Path) -> u8 {
    let text = match read(scenario) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let errors = validate_scenario(&text);
    if errors.is_empty() {
        println!("{}: ok", scenario.display());
        return 0;
    }
    for e in &errors {
        println!("{}:{e}", scenario.display());
    }
    1
}

fn cmd_show(path: &Path, verbosity: u8) -> u8 {
    let text = match read(path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let trace = match Trace::parse(&text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}:{}: {}", path.display(), e.line, e.message);
            return 2;
        }
    };
    let status = match trace.status {
        Some(s) => format!(" status={} turns={}", s.as_str(), trace.turns),
        None => String::new(),
    };
    println!(
        "# {} mode={} context={}{status}",
        trace.scenario, trace.mode, trace.context
    );
    for e in &trace.events {
        if e.is_refusal() {
            println!(
                "[{}] turn {} {} refuses {}",
                e.index, e.turn, e.actor, e.payload
            );
        } else {
            println!(
                "[{}] turn {} {} -> {}: {} {}",
                e.index, e.turn, e.actor, e.addressee, e.act_type, e.payload
            );
        }
        if verbosity >= 1 {
            for s in &e.after {
                println!("      {s}");
            }
        }
    }
    if verbosity >= 2 {
        for f in &trace.finals {
            println!("final {} digest={}", f.agent, f.digest);
            for l in &f.lines {
                println!("  {l}");
            }
        }
    }
    0
}
