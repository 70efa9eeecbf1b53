//! Command-line front end. [`run`] parses arguments, runs one command,
//! prints its report and appends a record to the run log.
//!
//! Indices in every report are 0-based.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod report;
pub mod runlog;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use avta::vertices::Counters;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{code, CliError};
use crate::output::Staged;
use crate::report::{Report, WALL_TIME_KEY};
use crate::runlog::RunRecord;

pub const DEFAULT_RUN_LOG: &str = "avta-runs.jsonl";

/// What a command hands back before anything is printed or written.
#[derive(Debug)]
pub struct Outcome {
    /// First line on standard output.
    pub headline: String,
    pub report: Report,
    pub exit_code: i32,
    pub counters: Counters,
    /// Files written only once the report is complete.
    pub staged: Staged,
    pub summary: String,
}

impl Outcome {
    pub fn new(headline: String, report: Report, counters: Counters) -> Self {
        let summary = headline.clone();
        Self {
            headline,
            report,
            exit_code: code::OK,
            counters,
            staged: Staged::default(),
            summary,
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Membership(_) => "membership",
        Command::Vertices(_) => "vertices",
        Command::Lp(_) => "lp",
        Command::Gen(_) => "gen",
        Command::Bench(_) => "bench",
    }
}

/// Runs the program on `argv` (program name first) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let parameters: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let start = Instant::now();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let exit = if e.use_stderr() {
                code::USAGE
            } else {
                code::OK
            };
            let _ = e.print();
            if exit != code::OK {
                log_parse_failure(&parameters, exit, &e.kind().to_string(), start);
            }
            return exit;
        }
    };
    let name = command_name(&cli.command);
    let g = &cli.global;
    let result = commands::dispatch(&cli.command, g.seed).and_then(|o| emit(o, &cli, start));
    let (exit, counters, result_path, summary) = match result {
        Ok(done) => done,
        Err(e) => {
            eprintln!("error: {}", e.message);
            (e.code, Counters::default(), None, e.message)
        }
    };
    if !g.no_run_log {
        let record = RunRecord {
            command: name.to_string(),
            parameters,
            seed: g.seed,
            wall_time_ms: elapsed_ms(start),
            counters,
            exit_code: exit,
            result_path,
            summary,
        };
        let path = g
            .run_log
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_RUN_LOG));
        if let Err(e) = record.append_to(&path) {
            eprintln!("warning: cannot append to run log {}: {e}", path.display());
        }
    }
    exit
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

type Emitted = (i32, Counters, Option<PathBuf>, String);

fn emit(mut o: Outcome, cli: &Cli, start: Instant) -> Result<Emitted, CliError> {
    let g = &cli.global;
    o.report.push(WALL_TIME_KEY, elapsed_ms(start));
    let body = if g.json {
        format!("{}\n", o.report.json())
    } else {
        o.report.text()
    };
    let mut result_path = o.staged.paths().first().map(|p| p.to_path_buf());
    if let Some(path) = &g.report {
        o.staged.add(path.clone(), body.clone().into_bytes());
        result_path = Some(path.clone());
    }
    o.staged.commit()?;
    let mut out = std::io::stdout().lock();
    let printed = if g.report.is_some() {
        writeln!(out, "{}", o.headline)
    } else if g.json {
        out.write_all(body.as_bytes())
    } else {
        writeln!(out, "{}", o.headline).and_then(|_| out.write_all(body.as_bytes()))
    };
    // A closed pipe is not a failure of the command.
    let _ = printed;
    Ok((o.exit_code, o.counters, result_path, o.summary))
}

fn log_parse_failure(parameters: &[String], exit: i32, summary: &str, start: Instant) {
    if parameters.iter().any(|p| p == "--no-run-log") {
        return;
    }
    let path = parameters
        .iter()
        .position(|p| p == "--run-log")
        .and_then(|i| parameters.get(i + 1).cloned())
        .or_else(|| std::env::var("AVTA_RUN_LOG").ok())
        .unwrap_or_else(|| DEFAULT_RUN_LOG.into());
    let record = RunRecord {
        command: parameters.first().cloned().unwrap_or_default(),
        parameters: parameters.to_vec(),
        seed: 0,
        wall_time_ms: elapsed_ms(start),
        counters: Counters::default(),
        exit_code: exit,
        result_path: None,
        summary: format!("usage error: {summary}"),
    };
    let _ = record.append_to(std::path::Path::new(&path));
}
