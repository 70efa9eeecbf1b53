mod bench;
mod gen;
mod lp;
mod membership;
mod vertices;

use std::path::Path;

use avta::triangle::{PivotMode, PivotRule, SolverConfig};
use avta::vertices::{AvtaConfig, Counters};

use crate::args::{Command, ModeArg, RuleArg};
use crate::error::{CliError, CliResult};
use crate::report::Report;
use crate::Outcome;

pub use bench::bench_seed;

pub fn dispatch(command: &Command, seed: u64) -> CliResult<Outcome> {
    match command {
        Command::Membership(a) => membership::run(a, seed),
        Command::Vertices(a) => vertices::run(a, seed),
        Command::Lp(a) => lp::run(a, seed),
        Command::Gen(a) => gen::run(a, seed),
        Command::Bench(a) => bench::run(a, seed),
    }
}

fn solver_config(mode: ModeArg, rule: RuleArg) -> SolverConfig {
    SolverConfig {
        mode: match mode {
            ModeArg::Plain => PivotMode::Plain,
            ModeArg::Strict => PivotMode::Strict,
        },
        rule: match rule {
            RuleArg::Greedy => PivotRule::Greedy,
            RuleArg::FirstFit => PivotRule::FirstFit,
        },
        ..SolverConfig::default()
    }
}

fn avta_config(seed: u64, solver: SolverConfig) -> AvtaConfig {
    AvtaConfig {
        solver,
        ..AvtaConfig::seeded(seed)
    }
}

fn read_points(path: &Path) -> CliResult<avta::PointSet> {
    avta::io::read_points(path).map_err(|e| match e {
        avta::Error::Io(io) => CliError {
            code: crate::error::code::NO_INPUT,
            message: format!("cannot read {}: {io}", path.display()),
        },
        other => CliError::data(format!("{}: {other}", path.display())),
    })
}

fn push_counters(r: &mut Report, c: &Counters) {
    r.push("membership_calls", c.membership_calls)
        .push("pivots", c.pivots)
        .push("pivot_searches", c.pivot_searches)
        .push("work", c.work)
        .push("witnesses", c.witnesses)
        .push("discarded", c.discarded);
}

fn join_indices(v: &[usize]) -> String {
    v.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn check_unit(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "--{name} must lie in (0, 1), got {v}"
        )))
    }
}
