use std::path::{Path, PathBuf};

use avta::lp::{
    cone_feasibility, prune_columns_feasibility, prune_columns_optimization, ConeCertificate,
    ConeVerdict, LinearSystem,
};
use avta::oracle::{solve_lp_f64, LpOutcome};

use super::{avta_config, check_unit, join_indices, push_counters};
use crate::args::LpArgs;
use crate::error::{code, CliError, CliResult};
use crate::report::Report;
use crate::Outcome;

fn read_system(path: &Path) -> CliResult<LinearSystem> {
    LinearSystem::read_file(path).map_err(|e| match e {
        avta::Error::Io(io) => CliError {
            code: code::NO_INPUT,
            message: format!("cannot read {}: {io}", path.display()),
        },
        other => CliError::data(format!("{}: {other}", path.display())),
    })
}

fn default_output(system: &Path) -> PathBuf {
    let mut s = system.as_os_str().to_owned();
    s.push(".reduced.csv");
    PathBuf::from(s)
}

fn system_bytes(sys: &LinearSystem) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    sys.write(&mut buf)?;
    Ok(buf)
}

fn outcome_name(o: &LpOutcome) -> &'static str {
    match o {
        LpOutcome::Infeasible => "infeasible",
        LpOutcome::Unbounded => "unbounded",
        LpOutcome::Optimal { .. } => "optimal",
    }
}

pub fn run(a: &LpArgs, seed: u64) -> CliResult<Outcome> {
    check_unit("gamma", a.gamma)?;
    check_unit("epsilon", a.epsilon)?;
    let sys = read_system(&a.system)?;
    let output = a
        .output
        .clone()
        .unwrap_or_else(|| default_output(&a.system));
    let cfg = avta_config(seed, Default::default());

    let mut report = Report::new("lp");
    report
        .push("system", a.system.display().to_string())
        .push("rows", sys.rows())
        .push("columns", sys.cols())
        .push("gamma", a.gamma)
        .push("seed", seed)
        .push("dedup", a.dedup);

    let mut infeasible = false;
    let (kept, reduced, counters, verdict) = if a.cone {
        if a.dedup {
            return Err(CliError::usage(
                "--dedup applies to --feasibility and --optimize",
            ));
        }
        let out = cone_feasibility(&sys, a.gamma, a.epsilon, &cfg)?;
        let counters = out.report.as_ref().map(|r| r.counters).unwrap_or_default();
        report
            .push("task", "cone")
            .push("epsilon", a.epsilon)
            .push("anchor", out.anchor.clone());
        let verdict = match &out.verdict {
            ConeVerdict::Feasible { x, residual } => {
                report
                    .push("verdict", "feasible")
                    .push("x", x.clone())
                    .push("residual", *residual);
                "feasible"
            }
            ConeVerdict::Infeasible(cert) => {
                infeasible = true;
                report.push("verdict", "infeasible");
                match cert {
                    ConeCertificate::AnchorSeparates { anchor_dot_b, .. } => {
                        report
                            .push("certificate", "anchor_separates")
                            .push("anchor_dot_b", *anchor_dot_b);
                    }
                    ConeCertificate::Witness {
                        direction,
                        separation,
                    } => {
                        report
                            .push("certificate", "witness")
                            .push("direction", direction.clone())
                            .push("separation", *separation);
                    }
                }
                "infeasible"
            }
        };
        let reduced = if out.kept.is_empty() {
            None
        } else {
            Some(sys.select_columns(&out.kept)?)
        };
        (out.kept, reduced, counters, Some(verdict))
    } else if a.optimize {
        let c = sys.c.clone().ok_or_else(|| {
            CliError::data("--optimize needs a cost row c after b in the system file")
        })?;
        let p = prune_columns_optimization(&sys, &c, a.gamma, &cfg, a.dedup)?;
        report.push("task", "optimize");
        (p.kept, Some(p.system), p.report.counters, None)
    } else {
        let p = prune_columns_feasibility(&sys, a.gamma, &cfg, a.dedup)?;
        report.push("task", "feasibility");
        (p.kept, Some(p.system), p.report.counters, None)
    };

    report
        .push("kept", kept.clone())
        .push("kept_count", kept.len());
    if a.solve {
        let full = solve_lp_f64(&sys.a, &sys.b, sys.c.as_deref().filter(|_| a.optimize));
        report.push("full_outcome", outcome_name(&full));
        if let Some(v) = full.value_f64() {
            report.push("full_value", v);
        }
        match &reduced {
            Some(r) => {
                let red = solve_lp_f64(&r.a, &r.b, r.c.as_deref().filter(|_| a.optimize));
                report.push("reduced_outcome", outcome_name(&red));
                if let Some(v) = red.value_f64() {
                    report.push("reduced_value", v);
                }
                report.push("outcomes_agree", full.is_feasible() == red.is_feasible());
            }
            None => {
                report.push("reduced_outcome", "none");
            }
        }
        if verdict.is_none() {
            infeasible = !full.is_feasible();
            report.push(
                "verdict",
                if infeasible { "infeasible" } else { "feasible" },
            );
        }
    }
    let mut staged = crate::output::Staged::default();
    match &reduced {
        Some(r) => {
            staged.add(output.clone(), system_bytes(r)?);
            report.push("reduced_path", output.display().to_string());
        }
        None => {
            report.push("reduced_path", "none");
        }
    }
    push_counters(&mut report, &counters);

    let headline = match verdict {
        Some(v) if kept.is_empty() => v.to_string(),
        Some(v) => format!("{v}: {}", join_indices(&kept)),
        None => join_indices(&kept),
    };
    let mut out = Outcome::new(headline, report, counters);
    out.staged = staged;
    out.summary = format!("{} of {} columns kept", kept.len(), sys.cols());
    if infeasible {
        out.exit_code = code::NEGATIVE;
    }
    Ok(out)
}
