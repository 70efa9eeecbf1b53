use avta::triangle::{solve_full, validate_witness, witness_separation, MembershipResult};
use avta::vertices::{membership_via_vertices, Counters};
use avta::PointSet;

use super::{avta_config, check_unit, push_counters, read_points, solver_config};
use crate::args::{MembershipArgs, ModeArg, RuleArg};
use crate::error::{code, CliError, CliResult};
use crate::report::Report;
use crate::Outcome;

fn parse_inline(s: &str) -> CliResult<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    CliError::usage(format!("--point: cannot read '{t}' as a finite number"))
                })
        })
        .collect()
}

fn read_query(a: &MembershipArgs) -> CliResult<Vec<f64>> {
    if let Some(s) = &a.point {
        return parse_inline(s);
    }
    let path = a
        .point_file
        .as_ref()
        .expect("clap requires one query source");
    let file = std::fs::File::open(path).map_err(|e| CliError {
        code: code::NO_INPUT,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut rows = avta::io::parse_csv_rows(file)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    if rows.len() != 1 {
        return Err(CliError::data(format!(
            "{}: expected one row, found {}",
            path.display(),
            rows.len()
        )));
    }
    Ok(rows.remove(0))
}

pub fn run(a: &MembershipArgs, seed: u64) -> CliResult<Outcome> {
    check_unit("epsilon", a.epsilon)?;
    if let Some(g) = a.gamma {
        check_unit("gamma", g)?;
    }
    let ps = read_points(&a.input)?;
    let p = read_query(a)?;
    if p.len() != ps.dim() {
        return Err(CliError::usage(format!(
            "query has {} coordinates, the point set has dimension {}",
            p.len(),
            ps.dim()
        )));
    }
    let solver = solver_config(a.mode, a.rule);
    let mut counters = Counters::default();
    let mut report = Report::new("membership");
    report
        .push("input", a.input.display().to_string())
        .push("n", ps.len())
        .push("m", ps.dim())
        .push("epsilon", a.epsilon)
        .push(
            "mode",
            if a.mode == ModeArg::Plain {
                "plain"
            } else {
                "strict"
            },
        )
        .push(
            "rule",
            if a.rule == RuleArg::Greedy {
                "greedy"
            } else {
                "first-fit"
            },
        )
        .push("via_vertices", a.via_vertices);

    let (res, working) = if a.via_vertices {
        let gamma = a.gamma.expect("clap requires --gamma");
        let cfg = avta_config(seed, solver);
        let (res, vr) = membership_via_vertices(&ps, &p, gamma, a.epsilon, &cfg)?;
        counters.add(&vr.counters);
        report
            .push("seed", seed)
            .push("gamma", gamma)
            .push("vertices", vr.sorted_indices());
        (res, vr.vertex_indices)
    } else {
        (
            solve_full(&ps, &p, a.epsilon, &solver)?,
            (0..ps.len()).collect(),
        )
    };
    counters.record(&res);
    push_result(&mut report, &ps, &working, &p, &res)?;
    push_counters(&mut report, &counters);
    report.push("iterations", res.iterations);

    let headline = if res.is_approx() { "approx" } else { "witness" };
    let mut out = Outcome::new(headline.to_string(), report, counters);
    if res.is_witness() {
        out.exit_code = code::NEGATIVE;
    }
    Ok(out)
}

fn push_result(
    report: &mut Report,
    ps: &PointSet,
    working: &[usize],
    p: &[f64],
    res: &MembershipResult,
) -> CliResult<()> {
    let iterate = ps.materialize(&res.combination)?;
    report
        .push(
            "result",
            if res.is_approx() {
                "approx_solution"
            } else {
                "witness"
            },
        )
        .push("distance", res.distance_to_query)
        .push("scale", res.scale)
        .push(
            "relative_distance",
            relative(res.distance_to_query, res.scale),
        )
        .push("iterate", iterate)
        .push("support", res.combination.support())
        .push(
            "weights",
            res.combination.iter().map(|(_, w)| w).collect::<Vec<f64>>(),
        );
    if res.is_witness() {
        report
            .push(
                "witness_valid",
                validate_witness(ps, working, p, &res.combination)?,
            )
            .push(
                "separation",
                witness_separation(ps, working, p, &res.combination)?,
            );
    }
    Ok(())
}

fn relative(d: f64, r: f64) -> f64 {
    if r > 0.0 {
        d / r
    } else {
        d
    }
}
