use avta::points::DiameterMode;
use avta::robust::{
    avta_robust, avta_robust_k, multi_projection_vote, sigma_from_gamma, PruneCertificate,
};
use avta::vertices::{avta_gamma, avta_k, avta_t, VertexCertificate, VertexReport};
use avta::RobustnessParams;

use super::{avta_config, check_unit, join_indices, push_counters, read_points, solver_config};
use crate::args::VerticesArgs;
use crate::error::{CliError, CliResult};
use crate::report::Report;
use crate::Outcome;

fn validate(a: &VerticesArgs) -> CliResult<()> {
    for (name, v) in [("gamma", a.gamma), ("t", a.t), ("sigma", a.sigma)] {
        if let Some(v) = v {
            check_unit(name, v)?;
        }
    }
    if a.k == Some(0) {
        return Err(CliError::usage("--k must be positive"));
    }
    if !(a.eps_perturb.is_finite() && a.eps_perturb >= 0.0) {
        return Err(CliError::usage(
            "--eps-perturb must be finite and nonnegative",
        ));
    }
    if a.project == Some(0) || a.target_dim == Some(0) || a.top == Some(0) {
        return Err(CliError::usage(
            "--project, --target-dim and --top must be positive",
        ));
    }
    if a.robust && a.gamma.is_none() && a.sigma.is_none() && a.k.is_none() {
        return Err(CliError::usage("--robust needs --sigma, --gamma or --k"));
    }
    Ok(())
}

pub fn run(a: &VerticesArgs, seed: u64) -> CliResult<Outcome> {
    validate(a)?;
    let full = read_points(&a.input)?;
    // Indices below refer to `ps`; `reps` maps them back to input rows.
    let (ps, reps) = if a.dedup {
        let reps = full.distinct_representatives();
        (full.subset(&reps)?, Some(reps))
    } else {
        (full, None)
    };
    let orig = |i: usize| reps.as_ref().map_or(i, |r| r[i]);
    let orig_all = |v: &[usize]| -> Vec<usize> { v.iter().map(|&i| orig(i)).collect() };

    let mut cfg = avta_config(seed, solver_config(a.mode, a.rule));
    if let Some(threshold) = a.approx_diameter {
        cfg.diameter_mode = DiameterMode::Auto { threshold };
    }

    let mut report = Report::new("vertices");
    report
        .push("input", a.input.display().to_string())
        .push("n", ps.len())
        .push("m", ps.dim())
        .push("seed", seed)
        .push("dedup", a.dedup);
    if reps.is_some() {
        report.push("distinct_points", ps.len());
    }

    let (vertices, counters) = if a.robust {
        let pr = if let Some(k) = a.k {
            report.push("mode", "robust_k").push("k", k);
            avta_robust_k(&ps, k, a.eps_perturb, &cfg)?
        } else {
            let sigma = match (a.sigma, a.gamma) {
                (Some(s), _) => s,
                (None, Some(g)) => {
                    let params = RobustnessParams::measure(&ps);
                    if params.rho_star == 0.0 {
                        return Err(CliError::data(
                            "the input has repeated points, so sigma cannot be derived from gamma; pass --dedup or --sigma",
                        ));
                    }
                    report.push("gamma", g).push("rho_star", params.rho_star);
                    sigma_from_gamma(g, params.rho_star, params.diameter)?
                }
                (None, None) => unreachable!("checked in validate"),
            };
            report.push("mode", "robust");
            avta_robust(&ps, sigma, a.eps_perturb, &cfg)?
        };
        let mut v = orig_all(&pr.pruned_indices);
        v.sort_unstable();
        report
            .push("sigma", pr.sigma_used)
            .push("eps_perturb", pr.epsilon_assumed)
            .push("diameter", pr.phase_one.scale.value)
            .push("vertices", v.clone())
            .push("count", v.len())
            .push("superset", orig_all(&pr.superset_indices))
            .push("removed", orig_all(&pr.removed_indices));
        for c in &pr.certificates {
            let line = match *c {
                PruneCertificate::Removed { distance, .. } => {
                    format!("removed distance={distance}")
                }
                PruneCertificate::Kept {
                    separation,
                    distance,
                    ..
                } => format!("kept separation={separation} distance={distance}"),
            };
            report.push(format!("certificate.{}", orig(c.index())), line);
        }
        (v, pr.counters)
    } else if let Some(rounds) = a.project {
        let gamma = a.gamma.expect("clap requires --gamma");
        let k = a.top.unwrap_or(ps.len());
        let vote = multi_projection_vote(&ps, k, gamma, rounds, a.target_dim, &cfg)?;
        let selected: Vec<usize> = match a.top {
            Some(_) => vote.selected.clone(),
            None => vote
                .selected
                .iter()
                .copied()
                .filter(|i| 2 * count_of(&vote.frequencies, *i) > rounds)
                .collect(),
        };
        let mut v = orig_all(&selected);
        v.sort_unstable();
        report
            .push("mode", "project")
            .push("gamma", gamma)
            .push("rounds", rounds)
            .push("target_dim", vote.target_dim)
            .push("vertices", v.clone())
            .push("count", v.len())
            .push("by_frequency", orig_all(&selected));
        if a.top.is_some() {
            report.push("shortfall", vote.shortfall);
        }
        let freq = vote
            .frequencies
            .iter()
            .map(|&(i, c)| format!("{}:{c}", orig(i)))
            .collect::<Vec<_>>()
            .join(" ");
        report.push("frequencies", freq);
        for (r, s) in vote.rounds.iter().enumerate() {
            report.push(
                format!("round.{r}"),
                format!("map_seed={} avta_seed={}", s.map, s.avta),
            );
        }
        (v, vote.counters)
    } else {
        let vr = if let Some(g) = a.gamma {
            avta_gamma(&ps, g, &cfg)?
        } else if let Some(k) = a.k {
            avta_k(&ps, k, &cfg)?
        } else {
            avta_t(&ps, a.t.expect("clap requires one mode"), &cfg)?
        };
        let v = orig_all(&vr.sorted_indices());
        push_vertex_report(&mut report, &vr, &v, &orig);
        (v, vr.counters)
    };
    push_counters(&mut report, &counters);
    let mut out = Outcome::new(join_indices(&vertices), report, counters);
    out.summary = format!("{} vertices", vertices.len());
    Ok(out)
}

fn count_of(freq: &[(usize, usize)], i: usize) -> usize {
    freq.iter().find(|&&(j, _)| j == i).map_or(0, |&(_, c)| c)
}

fn push_vertex_report(
    report: &mut Report,
    vr: &VertexReport,
    sorted: &[usize],
    orig: &dyn Fn(usize) -> usize,
) {
    report.push("mode", vr.mode.name());
    if let Some(g) = vr.gamma_used {
        report.push("gamma", g);
    }
    if let Some(t) = vr.t_used {
        report.push("t", t);
    }
    report
        .push("threshold", vr.threshold)
        .push("diameter", vr.scale.value)
        .push("diameter_approximate", vr.scale.approximate)
        .push("vertices", sorted.to_vec())
        .push("count", sorted.len())
        .push(
            "discovery_order",
            vr.vertex_indices
                .iter()
                .map(|&i| orig(i))
                .collect::<Vec<usize>>(),
        );
    for (&i, c) in vr.vertex_indices.iter().zip(&vr.certificates) {
        let line = match c {
            VertexCertificate::FarthestInit => "farthest_init".to_string(),
            VertexCertificate::Witness { query, support, .. } => {
                let s: Vec<usize> = support.iter().map(|&j| orig(j)).collect();
                format!(
                    "witness query={} support={}",
                    orig(*query),
                    join_indices(&s)
                )
            }
        };
        report.push(format!("certificate.{}", orig(i)), line);
    }
}
