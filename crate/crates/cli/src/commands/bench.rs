//! Benchmark suites. Every cell gets its own seed derived from the master
//! seed and the cell coordinates, so a suite can be rerun cell by cell.
//! Wall times go to the CSV only; the report carries counters, which are
//! machine-independent.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use avta::datagen::{gen_hull_instance, Instance, InstanceSpec};
use avta::triangle::{solve_full, solve_membership, SolverConfig};
use avta::vertices::{avta_gamma, AvtaConfig, Counters};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::check_unit;
use crate::args::{BenchArgs, Suite};
use crate::error::{CliError, CliResult};
use crate::output::Staged;
use crate::report::Report;
use crate::Outcome;

/// Seed of cell `cell` of suite `suite`.
pub fn bench_seed(master: u64, suite: u32, cell: u32) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((suite as u64) << 32) | cell as u64);
    rng.random()
}

fn suite_id(s: Suite) -> u32 {
    match s {
        Suite::MembershipScaling => 1,
        Suite::FeasibilityAmortization => 2,
        Suite::VertexScaling => 3,
    }
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::MembershipScaling => "membership-scaling",
        Suite::FeasibilityAmortization => "feasibility-amortization",
        Suite::VertexScaling => "vertex-scaling",
    }
}

/// Alternating inside and outside queries. Inside ones are random convex
/// combinations of the vertices; outside ones continue the ray from the
/// vertex centroid through a vertex by half its length.
pub fn queries(inst: &Instance, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts: Vec<&[f64]> = inst
        .vertices
        .iter()
        .map(|&i| inst.points.point(i))
        .collect();
    let m = inst.points.dim();
    let k = verts.len() as f64;
    let mut centroid = vec![0.0; m];
    for v in &verts {
        for (c, x) in centroid.iter_mut().zip(*v) {
            *c += x / k;
        }
    }
    (0..count)
        .map(|q| {
            if q % 2 == 0 {
                let w: Vec<f64> = verts
                    .iter()
                    .map(|_| -(1.0 - rng.random::<f64>()).ln())
                    .collect();
                let s: f64 = w.iter().sum();
                let mut p = vec![0.0; m];
                for (wi, v) in w.iter().zip(&verts) {
                    for (o, x) in p.iter_mut().zip(*v) {
                        *o += wi / s * x;
                    }
                }
                p
            } else {
                let v = verts[rng.random_range(0..verts.len())];
                centroid
                    .iter()
                    .zip(v)
                    .map(|(c, x)| c + 1.5 * (x - c))
                    .collect()
            }
        })
        .collect()
}

struct Cell {
    x: usize,
    columns: Vec<(&'static str, f64)>,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn instance(a: &BenchArgs, n: usize, seed: u64) -> CliResult<Instance> {
    Ok(gen_hull_instance(&InstanceSpec::new(a.k, n, a.m, seed))?)
}

/// Direct solves against all points, returning the work and the verdicts.
fn direct(inst: &Instance, qs: &[Vec<f64>], eps: f64) -> CliResult<(Counters, Vec<bool>)> {
    let mut c = Counters::default();
    let mut v = Vec::with_capacity(qs.len());
    for q in qs {
        let r = solve_full(&inst.points, q, eps, &SolverConfig::default())?;
        c.record(&r);
        v.push(r.is_approx());
    }
    Ok((c, v))
}

/// Enumerates the vertices once, then solves every query against them.
fn pruned(
    inst: &Instance,
    qs: &[Vec<f64>],
    gamma: f64,
    eps: f64,
    seed: u64,
) -> CliResult<(Counters, Vec<bool>, usize)> {
    let vr = avta_gamma(&inst.points, gamma, &AvtaConfig::seeded(seed))?;
    let mut c = vr.counters;
    let mut v = Vec::with_capacity(qs.len());
    for q in qs {
        let r = solve_membership(
            &inst.points,
            &vr.vertex_indices,
            q,
            eps,
            None,
            &SolverConfig::default(),
        )?;
        c.record(&r);
        v.push(r.is_approx());
    }
    Ok((c, v, vr.len()))
}

const MEMBERSHIP_QUERIES: usize = 10;

fn validate(a: &BenchArgs) -> CliResult<()> {
    check_unit("gamma", a.gamma)?;
    check_unit("epsilon", a.epsilon)?;
    if a.sizes.is_empty() || a.sizes.contains(&0) {
        return Err(CliError::usage("--sizes must list positive integers"));
    }
    if a.k == 0 || a.m == 0 {
        return Err(CliError::usage("--k and --m must be positive"));
    }
    let cells: usize = match a.suite {
        Suite::FeasibilityAmortization => a.n.saturating_mul(a.m),
        _ => a
            .sizes
            .iter()
            .fold(0usize, |acc, &n| acc.saturating_add(n.saturating_mul(a.m))),
    };
    if cells > a.max_cells {
        return Err(CliError::usage(format!(
            "suite needs {cells} coordinates, above --max-cells {}",
            a.max_cells
        )));
    }
    let min_n = match a.suite {
        Suite::FeasibilityAmortization => a.n,
        _ => *a.sizes.iter().min().expect("nonempty"),
    };
    if a.k > min_n {
        return Err(CliError::usage(format!(
            "--k {} exceeds the smallest point count {min_n}",
            a.k
        )));
    }
    Ok(())
}

pub fn run(a: &BenchArgs, seed: u64) -> CliResult<Outcome> {
    validate(a)?;
    let sid = suite_id(a.suite);
    let mut rows = Vec::with_capacity(a.sizes.len());
    let mut total = Counters::default();
    let mut disagreements = 0usize;
    match a.suite {
        Suite::MembershipScaling => {
            for (i, &n) in a.sizes.iter().enumerate() {
                let s = bench_seed(seed, sid, i as u32);
                let inst = instance(a, n, s)?;
                let qs = queries(&inst, MEMBERSHIP_QUERIES, s ^ 1);
                let t = Instant::now();
                let (dc, dv) = direct(&inst, &qs, a.epsilon)?;
                let dt = ms(t);
                let t = Instant::now();
                let (pc, pv, nv) = pruned(&inst, &qs, a.gamma, a.epsilon, s)?;
                let pt = ms(t);
                disagreements += dv.iter().zip(&pv).filter(|(x, y)| x != y).count();
                total.add(&dc);
                total.add(&pc);
                rows.push(Cell {
                    x: n,
                    columns: vec![
                        ("vertices", nv as f64),
                        ("direct_ms", dt),
                        ("direct_work", dc.work as f64),
                        ("avta_query_ms", pt),
                        ("avta_query_work", pc.work as f64),
                        ("avta_membership_calls", pc.membership_calls as f64),
                    ],
                });
            }
        }
        Suite::FeasibilityAmortization => {
            let s = bench_seed(seed, sid, 0);
            let inst = instance(a, a.n, s)?;
            let most = *a.sizes.iter().max().expect("nonempty");
            let all = queries(&inst, most, s ^ 1);
            for &q in &a.sizes {
                let qs = &all[..q];
                let t = Instant::now();
                let (dc, dv) = direct(&inst, qs, a.epsilon)?;
                let dt = ms(t);
                let t = Instant::now();
                let (pc, pv, nv) = pruned(&inst, qs, a.gamma, a.epsilon, s)?;
                let pt = ms(t);
                disagreements += dv.iter().zip(&pv).filter(|(x, y)| x != y).count();
                total.add(&dc);
                total.add(&pc);
                rows.push(Cell {
                    x: q,
                    columns: vec![
                        ("vertices", nv as f64),
                        ("direct_ms", dt),
                        ("direct_work", dc.work as f64),
                        ("avta_prune_query_ms", pt),
                        ("avta_prune_query_work", pc.work as f64),
                    ],
                });
            }
        }
        Suite::VertexScaling => {
            for (i, &n) in a.sizes.iter().enumerate() {
                let s = bench_seed(seed, sid, i as u32);
                let inst = instance(a, n, s)?;
                let t = Instant::now();
                let vr = avta_gamma(&inst.points, a.gamma, &AvtaConfig::seeded(s))?;
                let dt = ms(t);
                total.add(&vr.counters);
                rows.push(Cell {
                    x: n,
                    columns: vec![
                        ("vertices", vr.len() as f64),
                        ("avta_ms", dt),
                        ("avta_membership_calls", vr.counters.membership_calls as f64),
                        ("avta_pivots", vr.counters.pivots as f64),
                        ("avta_work", vr.counters.work as f64),
                    ],
                });
            }
        }
    }

    let x_name = if a.suite == Suite::FeasibilityAmortization {
        "queries"
    } else {
        "n"
    };
    let plot_path = a.plot_data.clone().unwrap_or_else(|| {
        let mut s = a.out.as_os_str().to_owned();
        s.push(".plot.dat");
        PathBuf::from(s)
    });
    let mut report = Report::new("bench");
    report
        .push("suite", suite_name(a.suite))
        .push("seed", seed)
        .push("sizes", a.sizes.clone())
        .push("k", a.k)
        .push("m", a.m)
        .push("gamma", a.gamma)
        .push("epsilon", a.epsilon);
    if a.suite == Suite::FeasibilityAmortization {
        report.push("n", a.n);
    }
    for (i, row) in rows.iter().enumerate() {
        let counters: Vec<String> = row
            .columns
            .iter()
            .filter(|(name, _)| !name.ends_with("_ms"))
            .map(|(name, v)| format!("{name}={v}"))
            .collect();
        report.push(
            format!("row.{i}"),
            format!("{x_name}={} {}", row.x, counters.join(" ")),
        );
    }
    if a.suite != Suite::VertexScaling {
        report.push("disagreements", disagreements);
    }
    report
        .push("csv", a.out.display().to_string())
        .push("plot_data", plot_path.display().to_string());
    super::push_counters(&mut report, &total);

    let mut staged = Staged::default();
    staged.add(a.out.clone(), csv_table(x_name, &rows).into_bytes());
    staged.add(plot_path, plot_data(x_name, &rows).into_bytes());
    let mut out = Outcome::new(format!("{} rows", rows.len()), report, total);
    out.staged = staged;
    Ok(out)
}

fn csv_table(x_name: &str, rows: &[Cell]) -> String {
    let mut s = String::from(
        "# columns ending in _ms are wall-clock milliseconds and depend on the machine\n",
    );
    s.push_str(x_name);
    if let Some(first) = rows.first() {
        for (name, _) in &first.columns {
            s.push(',');
            s.push_str(name);
        }
    }
    s.push('\n');
    for r in rows {
        let _ = write!(s, "{}", r.x);
        for (_, v) in &r.columns {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// One block per column, separated by two blank lines.
fn plot_data(x_name: &str, rows: &[Cell]) -> String {
    let mut s = String::new();
    let Some(first) = rows.first() else {
        return s;
    };
    for (j, (name, _)) in first.columns.iter().enumerate() {
        if j > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# {name} vs {x_name}");
        for r in rows {
            let _ = writeln!(s, "{} {}", r.x, r.columns[j].1);
        }
    }
    s
}
