use std::path::PathBuf;

use avta::datagen::{gen_cone_instance, gen_hull_instance, InstanceSpec, Noise, VertexDist};
use avta::vertices::Counters;

use super::join_indices;
use crate::args::GenArgs;
use crate::error::CliResult;
use crate::output::Staged;
use crate::report::Report;
use crate::Outcome;

fn meta_path(out: &std::path::Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn run(a: &GenArgs, seed: u64) -> CliResult<Outcome> {
    let mut report = Report::new("gen");
    let mut staged = Staged::default();
    let mut body = Vec::new();
    let (vertices, metadata, retries) = if a.cone {
        let inst = gen_cone_instance(a.k, a.n, a.m, a.b_scale, seed)?;
        inst.system.write(&mut body)?;
        report.push("kind", "cone").push("b_scale", a.b_scale);
        (inst.generators, inst.metadata, inst.retries)
    } else {
        let spec = InstanceSpec {
            vertex_dist: VertexDist::parse(&a.vertex_dist)?,
            noise: Noise::parse(&a.noise)?,
            ..InstanceSpec::new(a.k, a.n, a.m, seed)
        };
        let inst = gen_hull_instance(&spec)?;
        if a.binary {
            avta::io::write_binary(&inst.points, &mut body)?;
        } else {
            avta::io::write_csv(&inst.points, &mut body)?;
        }
        report
            .push("kind", "hull")
            .push("vertex_dist", spec.vertex_dist.name())
            .push("noise", spec.noise.describe())
            .push("binary", a.binary);
        (inst.vertices, inst.metadata, inst.retries)
    };
    let mut meta = Vec::new();
    avta::io::write_metadata(&metadata, &mut meta)?;
    let meta_out = meta_path(&a.out);
    staged.add(a.out.clone(), body);
    staged.add(meta_out.clone(), meta);
    report
        .push("seed", seed)
        .push("k", a.k)
        .push("n", a.n)
        .push("m", a.m)
        .push("retries", retries)
        .push("vertices", vertices.clone())
        .push("out", a.out.display().to_string())
        .push("meta", meta_out.display().to_string());
    let mut out = Outcome::new(join_indices(&vertices), report, Counters::default());
    out.staged = staged;
    out.summary = format!("wrote {}", a.out.display());
    Ok(out)
}
