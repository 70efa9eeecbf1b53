//! Seeded synthetic instances with known vertices.
//!
//! A hull instance draws `K` vertices, fills in `n - K` convex combinations
//! with normalized uniform weights, optionally perturbs every point, and
//! shuffles the rows. A cone instance draws `K` nonnegative generator
//! columns and `n - K` nonnegative combinations of them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::lp::LinearSystem;
use crate::oracle::ExactSet;
use crate::points::PointSet;
use crate::triangle::{solve_membership, SolverConfig};

pub const MAX_RETRIES: usize = 100;

/// Above either bound the convex-position check uses the membership solver
/// instead of exact arithmetic.
pub const EXACT_CHECK_MAX_POINTS: usize = 40;
pub const EXACT_CHECK_MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VertexDist {
    /// `N(0, I)`.
    Gaussian,
    /// `N(0, 10 I)`.
    Gaussian10,
    /// Uniform on `[0, 1]^m`.
    Uniform01,
}

impl VertexDist {
    pub fn name(self) -> &'static str {
        match self {
            VertexDist::Gaussian => "gaussian",
            VertexDist::Gaussian10 => "gaussian10",
            VertexDist::Uniform01 => "uniform01",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(VertexDist::Gaussian),
            "gaussian10" => Ok(VertexDist::Gaussian10),
            "uniform01" => Ok(VertexDist::Uniform01),
            _ => Err(Error::InvalidInput(format!(
                "unknown vertex distribution {s:?} (gaussian, gaussian10, uniform01)"
            ))),
        }
    }

    fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            VertexDist::Gaussian => rng.sample(StandardNormal),
            VertexDist::Gaussian10 => 10f64.sqrt() * rng.sample::<f64, _>(StandardNormal),
            VertexDist::Uniform01 => rng.random::<f64>(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Noise {
    None,
    /// Independent `N(0, tau)` per coordinate; `tau` is the variance.
    Gaussian {
        tau: f64,
    },
    /// Independent uniform on `[-scale, scale]` per coordinate.
    Uniform {
        scale: f64,
    },
}

impl Noise {
    pub fn describe(&self) -> String {
        match self {
            Noise::None => "none".into(),
            Noise::Gaussian { tau } => format!("gaussian:{tau}"),
            Noise::Uniform { scale } => format!("uniform:{scale}"),
        }
    }

    /// Parses `none`, `gaussian:<tau>` or `uniform:<scale>`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidInput(format!(
                "bad noise spec {s:?} (none, gaussian:TAU, uniform:SCALE)"
            ))
        };
        if s == "none" {
            return Ok(Noise::None);
        }
        let (kind, val) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = val.parse().map_err(|_| bad())?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(bad());
        }
        match kind {
            "gaussian" => Ok(Noise::Gaussian { tau: v }),
            "uniform" => Ok(Noise::Uniform { scale: v }),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub vertex_dist: VertexDist,
    pub noise: Noise,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(k: usize, n: usize, m: usize, seed: u64) -> Self {
        Self {
            k,
            n,
            m,
            vertex_dist: VertexDist::Gaussian,
            noise: Noise::None,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 || self.m == 0 {
            return Err(Error::InvalidInput("K, n and m must be positive".into()));
        }
        if self.k > self.n {
            return Err(Error::InvalidInput(format!(
                "K = {} exceeds n = {}",
                self.k, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub points: PointSet,
    /// Row indices of the drawn vertices, ascending.
    pub vertices: Vec<usize>,
    /// Vertex draws rejected for not being in convex position.
    pub retries: usize,
    pub metadata: Vec<(String, String)>,
}

/// Whether every row is outside the hull of the others.
pub fn in_convex_position(rows: &[Vec<f64>]) -> Result<bool> {
    let k = rows.len();
    if k <= 1 {
        return Ok(true);
    }
    let m = rows[0].len();
    if k <= EXACT_CHECK_MAX_POINTS && m <= EXACT_CHECK_MAX_DIM {
        let exact = ExactSet::from_rows(rows);
        return Ok(exact.vertices().len() == k);
    }
    // A witness from the membership solver certifies a point lies outside
    // the hull of the others.
    let ps = PointSet::from_rows(rows)?;
    let scale = ps.diameter();
    if scale == 0.0 {
        return Ok(false);
    }
    let cfg = SolverConfig {
        scale: Some(scale),
        ..SolverConfig::default()
    };
    for i in 0..k {
        let others: Vec<usize> = (0..k).filter(|&j| j != i).collect();
        let r = solve_membership(&ps, &others, ps.point(i), 1e-3, None, &cfg)?;
        if r.is_approx() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn normalized_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.into_iter().map(|x| x / s).collect();
        }
    }
}

pub fn gen_hull_instance(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut retries = 0;
    let verts = loop {
        let verts: Vec<Vec<f64>> = (0..spec.k)
            .map(|_| {
                (0..spec.m)
                    .map(|_| spec.vertex_dist.sample(&mut rng))
                    .collect()
            })
            .collect();
        if in_convex_position(&verts)? {
            break verts;
        }
        retries += 1;
        if retries > MAX_RETRIES {
            return Err(Error::GenerationFailed {
                retries: MAX_RETRIES,
                reason: format!(
                    "{} vertices drawn in dimension {} were never in convex position",
                    spec.k, spec.m
                ),
            });
        }
    };
    let mut rows = verts.clone();
    for _ in spec.k..spec.n {
        let w = normalized_weights(&mut rng, spec.k);
        let mut p = vec![0.0; spec.m];
        for (wi, v) in w.iter().zip(&verts) {
            for (o, x) in p.iter_mut().zip(v) {
                *o += wi * x;
            }
        }
        rows.push(p);
    }
    match spec.noise {
        Noise::None => {}
        Noise::Gaussian { tau } => {
            let dist =
                Normal::new(0.0, tau.sqrt()).map_err(|e| Error::InvalidInput(e.to_string()))?;
            for x in rows.iter_mut().flatten() {
                *x += dist.sample(&mut rng);
            }
        }
        Noise::Uniform { scale } => {
            for x in rows.iter_mut().flatten() {
                *x += rng.random_range(-1.0..=1.0) * scale;
            }
        }
    }
    let mut order: Vec<usize> = (0..spec.n).collect();
    order.shuffle(&mut rng);
    // Row order[j] of the shuffled output is drawn row j.
    let mut shuffled = vec![Vec::new(); spec.n];
    for (j, row) in rows.into_iter().enumerate() {
        shuffled[order[j]] = row;
    }
    let mut vertices: Vec<usize> = order[..spec.k].to_vec();
    vertices.sort_unstable();
    let points = PointSet::from_rows(&shuffled)?;
    let metadata = vec![
        ("kind".into(), "hull".into()),
        ("seed".into(), spec.seed.to_string()),
        ("k".into(), spec.k.to_string()),
        ("n".into(), spec.n.to_string()),
        ("m".into(), spec.m.to_string()),
        ("vertex_dist".into(), spec.vertex_dist.name().into()),
        ("noise".into(), spec.noise.describe()),
        ("retries".into(), retries.to_string()),
        ("vertices".into(), join(&vertices)),
    ];
    Ok(Instance {
        points,
        vertices,
        retries,
        metadata,
    })
}

#[derive(Clone, Debug)]
pub struct ConeInstance {
    /// `b` is a random nonnegative combination of the generators.
    pub system: LinearSystem,
    /// Column indices of the generators, ascending.
    pub generators: Vec<usize>,
    pub retries: usize,
    pub metadata: Vec<(String, String)>,
}

/// Columns scaled onto the hyperplane where the coordinates sum to one,
/// with the last coordinate dropped when `m >= 2`.
///
/// The scaled points are affinely dependent, and rounding moves them off
/// the hyperplane by a few ulps, enough for an exact hull test to see every
/// point as a vertex. Dropping a coordinate is an affine bijection of the
/// hyperplane, so it keeps the hull structure and removes the defect.
pub fn simplex_chart(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    cols.iter()
        .map(|c| {
            let s: f64 = c.iter().sum();
            let keep = if c.len() >= 2 { c.len() - 1 } else { c.len() };
            c[..keep].iter().map(|x| x / s).collect()
        })
        .collect()
}

pub fn gen_cone_instance(
    k: usize,
    n: usize,
    m: usize,
    b_scale: f64,
    seed: u64,
) -> Result<ConeInstance> {
    if k == 0 || n == 0 || m == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "need 1 <= K <= n and m >= 1 (got K = {k}, n = {n}, m = {m})"
        )));
    }
    if !(b_scale.is_finite() && b_scale > 0.0) {
        return Err(Error::param("b_scale", b_scale, "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut retries = 0;
    let gens = loop {
        let gens: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
            .collect();
        let nonzero = gens.iter().all(|c| c.iter().sum::<f64>() > 0.0);
        if nonzero && in_convex_position(&simplex_chart(&gens))? {
            break gens;
        }
        retries += 1;
        if retries > MAX_RETRIES {
            return Err(Error::GenerationFailed {
                retries: MAX_RETRIES,
                reason: format!("{k} generators in dimension {m} were never all extreme"),
            });
        }
    };
    let mut cols = gens.clone();
    for _ in k..n {
        let coef: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * b_scale).collect();
        let mut col = vec![0.0; m];
        for (c, g) in coef.iter().zip(&gens) {
            for (o, x) in col.iter_mut().zip(g) {
                *o += c * x;
            }
        }
        cols.push(col);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut shuffled = vec![Vec::new(); n];
    for (j, col) in cols.into_iter().enumerate() {
        shuffled[order[j]] = col;
    }
    let mut generators = order[..k].to_vec();
    generators.sort_unstable();
    let mut b = vec![0.0; m];
    for g in &gens {
        let w = rng.random::<f64>();
        for (o, x) in b.iter_mut().zip(g) {
            *o += w * x;
        }
    }
    let system = LinearSystem::from_columns(&shuffled, b, None)?;
    let metadata = vec![
        ("kind".into(), "cone".into()),
        ("seed".into(), seed.to_string()),
        ("k".into(), k.to_string()),
        ("n".into(), n.to_string()),
        ("m".into(), m.to_string()),
        ("b_scale".into(), b_scale.to_string()),
        ("retries".into(), retries.to_string()),
        ("generators".into(), join(&generators)),
    ];
    Ok(ConeInstance {
        system,
        generators,
        retries,
        metadata,
    })
}

fn join(idx: &[usize]) -> String {
    idx.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_vertices_when_k_equals_n() {
        let inst = gen_hull_instance(&InstanceSpec::new(4, 4, 3, 1)).unwrap();
        assert_eq!(inst.vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = InstanceSpec {
            noise: Noise::Gaussian { tau: 0.01 },
            ..InstanceSpec::new(5, 30, 4, 9)
        };
        let a = gen_hull_instance(&spec).unwrap();
        let b = gen_hull_instance(&spec).unwrap();
        assert_eq!(a.points.as_slice(), b.points.as_slice());
        assert_eq!(a.vertices, b.vertices);
        let c = gen_hull_instance(&InstanceSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a.points.as_slice(), c.points.as_slice());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(gen_hull_instance(&InstanceSpec::new(5, 4, 3, 0)).is_err());
        assert!(gen_hull_instance(&InstanceSpec::new(0, 4, 3, 0)).is_err());
        assert!(gen_cone_instance(3, 2, 3, 10.0, 0).is_err());
        assert!(gen_cone_instance(3, 5, 3, 0.0, 0).is_err());
    }

    #[test]
    fn impossible_convex_position_fails_after_retries() {
        // three points on a line are never in convex position
        let r = gen_hull_instance(&InstanceSpec::new(3, 3, 1, 0));
        assert!(matches!(
            r,
            Err(Error::GenerationFailed {
                retries: MAX_RETRIES,
                ..
            })
        ));
    }

    #[test]
    fn parses_noise_and_distributions() {
        assert_eq!(Noise::parse("none").unwrap(), Noise::None);
        assert_eq!(
            Noise::parse("gaussian:0.5").unwrap(),
            Noise::Gaussian { tau: 0.5 }
        );
        assert_eq!(
            Noise::parse("uniform:2").unwrap(),
            Noise::Uniform { scale: 2.0 }
        );
        assert!(Noise::parse("gaussian:-1").is_err());
        assert!(Noise::parse("cauchy:1").is_err());
        assert_eq!(
            VertexDist::parse("uniform01").unwrap(),
            VertexDist::Uniform01
        );
        assert!(VertexDist::parse("x").is_err());
    }

    #[test]
    fn cone_without_redundant_columns() {
        let inst = gen_cone_instance(4, 4, 3, 10.0, 2).unwrap();
        assert_eq!(inst.generators, vec![0, 1, 2, 3]);
        assert_eq!(inst.system.cols(), 4);
    }
}
