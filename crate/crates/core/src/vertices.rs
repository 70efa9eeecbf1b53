//! Vertex enumeration by repeated membership tests against a growing set of
//! certified vertices.
//!
//! The set `S_hat` starts with the point farthest from the first input
//! point. Remaining points are drawn at random and tested against
//! `conv(S_hat)`. A point within the threshold is discarded. A witness `p'`
//! for `v` gives the direction `c = v - p'`; the maximizers of `c.x` over
//! the points outside `S_hat` span a face of the hull, and the point of that
//! face farthest from a random member of it is a new vertex. `v` is then
//! re-tested from the old witness until it is discarded or itself found to
//! be a vertex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_unit_open, Error, Result};
use crate::points::{dot, squared_distance, Diameter, DiameterMode, PointSet};
use crate::triangle::{solve_membership, MembershipResult, SolverConfig, SolverState};

/// Smallest `gamma` tried by [`avta_k`].
pub const GAMMA_FLOOR: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Clone, Debug, PartialEq)]
pub struct AvtaConfig {
    pub seed: u64,
    /// Absolute band below the maximum of `c.x` that still counts as a
    /// maximizer.
    pub support_tolerance: f64,
    pub solver: SolverConfig,
    pub diameter_mode: DiameterMode,
}

impl Default for AvtaConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            support_tolerance: 1e-9,
            solver: SolverConfig::default(),
            diameter_mode: DiameterMode::Exact,
        }
    }
}

impl AvtaConfig {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexMode {
    Gamma,
    KSearch,
    TApprox,
}

impl VertexMode {
    pub fn name(self) -> &'static str {
        match self {
            VertexMode::Gamma => "gamma",
            VertexMode::KSearch => "k_search",
            VertexMode::TApprox => "t_approx",
        }
    }
}

/// Why a point was added to the vertex set.
#[derive(Clone, Debug, PartialEq)]
pub enum VertexCertificate {
    FarthestInit,
    Witness {
        /// The point whose membership test produced the witness.
        query: usize,
        /// `c = v - p'`.
        direction: Vec<f64>,
        /// Maximizers of `c.x` outside the vertex set at that moment.
        support: Vec<usize>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub membership_calls: usize,
    pub pivots: usize,
    pub pivot_searches: usize,
    /// Working-set entries touched by pivot searches and steps.
    pub work: usize,
    pub witnesses: usize,
    pub discarded: usize,
}

impl Counters {
    pub fn add(&mut self, other: &Counters) {
        self.membership_calls += other.membership_calls;
        self.pivots += other.pivots;
        self.pivot_searches += other.pivot_searches;
        self.work += other.work;
        self.witnesses += other.witnesses;
        self.discarded += other.discarded;
    }

    pub fn record(&mut self, r: &MembershipResult) {
        self.membership_calls += 1;
        self.pivots += r.iterations;
        self.pivot_searches += r.pivot_searches;
        self.work += r.work;
        if r.is_witness() {
            self.witnesses += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexReport {
    /// Vertex indices in discovery order.
    pub vertex_indices: Vec<usize>,
    pub certificates: Vec<VertexCertificate>,
    pub mode: VertexMode,
    pub gamma_used: Option<f64>,
    pub t_used: Option<f64>,
    /// Relative tolerance of the membership tests.
    pub threshold: f64,
    pub scale: Diameter,
    pub seed: u64,
    pub counters: Counters,
}

impl VertexReport {
    pub fn len(&self) -> usize {
        self.vertex_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_indices.is_empty()
    }

    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut v = self.vertex_indices.clone();
        v.sort_unstable();
        v
    }
}

/// Index in `among` farthest from `from`; ties go to the smallest index.
pub fn farthest(ps: &PointSet, from: &[f64], among: &[usize]) -> Result<usize> {
    if from.len() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            got: from.len(),
        });
    }
    let mut best: Option<(usize, f64)> = None;
    for &i in among {
        ps.check_index(i)?;
        let d = squared_distance(from, ps.point(i));
        let better = match best {
            None => true,
            Some((b, bd)) => d > bd || (d == bd && i < b),
        };
        if better {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidInput("farthest point of an empty list".into()))
}

struct Enumeration {
    vertices: Vec<usize>,
    certificates: Vec<VertexCertificate>,
    counters: Counters,
    scale: Diameter,
}

/// The main loop with membership tolerance `tol` relative to the diameter.
fn enumerate(ps: &PointSet, tol: f64, config: &AvtaConfig) -> Result<Enumeration> {
    let n = ps.len();
    let scale = ps.diameter_with(config.diameter_mode);
    let all: Vec<usize> = (0..n).collect();
    let first = farthest(ps, ps.point(0), &all)?;
    let mut vertices = vec![first];
    let mut certificates = vec![VertexCertificate::FarthestInit];
    let mut in_hat = vec![false; n];
    in_hat[first] = true;
    let mut remaining: Vec<usize> = (0..n).filter(|&i| i != first).collect();
    let mut counters = Counters::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let solver = SolverConfig {
        scale: Some(scale.value),
        ..config.solver.clone()
    };

    while !remaining.is_empty() {
        let pick = rng.random_range(0..remaining.len());
        let v = remaining.swap_remove(pick);
        let query = ps.point(v);
        let mut state = SolverState::new(ps, &vertices, query, None)?;
        loop {
            let res = state.run(tol, scale.value, &solver, None)?;
            counters.record(&res);
            if res.is_approx() {
                counters.discarded += 1;
                break;
            }
            let it = ps.materialize(&res.combination)?;
            let c: Vec<f64> = query.iter().zip(&it).map(|(a, b)| a - b).collect();
            let scores: Vec<(usize, f64)> = (0..n)
                .filter(|&i| !in_hat[i])
                .map(|i| (i, dot(&c, ps.point(i))))
                .collect();
            let top = scores
                .iter()
                .map(|&(_, s)| s)
                .fold(f64::NEG_INFINITY, f64::max);
            let support: Vec<usize> = scores
                .iter()
                .filter(|&&(_, s)| s >= top - config.support_tolerance)
                .map(|&(i, _)| i)
                .collect();
            let anchor = support[rng.random_range(0..support.len())];
            let found = farthest(ps, ps.point(anchor), &support)?;
            in_hat[found] = true;
            vertices.push(found);
            certificates.push(VertexCertificate::Witness {
                query: v,
                direction: c,
                support,
            });
            if let Some(pos) = remaining.iter().position(|&i| i == found) {
                remaining.swap_remove(pos);
            }
            if found == v {
                break;
            }
            state.extend(found)?;
        }
    }
    Ok(Enumeration {
        vertices,
        certificates,
        counters,
        scale,
    })
}

/// Vertex enumeration for a set whose robustness relative to its diameter
/// is at least `gamma`.
pub fn avta_gamma(ps: &PointSet, gamma: f64, config: &AvtaConfig) -> Result<VertexReport> {
    check_unit_open("gamma", gamma)?;
    let e = enumerate(ps, gamma / 2.0, config)?;
    Ok(VertexReport {
        vertex_indices: e.vertices,
        certificates: e.certificates,
        mode: VertexMode::Gamma,
        gamma_used: Some(gamma),
        t_used: None,
        threshold: gamma / 2.0,
        scale: e.scale,
        seed: config.seed,
        counters: e.counters,
    })
}

/// Halves `gamma` from one half until at least `k` vertices are found.
/// Counters accumulate over all attempts.
pub fn avta_k(ps: &PointSet, k: usize, config: &AvtaConfig) -> Result<VertexReport> {
    if k == 0 || k > ps.len() {
        return Err(Error::InvalidInput(format!(
            "K = {k} must lie between 1 and the number of points ({})",
            ps.len()
        )));
    }
    let mut gamma = 0.5;
    let mut total = Counters::default();
    let mut found = 0;
    while gamma >= GAMMA_FLOOR {
        let mut report = avta_gamma(ps, gamma, config)?;
        total.add(&report.counters);
        found = found.max(report.len());
        if report.len() >= k {
            report.mode = VertexMode::KSearch;
            report.counters = total;
            return Ok(report);
        }
        gamma /= 2.0;
    }
    Err(Error::GammaFloor {
        floor: GAMMA_FLOOR,
        found,
        wanted: k,
    })
}

/// A subset whose hull is within `t * R` of every input point.
pub fn avta_t(ps: &PointSet, t: f64, config: &AvtaConfig) -> Result<VertexReport> {
    check_unit_open("t", t)?;
    let e = enumerate(ps, t / 2.0, config)?;
    Ok(VertexReport {
        vertex_indices: e.vertices,
        certificates: e.certificates,
        mode: VertexMode::TApprox,
        gamma_used: None,
        t_used: Some(t),
        threshold: t / 2.0,
        scale: e.scale,
        seed: config.seed,
        counters: e.counters,
    })
}

/// Membership of `p` decided against the vertices found by [`avta_gamma`].
pub fn membership_via_vertices(
    ps: &PointSet,
    p: &[f64],
    gamma: f64,
    epsilon: f64,
    config: &AvtaConfig,
) -> Result<(MembershipResult, VertexReport)> {
    check_unit_open("epsilon", epsilon)?;
    let report = avta_gamma(ps, gamma, config)?;
    let res = solve_membership(ps, &report.vertex_indices, p, epsilon, None, &config.solver)?;
    Ok((res, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_center() -> PointSet {
        PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]).unwrap()
    }

    #[test]
    fn farthest_examples() {
        let ps = PointSet::from_rows(&[[2.0, 0.0], [1.0, 0.5]]).unwrap();
        assert_eq!(farthest(&ps, &[0.0, 0.0], &[0, 1]).unwrap(), 0);
        let seg = PointSet::from_rows(&[[0.0], [3.0]]).unwrap();
        assert_eq!(farthest(&seg, &[0.0], &[0, 1]).unwrap(), 1);
        assert_eq!(farthest(&seg, &[1.5], &[1, 0]).unwrap(), 0);
        assert!(farthest(&seg, &[0.0], &[]).is_err());
    }

    #[test]
    fn square_corners() {
        let ps = square_center();
        for seed in 0..10 {
            let r = avta_gamma(&ps, 0.4, &AvtaConfig::seeded(seed)).unwrap();
            assert_eq!(r.sorted_indices(), vec![0, 1, 2, 3]);
            assert_eq!(r.certificates[0], VertexCertificate::FarthestInit);
            assert_eq!(r.counters.discarded, 1);
        }
    }

    #[test]
    fn singleton() {
        let ps = PointSet::from_rows(&[[3.0, -1.0]]).unwrap();
        assert_eq!(
            avta_gamma(&ps, 0.3, &AvtaConfig::default())
                .unwrap()
                .vertex_indices,
            vec![0]
        );
        assert_eq!(
            avta_t(&ps, 0.3, &AvtaConfig::default())
                .unwrap()
                .vertex_indices,
            vec![0]
        );
        assert_eq!(
            avta_k(&ps, 1, &AvtaConfig::default())
                .unwrap()
                .vertex_indices,
            vec![0]
        );
    }

    #[test]
    fn k_search() {
        let ps = square_center();
        let r = avta_k(&ps, 4, &AvtaConfig::default()).unwrap();
        assert_eq!(r.sorted_indices(), vec![0, 1, 2, 3]);
        assert!(r.gamma_used.unwrap() >= 0.25);
        assert_eq!(r.mode, VertexMode::KSearch);
        let r = avta_k(&ps, 1, &AvtaConfig::default()).unwrap();
        assert!(r.len() >= 1);
        assert!(matches!(
            avta_k(&ps, 5, &AvtaConfig::default()),
            Err(Error::GammaFloor {
                found: 4,
                wanted: 5,
                ..
            })
        ));
        assert!(avta_k(&ps, 0, &AvtaConfig::default()).is_err());
        assert!(avta_k(&ps, 6, &AvtaConfig::default()).is_err());
    }

    #[test]
    fn rejects_bad_gamma() {
        let ps = square_center();
        assert!(avta_gamma(&ps, 0.0, &AvtaConfig::default()).is_err());
        assert!(avta_gamma(&ps, 1.0, &AvtaConfig::default()).is_err());
        assert!(avta_t(&ps, f64::NAN, &AvtaConfig::default()).is_err());
    }

    #[test]
    fn identical_points() {
        let ps = PointSet::from_rows(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        let r = avta_gamma(&ps, 0.5, &AvtaConfig::default()).unwrap();
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn via_vertices() {
        let ps = square_center();
        let cfg = AvtaConfig::default();
        let (r, _) = membership_via_vertices(&ps, &[0.5, 0.5], 0.4, 0.01, &cfg).unwrap();
        assert!(r.is_approx());
        let (r, _) = membership_via_vertices(&ps, &[2.0, 2.0], 0.4, 0.01, &cfg).unwrap();
        assert!(r.is_witness());
    }
}
