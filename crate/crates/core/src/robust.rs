//! Vertex recovery from perturbed data, and frequency voting over random
//! projections.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_unit_open, Error, Result};
use crate::points::{distance, PointSet};
use crate::project::{closest_point, JlMap};
use crate::triangle::{solve_membership, witness_separation, SolverConfig};
use crate::vertices::{avta_gamma, AvtaConfig, Counters, VertexReport, GAMMA_FLOOR};

/// Lower bound `gamma * rho / R` on the weak robustness ratio.
pub fn sigma_from_gamma(gamma: f64, rho_star: f64, r: f64) -> Result<f64> {
    for (name, v) in [("gamma", gamma), ("rho_star", rho_star), ("R", r)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(name, v, "must be positive"));
        }
    }
    Ok(gamma * rho_star / r)
}

/// Outcome of testing one superset member against the hull of the others.
#[derive(Clone, Debug, PartialEq)]
pub enum PruneCertificate {
    /// Removed: an iterate within `distance` of the point was found in the
    /// hull of the members left at that moment.
    Removed { index: usize, distance: f64 },
    /// Kept: a witness against the final set of other members, separating
    /// the point from their hull by at least `separation`. `distance` is
    /// the closest-point estimate of the same distance.
    Kept {
        index: usize,
        separation: f64,
        distance: f64,
    },
}

impl PruneCertificate {
    pub fn index(&self) -> usize {
        match *self {
            PruneCertificate::Removed { index, .. } | PruneCertificate::Kept { index, .. } => index,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    /// Phase-one vertex set, in discovery order.
    pub superset_indices: Vec<usize>,
    /// Members surviving the pruning passes, ascending.
    pub pruned_indices: Vec<usize>,
    /// Removed members in removal order.
    pub removed_indices: Vec<usize>,
    /// Removal certificates in removal order, then one per kept member.
    pub certificates: Vec<PruneCertificate>,
    pub sigma_used: f64,
    pub epsilon_assumed: f64,
    pub phase_one: VertexReport,
    /// Both phases.
    pub counters: Counters,
}

/// Recovers the vertices of a set from an `epsilon`-perturbed copy, given
/// `sigma` bounding the weak robustness ratio of the clean set from below.
///
/// Phase one runs the enumeration at threshold `sigma / 2`. Phase two tests
/// every member against the hull of the other members at the same
/// threshold, removes the member closest to that hull among those found
/// within it, and repeats until no member is within it. A witness whose
/// separation falls short of the threshold does not settle the distance, so
/// those members are measured by [`closest_point`].
pub fn avta_robust(
    ps_eps: &PointSet,
    sigma: f64,
    epsilon: f64,
    config: &AvtaConfig,
) -> Result<PerturbationReport> {
    check_unit_open("sigma", sigma)?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::param(
            "epsilon",
            epsilon,
            "must be finite and nonnegative",
        ));
    }
    if 4.0 * epsilon > sigma {
        return Err(Error::HypothesisViolation {
            four_eps: 4.0 * epsilon,
            sigma,
        });
    }
    let phase_one = avta_gamma(ps_eps, sigma, config)?;
    let mut counters = phase_one.counters;
    let r = phase_one.scale.value;
    let tol = sigma / 2.0;
    let solver = SolverConfig {
        scale: Some(r),
        ..config.solver.clone()
    };

    let mut members = phase_one.sorted_indices();
    let mut removed = Vec::new();
    let mut certificates = Vec::new();
    loop {
        let mut closest: Option<(usize, f64)> = None;
        let mut witnesses = Vec::with_capacity(members.len());
        if members.len() > 1 {
            for (k, &i) in members.iter().enumerate() {
                let others: Vec<usize> = members.iter().copied().filter(|&j| j != i).collect();
                let res = solve_membership(ps_eps, &others, ps_eps.point(i), tol, None, &solver)?;
                counters.membership_calls += 1;
                counters.pivots += res.iterations;
                counters.pivot_searches += res.pivot_searches;
                counters.work += res.work;
                let d = if res.is_approx() {
                    res.distance_to_query
                } else {
                    counters.witnesses += 1;
                    let p = ps_eps.point(i);
                    let separation = witness_separation(ps_eps, &others, p, &res.combination)?;
                    let sub = ps_eps.subset(&others)?;
                    let (c, _) = closest_point(&sub, p, 1e-15)?;
                    let d = distance(p, &c);
                    if separation >= tol * r || d > tol * r {
                        witnesses.push((i, separation, d));
                        continue;
                    }
                    d
                };
                if closest.is_none_or(|(_, best)| d < best) {
                    closest = Some((k, d));
                }
            }
        }
        match closest {
            Some((k, distance)) => {
                let index = members.remove(k);
                counters.discarded += 1;
                removed.push(index);
                certificates.push(PruneCertificate::Removed { index, distance });
            }
            None => {
                for (index, separation, distance) in witnesses {
                    certificates.push(PruneCertificate::Kept {
                        index,
                        separation,
                        distance,
                    });
                }
                if members.len() == 1 {
                    certificates.push(PruneCertificate::Kept {
                        index: members[0],
                        separation: f64::INFINITY,
                        distance: f64::INFINITY,
                    });
                }
                break;
            }
        }
    }
    Ok(PerturbationReport {
        superset_indices: phase_one.vertex_indices.clone(),
        pruned_indices: members,
        removed_indices: removed,
        certificates,
        sigma_used: sigma,
        epsilon_assumed: epsilon,
        phase_one,
        counters,
    })
}

/// Halves `sigma` from one half until the pruned set has at least `k`
/// members. Stops with [`Error::GammaFloor`] once `sigma` would fall below
/// `4 * epsilon` or the global floor.
pub fn avta_robust_k(
    ps_eps: &PointSet,
    k: usize,
    epsilon: f64,
    config: &AvtaConfig,
) -> Result<PerturbationReport> {
    if k == 0 || k > ps_eps.len() {
        return Err(Error::InvalidInput(format!(
            "K = {k} must lie between 1 and the number of points ({})",
            ps_eps.len()
        )));
    }
    let floor = GAMMA_FLOOR.max(4.0 * epsilon);
    let mut sigma = 0.5;
    let mut total = Counters::default();
    let mut found = 0;
    while sigma >= floor {
        let mut report = avta_robust(ps_eps, sigma, epsilon, config)?;
        total.add(&report.counters);
        found = found.max(report.pruned_indices.len());
        if report.pruned_indices.len() >= k {
            report.counters = total;
            return Ok(report);
        }
        sigma /= 2.0;
    }
    Err(Error::GammaFloor {
        floor,
        found,
        wanted: k,
    })
}

/// Seeds of one projection round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundSeeds {
    pub map: u64,
    pub avta: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoteReport {
    /// Up to `k` indices by descending frequency, ties to the smaller index.
    pub selected: Vec<usize>,
    /// `(index, count)` for every tallied index, ascending by index.
    pub frequencies: Vec<(usize, usize)>,
    pub target_dim: usize,
    pub rounds: Vec<RoundSeeds>,
    /// Fewer than `k` distinct indices were tallied.
    pub shortfall: bool,
    pub counters: Counters,
}

/// Default projection dimension `ceil(4 ln n / gamma^2)`, capped at `m`.
pub fn default_vote_dim(n: usize, m: usize, gamma: f64) -> usize {
    (((4.0 * (n as f64).ln()) / (gamma * gamma)).ceil() as usize).clamp(1, m.max(1))
}

/// Projects `ps` with `rounds` independent Gaussian maps, enumerates the
/// vertices of each image at `gamma`, and keeps the `k` most frequent
/// indices.
pub fn multi_projection_vote(
    ps: &PointSet,
    k: usize,
    gamma: f64,
    rounds: usize,
    target_dim: Option<usize>,
    config: &AvtaConfig,
) -> Result<VoteReport> {
    check_unit_open("gamma", gamma)?;
    if k == 0 || rounds == 0 {
        return Err(Error::InvalidInput(
            "K and the number of rounds must be positive".into(),
        ));
    }
    let target_dim = match target_dim {
        Some(0) => {
            return Err(Error::InvalidInput(
                "target dimension must be positive".into(),
            ))
        }
        Some(d) => d,
        None => default_vote_dim(ps.len(), ps.dim(), gamma),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds: Vec<RoundSeeds> = (0..rounds)
        .map(|_| RoundSeeds {
            map: rng.random(),
            avta: rng.random(),
        })
        .collect();
    let reports: Vec<Result<VertexReport>> = seeds
        .par_iter()
        .map(|s| {
            let map = JlMap::gaussian(ps.dim(), target_dim, s.map)?;
            let image = map.project(ps)?;
            avta_gamma(
                &image,
                gamma,
                &AvtaConfig {
                    seed: s.avta,
                    ..config.clone()
                },
            )
        })
        .collect();
    let mut counts = vec![0usize; ps.len()];
    let mut counters = Counters::default();
    for r in reports {
        let r = r?;
        counters.add(&r.counters);
        for i in r.vertex_indices {
            counts[i] += 1;
        }
    }
    let frequencies: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(i, &c)| (i, c))
        .collect();
    let mut order = frequencies.clone();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let selected: Vec<usize> = order.iter().take(k).map(|&(i, _)| i).collect();
    Ok(VoteReport {
        shortfall: selected.len() < k,
        selected,
        frequencies,
        target_dim,
        rounds: seeds,
        counters,
    })
}
