//! The Triangle Algorithm for approximate convex-hull membership.
//!
//! Given a working set `S`, a query `p` and a tolerance `epsilon`, the solver
//! either returns an iterate `p'` in `conv(S)` with `d(p', p) <= epsilon * R`
//! or a witness `p'` whose bisecting hyperplane with `p` separates `p` from
//! `conv(S)`. The iterate is held as a convex combination, and the inner
//! products `p'.v_i`, `p.v_i`, `|p'|^2` and `p.p'` are updated in place so an
//! iteration costs `O(N)` once the Gram entries it touches are cached.

use std::collections::HashMap;

use crate::error::{check_unit_open, Error, Result};
use crate::points::{
    distance, dot, squared_distance, ConvexCombination, PointSet, WEIGHT_SUM_TOLERANCE,
};

/// How a pivot is chosen among the qualifying indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PivotRule {
    /// Largest slack in the pivot inequality.
    #[default]
    Greedy,
    /// First qualifying index in working-set order.
    FirstFit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PivotMode {
    #[default]
    Plain,
    /// Prefer pivots forming an angle of at least `pi/2` at the query, fall
    /// back to plain pivots when none exists.
    Strict,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverConfig {
    pub mode: PivotMode,
    pub rule: PivotRule,
    /// Scale `R` used in the stopping test. Defaults to the diameter of the
    /// working set.
    pub scale: Option<f64>,
    /// Overrides the default cap of `ceil(48 / eps^2) + N` pivots.
    pub max_iterations: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MembershipKind {
    ApproxSolution,
    Witness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipResult {
    pub kind: MembershipKind,
    /// The final iterate `p'`, over point-set indices.
    pub combination: ConvexCombination,
    /// `d(p', p)` recomputed from coordinates.
    pub distance_to_query: f64,
    pub epsilon_used: f64,
    /// The `R` of the stopping test.
    pub scale: f64,
    /// Pivots applied in this solve.
    pub iterations: usize,
    pub pivot_searches: usize,
    /// Working-set entries touched by pivot searches and steps.
    pub work: usize,
}

impl MembershipResult {
    pub fn is_approx(&self) -> bool {
        self.kind == MembershipKind::ApproxSolution
    }

    pub fn is_witness(&self) -> bool {
        self.kind == MembershipKind::Witness
    }
}

/// One applied pivot, with distances taken from the cached inner products.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub index: usize,
    pub alpha: f64,
    pub gap_before: f64,
    pub gap_after: f64,
    /// `d(p, v)` for the pivot `v`.
    pub radius: f64,
}

/// Incremental state of one membership solve.
pub struct SolverState<'a> {
    ps: &'a PointSet,
    working: Vec<usize>,
    positions: HashMap<usize, usize>,
    query: Vec<f64>,
    query_norm_sq: f64,
    query_dots: Vec<f64>,
    weights: Vec<f64>,
    iterate_norm_sq: f64,
    iterate_dots: Vec<f64>,
    // p . p'
    cross: f64,
    iterations: usize,
    pivot_searches: usize,
    work: usize,
}

impl<'a> SolverState<'a> {
    /// Starts at `start` when given, otherwise at the working-set point
    /// nearest to `p`.
    pub fn new(
        ps: &'a PointSet,
        working: &[usize],
        p: &[f64],
        start: Option<&ConvexCombination>,
    ) -> Result<Self> {
        if p.len() != ps.dim() {
            return Err(Error::DimensionMismatch {
                expected: ps.dim(),
                got: p.len(),
            });
        }
        if let Some(pos) = p.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "query coordinate {pos} is not finite"
            )));
        }
        if working.is_empty() {
            return Err(Error::InvalidInput("working set is empty".into()));
        }
        let mut state = Self {
            ps,
            working: Vec::with_capacity(working.len()),
            positions: HashMap::with_capacity(working.len()),
            query: p.to_vec(),
            query_norm_sq: dot(p, p),
            query_dots: Vec::with_capacity(working.len()),
            weights: Vec::with_capacity(working.len()),
            iterate_norm_sq: 0.0,
            iterate_dots: Vec::with_capacity(working.len()),
            cross: 0.0,
            iterations: 0,
            pivot_searches: 0,
            work: 0,
        };
        for &i in working {
            ps.check_index(i)?;
            if state.positions.contains_key(&i) {
                continue;
            }
            state.positions.insert(i, state.working.len());
            state.working.push(i);
            state.query_dots.push(ps.dot_with(i, p));
            state.weights.push(0.0);
        }
        match start {
            Some(c) => {
                if c.is_empty() {
                    return Err(Error::InvalidInput("empty start combination".into()));
                }
                for (i, w) in c.iter() {
                    let Some(&k) = state.positions.get(&i) else {
                        return Err(Error::InvalidInput(format!(
                            "start combination uses index {i} outside the working set"
                        )));
                    };
                    state.weights[k] = w;
                }
            }
            None => {
                let nearest = (0..state.working.len())
                    .map(|k| (k, squared_distance(ps.point(state.working[k]), p)))
                    .fold(
                        (0, f64::INFINITY),
                        |best, cur| if cur.1 < best.1 { cur } else { best },
                    )
                    .0;
                state.weights[nearest] = 1.0;
            }
        }
        state.resync();
        Ok(state)
    }

    /// Adds a point to the working set with weight zero.
    pub fn extend(&mut self, i: usize) -> Result<()> {
        self.ps.check_index(i)?;
        if self.positions.contains_key(&i) {
            return Ok(());
        }
        let mut acc = 0.0;
        for (k, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                acc += w * self.ps.gram_unchecked(i, self.working[k]);
            }
        }
        self.positions.insert(i, self.working.len());
        self.working.push(i);
        self.query_dots.push(self.ps.dot_with(i, &self.query));
        self.weights.push(0.0);
        self.iterate_dots.push(acc);
        Ok(())
    }

    /// Recomputes every cached quantity from the weights.
    pub fn resync(&mut self) {
        let support: Vec<(usize, f64)> = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| (self.working[k], w))
            .collect();
        self.iterate_dots = self
            .working
            .iter()
            .map(|&i| {
                support
                    .iter()
                    .map(|&(s, w)| w * self.ps.gram_unchecked(i, s))
                    .sum()
            })
            .collect();
        let mut norm = 0.0;
        let mut cross = 0.0;
        for &(s, w) in &support {
            norm += w * self.iterate_dots[self.positions[&s]];
            cross += w * self.query_dots[self.positions[&s]];
        }
        self.iterate_norm_sq = norm;
        self.cross = cross;
    }

    pub fn working_set(&self) -> &[usize] {
        &self.working
    }

    pub fn query(&self) -> &[f64] {
        &self.query
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn pivot_searches(&self) -> usize {
        self.pivot_searches
    }

    /// Working-set entries touched so far by pivot searches and steps.
    pub fn work(&self) -> usize {
        self.work
    }

    /// `d(p', p)` from the cached inner products.
    pub fn gap(&self) -> f64 {
        (self.query_norm_sq - 2.0 * self.cross + self.iterate_norm_sq)
            .max(0.0)
            .sqrt()
    }

    /// `d(p', p)` from coordinates.
    pub fn direct_gap(&self) -> f64 {
        distance(&self.iterate(), &self.query)
    }

    pub fn combination(&self) -> ConvexCombination {
        ConvexCombination::from_weights(
            self.weights
                .iter()
                .enumerate()
                .map(|(k, &w)| (self.working[k], w)),
        )
        .expect("solver weights stay a valid combination")
    }

    /// Coordinates of `p'`.
    pub fn iterate(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ps.dim()];
        for (k, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                for (o, x) in out.iter_mut().zip(self.ps.point(self.working[k])) {
                    *o += w * x;
                }
            }
        }
        out
    }

    fn slack(&self, k: usize) -> f64 {
        self.query_dots[k]
            - self.iterate_dots[k]
            - 0.5 * (self.query_norm_sq - self.iterate_norm_sq)
    }

    fn select<F: Fn(usize) -> bool>(&self, rule: PivotRule, admissible: F) -> Option<usize> {
        match rule {
            PivotRule::FirstFit => (0..self.working.len()).find(|&k| admissible(k)),
            PivotRule::Greedy => {
                let mut best: Option<(usize, f64)> = None;
                for k in 0..self.working.len() {
                    if !admissible(k) {
                        continue;
                    }
                    let s = self.slack(k);
                    if best.is_none_or(|(_, b)| s > b) {
                        best = Some((k, s));
                    }
                }
                best.map(|(k, _)| k)
            }
        }
    }

    /// A working-set index `j` with `d(p', v_j) >= d(p, v_j)`, or `None`.
    pub fn find_pivot(&mut self, rule: PivotRule) -> Option<usize> {
        self.pivot_searches += 1;
        self.work += self.working.len();
        self.select(rule, |k| self.slack(k) >= 0.0)
            .map(|k| self.working[k])
    }

    /// A working-set index `j` with `(p' - p).(v_j - p) <= 0`, or `None`.
    pub fn strict_pivot(&mut self, rule: PivotRule) -> Result<Option<usize>> {
        if self.gap() == 0.0 && self.iterate() == self.query {
            return Err(Error::UndefinedAngle);
        }
        self.pivot_searches += 1;
        self.work += self.working.len();
        let base = self.query_norm_sq - self.cross;
        Ok(self
            .select(rule, |k| {
                self.iterate_dots[k] - self.query_dots[k] + base <= 0.0
            })
            .map(|k| self.working[k]))
    }

    /// Moves `p'` to the point of segment `p' v_j` nearest to `p`.
    pub fn apply_pivot(&mut self, j: usize) -> Result<StepRecord> {
        let Some(&kj) = self.positions.get(&j) else {
            return Err(Error::InvalidInput(format!(
                "pivot {j} is not in the working set"
            )));
        };
        let gap_before = self.gap();
        let vv = self.ps.squared_norm(j);
        let pv = self.query_dots[kj];
        let iv = self.iterate_dots[kj];
        let ii = self.iterate_norm_sq;
        let denom = vv - 2.0 * iv + ii;
        if !(denom > 0.0) {
            return Err(Error::DegeneratePivot { index: j });
        }
        let numer = pv - self.cross - iv + ii;
        let alpha = (numer / denom).min(1.0);
        if !(alpha > 0.0) {
            return Err(Error::DegeneratePivot { index: j });
        }
        let keep = 1.0 - alpha;
        for w in self.weights.iter_mut() {
            *w *= keep;
        }
        self.weights[kj] += alpha;
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            for w in self.weights.iter_mut() {
                *w /= sum;
            }
        }
        self.iterate_norm_sq = keep * keep * ii + 2.0 * alpha * keep * iv + alpha * alpha * vv;
        self.cross = keep * self.cross + alpha * pv;
        for k in 0..self.working.len() {
            let g = self.ps.gram_unchecked(self.working[k], j);
            self.iterate_dots[k] = keep * self.iterate_dots[k] + alpha * g;
        }
        self.iterations += 1;
        self.work += self.working.len();
        #[cfg(debug_assertions)]
        {
            let err = self.consistency_error();
            debug_assert!(err <= 1e-8, "solver state drifted: relative error {err:e}");
        }
        Ok(StepRecord {
            index: j,
            alpha,
            gap_before,
            gap_after: self.gap(),
            radius: (self.query_norm_sq - 2.0 * pv + vv).max(0.0).sqrt(),
        })
    }

    /// Largest relative disagreement between the cached inner products and a
    /// recomputation from coordinates.
    pub fn consistency_error(&self) -> f64 {
        let it = self.iterate();
        let norm = dot(&it, &it);
        let it_len = norm.sqrt();
        let mut worst = if norm > 0.0 {
            (norm - self.iterate_norm_sq).abs() / norm
        } else {
            self.iterate_norm_sq.abs()
        };
        for (k, &i) in self.working.iter().enumerate() {
            let direct = self.ps.dot_with(i, &it);
            let scale = (it_len * self.ps.squared_norm(i).sqrt()).max(f64::MIN_POSITIVE);
            worst = worst.max((direct - self.iterate_dots[k]).abs() / scale);
        }
        worst
    }

    /// Pivot chosen from coordinates instead of cached inner products.
    fn direct_pivot(&self, it: &[f64], config: &SolverConfig) -> Option<usize> {
        let margins: Vec<f64> = self
            .working
            .iter()
            .map(|&i| {
                let v = self.ps.point(i);
                squared_distance(it, v) - squared_distance(&self.query, v)
            })
            .collect();
        let pick = |admissible: &dyn Fn(usize) -> bool| -> Option<usize> {
            let mut best: Option<(usize, f64)> = None;
            for k in 0..self.working.len() {
                if !admissible(k) {
                    continue;
                }
                if config.rule == PivotRule::FirstFit {
                    return Some(k);
                }
                if best.is_none_or(|(_, b)| margins[k] > b) {
                    best = Some((k, margins[k]));
                }
            }
            best.map(|(k, _)| k)
        };
        let strict = if config.mode == PivotMode::Strict {
            let away: Vec<f64> = it.iter().zip(&self.query).map(|(a, b)| a - b).collect();
            pick(&|k| {
                let v = self.ps.point(self.working[k]);
                let mut acc = 0.0;
                for ((a, x), q) in away.iter().zip(v).zip(&self.query) {
                    acc += a * (x - q);
                }
                acc <= 0.0
            })
        } else {
            None
        };
        strict
            .or_else(|| pick(&|k| margins[k] >= 0.0))
            .map(|k| self.working[k])
    }

    /// [`apply_pivot`](Self::apply_pivot) computed from coordinates, for
    /// gaps too small for the cached inner products to resolve.
    fn apply_direct(&mut self, j: usize, it: &[f64]) -> Result<StepRecord> {
        let kj = self.positions[&j];
        let v = self.ps.point(j);
        let mut numer = 0.0;
        let mut denom = 0.0;
        for ((x, q), y) in v.iter().zip(&self.query).zip(it) {
            numer += (q - y) * (x - y);
            denom += (x - y) * (x - y);
        }
        if !(denom > 0.0) {
            return Err(Error::DegeneratePivot { index: j });
        }
        let alpha = (numer / denom).min(1.0);
        if !(alpha > 0.0) {
            return Err(Error::DegeneratePivot { index: j });
        }
        for w in self.weights.iter_mut() {
            *w *= 1.0 - alpha;
        }
        self.weights[kj] += alpha;
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            for w in self.weights.iter_mut() {
                *w /= sum;
            }
        }
        self.resync();
        self.iterations += 1;
        self.work += self.working.len();
        Ok(StepRecord {
            index: j,
            alpha,
            gap_before: distance(it, &self.query),
            gap_after: self.direct_gap(),
            radius: distance(v, &self.query),
        })
    }

    fn next_pivot(&mut self, config: &SolverConfig) -> Result<Option<usize>> {
        if config.mode == PivotMode::Strict {
            if let Some(j) = self.strict_pivot(config.rule)? {
                return Ok(Some(j));
            }
        }
        Ok(self.find_pivot(config.rule))
    }

    /// Runs the loop until an approximate solution or a witness.
    ///
    /// Both outcomes are confirmed from coordinates before they are
    /// returned. If the cached inner products disagree with coordinates, the
    /// rest of the run computes pivots and steps from coordinates.
    pub fn run(
        &mut self,
        epsilon: f64,
        scale: f64,
        config: &SolverConfig,
        mut observer: Option<&mut dyn FnMut(&StepRecord)>,
    ) -> Result<MembershipResult> {
        check_unit_open("epsilon", epsilon)?;
        let target = epsilon * scale;
        let cap = config.max_iterations.unwrap_or_else(|| {
            ((48.0 / (epsilon * epsilon)).ceil() as usize).saturating_add(self.working.len())
        });
        let first = self.iterations;
        let searches = self.pivot_searches;
        let work = self.work;
        let mut direct = false;
        let finish = |state: &Self, kind, dist| MembershipResult {
            kind,
            combination: state.combination(),
            distance_to_query: dist,
            epsilon_used: epsilon,
            scale,
            iterations: state.iterations - first,
            pivot_searches: state.pivot_searches - searches,
            work: state.work - work,
        };
        loop {
            let gap = if direct {
                self.direct_gap()
            } else {
                self.gap()
            };
            if gap <= target {
                let d = self.direct_gap();
                if d <= target {
                    return Ok(finish(self, MembershipKind::ApproxSolution, d));
                }
                direct = true;
            }
            if self.iterations - first >= cap {
                return Err(Error::IterationLimit {
                    limit: cap,
                    gap,
                    target,
                });
            }
            let step = if direct {
                let it = self.iterate();
                self.pivot_searches += 1;
                self.work += self.working.len();
                match self.direct_pivot(&it, config) {
                    Some(j) => {
                        let step = self.apply_direct(j, &it)?;
                        if step.gap_after >= step.gap_before {
                            return Err(Error::PrecisionFloor {
                                gap: step.gap_after,
                                target,
                            });
                        }
                        step
                    }
                    None => {
                        let d = distance(&it, &self.query);
                        return Ok(finish(self, MembershipKind::Witness, d));
                    }
                }
            } else {
                match self.next_pivot(config)? {
                    Some(j) => match self.apply_pivot(j) {
                        Ok(step) => step,
                        Err(Error::DegeneratePivot { .. }) => {
                            direct = true;
                            continue;
                        }
                        Err(e) => return Err(e),
                    },
                    None => {
                        let it = self.iterate();
                        let plain = SolverConfig {
                            mode: PivotMode::Plain,
                            ..config.clone()
                        };
                        if self.direct_pivot(&it, &plain).is_none() {
                            let d = distance(&it, &self.query);
                            return Ok(finish(self, MembershipKind::Witness, d));
                        }
                        direct = true;
                        continue;
                    }
                }
            };
            if let Some(obs) = observer.as_deref_mut() {
                obs(&step);
            }
        }
    }
}

/// Diameter of a subset, from coordinates.
pub fn working_diameter(ps: &PointSet, working: &[usize]) -> f64 {
    if working.len() == ps.len() && working.iter().enumerate().all(|(k, &i)| k == i) {
        return ps.diameter();
    }
    let mut best = 0.0f64;
    for (a, &i) in working.iter().enumerate() {
        for &j in &working[a + 1..] {
            best = best.max(squared_distance(ps.point(i), ps.point(j)));
        }
    }
    best.sqrt()
}

/// Decides approximate membership of `p` in the hull of `working`.
pub fn solve_membership(
    ps: &PointSet,
    working: &[usize],
    p: &[f64],
    epsilon: f64,
    start: Option<&ConvexCombination>,
    config: &SolverConfig,
) -> Result<MembershipResult> {
    solve_membership_observed(ps, working, p, epsilon, start, config, None)
}

/// As [`solve_membership`], reporting every applied pivot to `observer`.
pub fn solve_membership_observed(
    ps: &PointSet,
    working: &[usize],
    p: &[f64],
    epsilon: f64,
    start: Option<&ConvexCombination>,
    config: &SolverConfig,
    observer: Option<&mut dyn FnMut(&StepRecord)>,
) -> Result<MembershipResult> {
    check_unit_open("epsilon", epsilon)?;
    if let Some(r) = config.scale {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::param("scale", r, "must be finite and nonnegative"));
        }
    }
    let mut state = SolverState::new(ps, working, p, start)?;
    let scale = config
        .scale
        .unwrap_or_else(|| working_diameter(ps, state.working_set()));
    state.run(epsilon, scale, config, observer)
}

/// Membership against the whole set.
pub fn solve_full(
    ps: &PointSet,
    p: &[f64],
    epsilon: f64,
    config: &SolverConfig,
) -> Result<MembershipResult> {
    let all: Vec<usize> = (0..ps.len()).collect();
    solve_membership(ps, &all, p, epsilon, None, config)
}

/// Whether `d(p', v_i) < d(p, v_i)` for every working-set index, from
/// coordinates.
pub fn validate_witness(
    ps: &PointSet,
    working: &[usize],
    p: &[f64],
    witness: &ConvexCombination,
) -> Result<bool> {
    if p.len() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            got: p.len(),
        });
    }
    let it = ps.materialize(witness)?;
    for &i in working {
        ps.check_index(i)?;
        let v = ps.point(i);
        if squared_distance(&it, v) >= squared_distance(p, v) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lower bound on `d(p, conv(working))` carried by a witness: with
/// `c = p - p'`, the gap `(c.p - max_i c.v_i) / |c|`.
pub fn witness_separation(
    ps: &PointSet,
    working: &[usize],
    p: &[f64],
    witness: &ConvexCombination,
) -> Result<f64> {
    let it = ps.materialize(witness)?;
    let c: Vec<f64> = p.iter().zip(&it).map(|(a, b)| a - b).collect();
    let len = dot(&c, &c).sqrt();
    if len == 0.0 {
        return Ok(0.0);
    }
    let mut top = f64::NEG_INFINITY;
    for &i in working {
        ps.check_index(i)?;
        top = top.max(dot(&c, ps.point(i)));
    }
    Ok((dot(&c, p) - top) / len)
}
