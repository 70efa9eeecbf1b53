//! Point storage, metric primitives and the inner-product cache.
//!
//! A [`PointSet`] keeps its rows in one row-major buffer together with the
//! squared norm of every row. Pairwise inner products are filled into an
//! index-keyed cache the first time they are requested and never evicted, so
//! a Triangle Algorithm iteration over a working set of `N` points costs
//! `O(N)` once the relevant entries exist.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};

/// Tolerance on `|sum of weights - 1|` before a combination is renormalized.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Inner product accumulated in index order.
///
/// Every inner product in the crate goes through this function so that a
/// cached value and a fresh recomputation agree bit for bit.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// How the diameter of a set is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DiameterMode {
    /// Full pairwise scan.
    #[default]
    Exact,
    /// `2 * max_j d(v_0, v_j)`, an upper bound within a factor of two.
    Approximate,
    /// Exact up to `threshold` points, approximate above.
    Auto { threshold: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diameter {
    pub value: f64,
    pub approximate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinDistance {
    pub value: f64,
    /// Set when two rows coincide, i.e. `value == 0`.
    pub duplicates: bool,
    pub pair: (usize, usize),
}

struct GramCache {
    entries: RwLock<HashMap<u64, f64>>,
}

impl GramCache {
    fn new() -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
        }
    }

    fn key(i: usize, j: usize) -> u64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        ((lo as u64) << 32) | hi as u64
    }
}

/// A finite set of `n` points in `R^m`.
pub struct PointSet {
    data: Vec<f64>,
    n: usize,
    m: usize,
    squared_norms: Vec<f64>,
    cache: Option<GramCache>,
    diameter: OnceLock<f64>,
}

impl PointSet {
    /// Builds a set from a row-major buffer of `n * m` coordinates.
    pub fn new(n: usize, m: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput(format!(
                "a point set needs n >= 1 and m >= 1 (got n = {n}, m = {m})"
            )));
        }
        if data.len() != n * m {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates for {n} x {m}, got {}",
                n * m,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coordinate at row {}, column {}",
                pos / m,
                pos % m
            )));
        }
        let squared_norms = data.chunks_exact(m).map(|row| dot(row, row)).collect();
        Ok(Self {
            data,
            n,
            m,
            squared_norms,
            cache: Some(GramCache::new()),
            diameter: OnceLock::new(),
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n * m);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} coordinates, expected {m}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(n, m, data)
    }

    /// Disables the inner-product cache; every [`gram`](Self::gram) call
    /// recomputes its value.
    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn caches_inner_products(&self) -> bool {
        self.cache.is_some()
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.m)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn squared_norm(&self, i: usize) -> f64 {
        self.squared_norms[i]
    }

    pub fn squared_norms(&self) -> &[f64] {
        &self.squared_norms
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            })
        }
    }

    /// Inner product of rows `i` and `j`, filled into the cache on first use.
    pub fn gram(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.gram_unchecked(i, j))
    }

    pub(crate) fn gram_unchecked(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.squared_norms[i];
        }
        let Some(cache) = &self.cache else {
            return dot(self.point(i), self.point(j));
        };
        let key = GramCache::key(i, j);
        if let Some(v) = cache.entries.read().expect("gram cache poisoned").get(&key) {
            return *v;
        }
        let value = dot(self.point(i), self.point(j));
        // Concurrent fills of the same entry write the same value.
        cache
            .entries
            .write()
            .expect("gram cache poisoned")
            .insert(key, value);
        value
    }

    /// Number of off-diagonal entries currently held by the cache.
    pub fn cached_entries(&self) -> usize {
        self.cache
            .as_ref()
            .map(|c| c.entries.read().expect("gram cache poisoned").len())
            .unwrap_or(0)
    }

    pub fn dot_with(&self, i: usize, p: &[f64]) -> f64 {
        dot(self.point(i), p)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.point(i), self.point(j))
    }

    /// Largest pairwise distance, from an exact scan. Computed once.
    pub fn diameter(&self) -> f64 {
        *self.diameter.get_or_init(|| {
            let mut best = 0.0f64;
            for i in 0..self.n {
                let a = self.point(i);
                for j in i + 1..self.n {
                    best = best.max(squared_distance(a, self.point(j)));
                }
            }
            best.sqrt()
        })
    }

    pub fn diameter_with(&self, mode: DiameterMode) -> Diameter {
        let approximate = match mode {
            DiameterMode::Exact => false,
            DiameterMode::Approximate => true,
            DiameterMode::Auto { threshold } => self.n > threshold,
        };
        if !approximate {
            return Diameter {
                value: self.diameter(),
                approximate: false,
            };
        }
        let anchor = self.point(0);
        let far = self
            .rows()
            .map(|row| squared_distance(anchor, row))
            .fold(0.0f64, f64::max);
        Diameter {
            value: 2.0 * far.sqrt(),
            approximate: true,
        }
    }

    /// Smallest distance between two distinct indices.
    pub fn min_pairwise_distance(&self) -> Result<MinDistance> {
        if self.n < 2 {
            return Err(Error::InvalidInput(
                "minimum pairwise distance needs at least two points".into(),
            ));
        }
        let mut best = f64::INFINITY;
        let mut pair = (0, 1);
        for i in 0..self.n {
            let a = self.point(i);
            for j in i + 1..self.n {
                let d = squared_distance(a, self.point(j));
                if d < best {
                    best = d;
                    pair = (i, j);
                }
            }
        }
        Ok(MinDistance {
            value: best.sqrt(),
            duplicates: best == 0.0,
            pair,
        })
    }

    /// Copies the selected rows, in the given order, into a new set.
    pub fn subset(&self, indices: &[usize]) -> Result<PointSet> {
        let mut data = Vec::with_capacity(indices.len() * self.m);
        for &i in indices {
            self.check_index(i)?;
            data.extend_from_slice(self.point(i));
        }
        PointSet::new(indices.len(), self.m, data)
    }

    /// Dense coordinates of the point a combination denotes.
    pub fn materialize(&self, c: &ConvexCombination) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.m];
        for (i, w) in c.iter() {
            self.check_index(i)?;
            for (o, x) in out.iter_mut().zip(self.point(i)) {
                *o += w * x;
            }
        }
        Ok(out)
    }

    /// Indices of the first occurrence of each distinct row.
    pub fn distinct_representatives(&self) -> Vec<usize> {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut reps = Vec::new();
        for (i, row) in self.rows().enumerate() {
            // +0.0 and -0.0 compare equal as coordinates.
            let key = row.iter().map(|x| (x + 0.0).to_bits()).collect::<Vec<_>>();
            seen.entry(key).or_insert_with(|| {
                reps.push(i);
                i
            });
        }
        reps
    }
}

impl Clone for PointSet {
    fn clone(&self) -> Self {
        Self {
            data: self.data.clone(),
            n: self.n,
            m: self.m,
            squared_norms: self.squared_norms.clone(),
            cache: self.cache.as_ref().map(|_| GramCache::new()),
            diameter: self.diameter.clone(),
        }
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointSet")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("cached_entries", &self.cached_entries())
            .finish()
    }
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m && self.data == other.data
    }
}

/// Sparse nonnegative weights over point indices summing to one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvexCombination {
    weights: BTreeMap<usize, f64>,
}

impl ConvexCombination {
    /// All weight on a single index.
    pub fn vertex(i: usize) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(i, 1.0);
        Self { weights }
    }

    /// Validates and, if the sum drifted past tolerance, renormalizes the
    /// weights. Zero weights are dropped.
    pub fn from_weights<I: IntoIterator<Item = (usize, f64)>>(weights: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight {w} at index {i} is not a finite nonnegative number"
                )));
            }
            if w > 0.0 {
                *map.entry(i).or_insert(0.0) += w;
            }
        }
        let mut c = Self { weights: map };
        let sum = c.sum();
        if sum <= 0.0 {
            return Err(Error::InvalidInput("weights sum to zero".into()));
        }
        c.renormalize();
        Ok(c)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.get(&i).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().map(|(&i, &w)| (i, w))
    }

    pub fn support(&self) -> Vec<usize> {
        self.weights.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Moves the combination a fraction `alpha` of the way toward index `j`:
    /// `w_j <- (1 - alpha) w_j + alpha`, `w_i <- (1 - alpha) w_i` otherwise.
    pub fn step_toward(&mut self, j: usize, alpha: f64) {
        for w in self.weights.values_mut() {
            *w *= 1.0 - alpha;
        }
        *self.weights.entry(j).or_insert(0.0) += alpha;
        self.weights.retain(|_, w| *w > 0.0);
        self.renormalize();
    }

    /// Relabels indices through `f`, merging collisions.
    pub fn map_indices<F: Fn(usize) -> usize>(&self, f: F) -> Self {
        let mut weights = BTreeMap::new();
        for (&i, &w) in &self.weights {
            *weights.entry(f(i)).or_insert(0.0) += w;
        }
        Self { weights }
    }

    pub fn supported_on(&self, indices: &[usize]) -> bool {
        self.weights.keys().all(|i| indices.contains(i))
    }

    fn renormalize(&mut self) {
        let sum = self.sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE && sum > 0.0 {
            for w in self.weights.values_mut() {
                *w /= sum;
            }
        }
    }
}

/// Which robustness parameter drives a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModeSelector {
    Gamma(f64),
    Sigma(f64),
    T(f64),
    K(usize),
}

/// Robustness lower bounds supplied by the caller plus the two measured
/// scales of the input.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessParams {
    pub gamma: Option<f64>,
    pub sigma: Option<f64>,
    pub t: Option<f64>,
    pub k_known: Option<usize>,
    pub epsilon_perturb: f64,
    /// Diameter of the set.
    pub diameter: f64,
    /// Minimum pairwise distance, zero for a singleton.
    pub rho_star: f64,
}

impl RobustnessParams {
    pub fn measure(ps: &PointSet) -> Self {
        let rho_star = ps.min_pairwise_distance().map(|d| d.value).unwrap_or(0.0);
        Self {
            gamma: None,
            sigma: None,
            t: None,
            k_known: None,
            epsilon_perturb: 0.0,
            diameter: ps.diameter(),
            rho_star,
        }
    }

    /// The single parameter selected for this run.
    pub fn mode(&self) -> Result<ModeSelector> {
        let mut modes = Vec::new();
        if let Some(g) = self.gamma {
            modes.push(ModeSelector::Gamma(g));
        }
        if let Some(s) = self.sigma {
            modes.push(ModeSelector::Sigma(s));
        }
        if let Some(t) = self.t {
            modes.push(ModeSelector::T(t));
        }
        if let Some(k) = self.k_known {
            modes.push(ModeSelector::K(k));
        }
        match modes.as_slice() {
            [one] => Ok(*one),
            [] => Err(Error::InvalidInput(
                "one of gamma, sigma, t or K must be given".into(),
            )),
            _ => Err(Error::InvalidInput(
                "gamma, sigma, t and K are mutually exclusive".into(),
            )),
        }
    }
}
