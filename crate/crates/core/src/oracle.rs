//! Exact-arithmetic reference computations for desk-scale instances.
//!
//! Every `f64` input is converted to the rational number it denotes, so the
//! answers here are exact for the data as stored. This is a verification
//! fixture: a dense two-phase simplex with Bland's rule on a fraction-free
//! integer tableau, and Wolfe's minimum-norm-point method over `BigRational`.
//! Keep instances small (tens of dimensions, a few hundred columns).

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::points::PointSet;

pub type Q = BigRational;

/// The rational value of a finite float.
pub fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite coordinate")
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn q_vec(xs: &[f64]) -> Vec<Q> {
    xs.iter().map(|&x| q(x)).collect()
}

fn q_dot(a: &[Q], b: &[Q]) -> Q {
    let mut acc = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Q, x: Vec<Q> },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }

    pub fn value_f64(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(to_f64(value)),
            _ => None,
        }
    }
}

/// Integer tableau. The true tableau is `rows / d`, where `d > 0` is the
/// absolute determinant of the current basis; pivots divide exactly.
struct Tableau {
    // Constraint rows followed by one objective row. The last column is the
    // right-hand side.
    rows: Vec<Vec<BigInt>>,
    basis: Vec<usize>,
    d: BigInt,
}

impl Tableau {
    fn constraints(&self) -> usize {
        self.rows.len() - 1
    }

    fn rhs_col(&self) -> usize {
        self.rows[0].len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                let mut v = &p * &*x;
                if !f.is_zero() && !y.is_zero() {
                    v -= &f * y;
                }
                *x = v / &self.d;
            }
        }
        self.d = p;
        if self.d.is_negative() {
            self.d = -&self.d;
            for x in self.rows.iter_mut().flatten() {
                *x = -&*x;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the objective row over columns `< allowed` with Bland's
    /// rule. Returns false when the objective is unbounded below.
    fn run(&mut self, allowed: usize) -> bool {
        let rhs = self.rhs_col();
        let obj = self.constraints();
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.rows[obj][j].is_negative()) else {
                return true;
            };
            let mut leave: Option<usize> = None;
            for i in 0..obj {
                if !self.rows[i][enter].is_positive() {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some(k) => {
                        let lhs = &self.rows[i][rhs] * &self.rows[k][enter];
                        let rhs_k = &self.rows[k][rhs] * &self.rows[i][enter];
                        lhs < rhs_k || (lhs == rhs_k && self.basis[i] < self.basis[k])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
            match leave {
                Some(r) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Clears denominators of a rational row with a positive factor.
fn integer_row(row: &[Q]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for x in row {
        if !x.is_zero() && !x.denom().is_one() {
            l = l.lcm(x.denom());
        }
    }
    row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
}

/// Solves `min c^T x` subject to `A x = b, x >= 0` exactly. `a` is given as
/// `m` rows of length `n`. Without `c` only feasibility is decided and the
/// returned value is zero.
pub fn solve_lp(a: &[Vec<Q>], b: &[Q], c: Option<&[Q]>) -> LpOutcome {
    let m = a.len();
    assert_eq!(b.len(), m, "right-hand side length");
    let n = a
        .first()
        .map(Vec::len)
        .unwrap_or_else(|| c.map_or(0, <[Q]>::len));
    if m == 0 {
        return match c {
            Some(c) if c.iter().any(Signed::is_negative) => LpOutcome::Unbounded,
            _ => LpOutcome::Optimal {
                value: Q::zero(),
                x: vec![Q::zero(); n],
            },
        };
    }
    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m + 1);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        assert_eq!(row.len(), n, "ragged constraint matrix");
        let mut full: Vec<Q> = row.clone();
        full.push(bi.clone());
        let mut ints = integer_row(&full);
        let rhs = ints.pop().unwrap();
        let flip = rhs.is_negative();
        let mut t: Vec<BigInt> = Vec::with_capacity(width);
        t.extend(ints.into_iter().map(|x| if flip { -x } else { x }));
        t.extend((0..m).map(|k| {
            if k == i {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        }));
        t.push(if flip { -rhs } else { rhs });
        rows.push(t);
    }
    let mut obj = vec![BigInt::zero(); width];
    for row in &rows {
        for j in (0..n).chain(std::iter::once(width - 1)) {
            if !row[j].is_zero() {
                obj[j] -= &row[j];
            }
        }
    }
    rows.push(obj);
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        d: BigInt::one(),
    };
    t.run(n + m);
    if !t.rows[t.constraints()][t.rhs_col()].is_zero() {
        return LpOutcome::Infeasible;
    }

    // Drive remaining artificials out of the basis. A row that is zero over
    // the original columns is redundant; its artificial stays basic at zero
    // and the row never wins a ratio test. Removing it would break the
    // exact divisions.
    for i in 0..t.constraints() {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
            }
        }
    }

    let rhs = t.rhs_col();
    let obj = t.constraints();
    let mut zrow = vec![BigInt::zero(); width];
    if let Some(c) = c {
        assert_eq!(c.len(), n, "cost vector length");
        let ci = integer_row(c);
        for j in 0..n {
            zrow[j] = &t.d * &ci[j];
        }
        for i in 0..obj {
            let Some(cb) = ci.get(t.basis[i]) else {
                continue;
            };
            if cb.is_zero() {
                continue;
            }
            for j in (0..n).chain(std::iter::once(rhs)) {
                if !t.rows[i][j].is_zero() {
                    zrow[j] -= cb * &t.rows[i][j];
                }
            }
        }
    }
    t.rows[obj] = zrow;
    if !t.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for i in 0..t.constraints() {
        if t.basis[i] < n {
            x[t.basis[i]] = Q::new(t.rows[i][rhs].clone(), t.d.clone());
        }
    }
    let value = c.map(|c| q_dot(c, &x)).unwrap_or_else(Q::zero);
    LpOutcome::Optimal { value, x }
}

/// Float front end for [`solve_lp`].
pub fn solve_lp_f64(a: &[Vec<f64>], b: &[f64], c: Option<&[f64]>) -> LpOutcome {
    let a: Vec<Vec<Q>> = a.iter().map(|r| q_vec(r)).collect();
    let b = q_vec(b);
    let c = c.map(q_vec);
    solve_lp(&a, &b, c.as_deref())
}

/// Solves a square system exactly; `None` when singular.
fn solve_linear(mut m: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Option<Vec<Q>> {
    let n = rhs.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        rhs.swap(col, p);
        let inv = m[col][col].recip();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for k in col..n {
                if !m[col][k].is_zero() {
                    let d = &f * &m[col][k];
                    m[r][k] -= d;
                }
            }
            let d = &f * &rhs[col];
            rhs[r] -= d;
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// Minimum-norm point of the hull of `points`: squared norm and weights.
///
/// Wolfe's method in exact arithmetic. Affine independence of the corral is
/// preserved exactly, so the inner systems are never singular.
pub fn min_norm_point(points: &[Vec<Q>]) -> (Q, Vec<Q>) {
    assert!(!points.is_empty(), "min-norm point of an empty set");
    let n = points.len();
    let norms: Vec<Q> = points.iter().map(|p| q_dot(p, p)).collect();
    let start = (0..n).min_by(|&a, &b| norms[a].cmp(&norms[b])).unwrap();
    let mut corral = vec![start];
    let mut lambda = vec![Q::from_integer(BigInt::from(1))];
    let mut x = points[start].clone();
    let combine = |corral: &[usize], lambda: &[Q]| {
        let mut x = vec![Q::zero(); points[0].len()];
        for (&i, l) in corral.iter().zip(lambda) {
            if l.is_zero() {
                continue;
            }
            for (o, v) in x.iter_mut().zip(&points[i]) {
                *o += l * v;
            }
        }
        x
    };
    loop {
        let xx = q_dot(&x, &x);
        let (j, xj) = (0..n)
            .map(|j| (j, q_dot(&x, &points[j])))
            .min_by(|a, b| a.1.cmp(&b.1))
            .unwrap();
        if xj >= xx || corral.contains(&j) {
            let mut weights = vec![Q::zero(); n];
            for (&i, l) in corral.iter().zip(&lambda) {
                weights[i] = l.clone();
            }
            return (xx, weights);
        }
        corral.push(j);
        lambda.push(Q::zero());
        loop {
            let k = corral.len();
            let mut sys = vec![vec![Q::zero(); k + 1]; k + 1];
            for a in 0..k {
                for b in a..k {
                    let g = q_dot(&points[corral[a]], &points[corral[b]]);
                    sys[a][b] = g.clone();
                    sys[b][a] = g;
                }
                sys[a][k] = Q::from_integer(BigInt::from(1));
                sys[k][a] = Q::from_integer(BigInt::from(1));
            }
            let mut rhs = vec![Q::zero(); k + 1];
            rhs[k] = Q::from_integer(BigInt::from(1));
            let sol = solve_linear(sys, rhs).expect("corral lost affine independence");
            let mu = &sol[..k];
            if mu.iter().all(Signed::is_positive) {
                lambda = mu.to_vec();
                break;
            }
            let mut theta: Option<Q> = None;
            for (l, u) in lambda.iter().zip(mu) {
                if !u.is_positive() {
                    let t = l / (l - u);
                    if theta.as_ref().is_none_or(|b| t < *b) {
                        theta = Some(t);
                    }
                }
            }
            let theta = theta.unwrap();
            for (l, u) in lambda.iter_mut().zip(mu) {
                let step = &theta * (u - &*l);
                *l += step;
            }
            let mut keep_c = Vec::with_capacity(k);
            let mut keep_l = Vec::with_capacity(k);
            for (&i, l) in corral.iter().zip(&lambda) {
                if l.is_positive() {
                    keep_c.push(i);
                    keep_l.push(l.clone());
                }
            }
            corral = keep_c;
            lambda = keep_l;
        }
        x = combine(&corral, &lambda);
    }
}

/// A point set held in exact arithmetic.
#[derive(Clone, Debug)]
pub struct ExactSet {
    pts: Vec<Vec<Q>>,
    dim: usize,
}

impl ExactSet {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let pts: Vec<Vec<Q>> = rows.iter().map(|r| q_vec(r.as_ref())).collect();
        let dim = pts.first().map(Vec::len).unwrap_or(0);
        Self { pts, dim }
    }

    pub fn from_point_set(ps: &PointSet) -> Self {
        Self {
            pts: ps.rows().map(q_vec).collect(),
            dim: ps.dim(),
        }
    }

    /// Image under the linear map with the given rows, computed exactly.
    pub fn linear_image<R: AsRef<[f64]>>(&self, map_rows: &[R]) -> Self {
        let rows: Vec<Vec<Q>> = map_rows.iter().map(|r| q_vec(r.as_ref())).collect();
        let pts = self
            .pts
            .iter()
            .map(|p| {
                rows.iter()
                    .map(|r| r.iter().zip(p).map(|(a, x)| a * x).sum())
                    .collect()
            })
            .collect();
        Self {
            pts,
            dim: map_rows.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn point(&self, i: usize) -> &[Q] {
        &self.pts[i]
    }

    /// Whether `p` lies in the hull of the points at `among`.
    pub fn hull_contains(&self, among: &[usize], p: &[Q]) -> bool {
        if among.is_empty() {
            return false;
        }
        let one = Q::from_integer(BigInt::from(1));
        let mut a = Vec::with_capacity(self.dim + 1);
        for d in 0..self.dim {
            a.push(among.iter().map(|&i| self.pts[i][d].clone()).collect());
        }
        a.push(vec![one.clone(); among.len()]);
        let mut b = p.to_vec();
        b.push(one);
        solve_lp(&a, &b, None).is_feasible()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let all: Vec<usize> = (0..self.len()).collect();
        self.hull_contains(&all, &q_vec(p))
    }

    /// Indices whose value differs from point `i`.
    fn others(&self, i: usize, among: &[usize]) -> Vec<usize> {
        among
            .iter()
            .copied()
            .filter(|&j| self.pts[j] != self.pts[i])
            .collect()
    }

    /// Whether point `i` is a vertex of the hull of the whole set. Copies of
    /// a vertex are all vertices.
    pub fn is_vertex(&self, i: usize) -> bool {
        let all: Vec<usize> = (0..self.len()).collect();
        !self.hull_contains(&self.others(i, &all), &self.pts[i])
    }

    /// Vertex indices in ascending order, copies included.
    pub fn vertices(&self) -> Vec<usize> {
        let mut live: Vec<usize> = (0..self.len()).collect();
        let mut i = 0;
        while i < live.len() {
            let idx = live[i];
            if self.hull_contains(&self.others(idx, &live), &self.pts[idx]) {
                // Dropping a non-vertex leaves the hull unchanged.
                live.remove(i);
            } else {
                i += 1;
            }
        }
        live
    }

    /// Exact squared distance from `p` to the hull of `among`.
    pub fn distance_sq(&self, among: &[usize], p: &[Q]) -> Q {
        let shifted: Vec<Vec<Q>> = among
            .iter()
            .map(|&i| self.pts[i].iter().zip(p).map(|(x, y)| x - y).collect())
            .collect();
        min_norm_point(&shifted).0
    }

    pub fn distance(&self, among: &[usize], p: &[Q]) -> f64 {
        to_f64(&self.distance_sq(among, p)).sqrt()
    }

    /// Minimum over distinct vertex values of the distance to the hull of
    /// the other vertices. `None` with fewer than two distinct vertices.
    pub fn gamma_star(&self) -> Option<f64> {
        let verts = self.distinct(&self.vertices());
        if verts.len() < 2 {
            return None;
        }
        verts
            .iter()
            .map(|&v| self.distance(&self.others(v, &verts), &self.pts[v]))
            .min_by(f64::total_cmp)
    }

    /// Minimum over distinct vertex values of the distance to the hull of
    /// all points with a different value.
    pub fn sigma_star(&self) -> Option<f64> {
        let all: Vec<usize> = (0..self.len()).collect();
        let verts = self.distinct(&self.vertices());
        if verts.len() < 2 {
            return None;
        }
        verts
            .iter()
            .map(|&v| self.distance(&self.others(v, &all), &self.pts[v]))
            .min_by(f64::total_cmp)
    }

    fn distinct(&self, idx: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &i in idx {
            if out.iter().all(|&j| self.pts[j] != self.pts[i]) {
                out.push(i);
            }
        }
        out
    }
}
