//! Gaussian random projections and the distance diagnostics that go with
//! them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::points::{distance, dot, ConvexCombination, PointSet};

/// A linear map `R^m -> R^k` with i.i.d. `N(0, 1/k)` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct JlMap {
    matrix: Vec<f64>,
    seed: u64,
    target_dim: usize,
    source_dim: usize,
}

impl JlMap {
    pub fn gaussian(source_dim: usize, target_dim: usize, seed: u64) -> Result<Self> {
        if source_dim == 0 || target_dim == 0 {
            return Err(Error::InvalidInput(
                "projection dimensions must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (target_dim as f64).sqrt();
        let matrix = (0..source_dim * target_dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            })
            .collect();
        Ok(Self {
            matrix,
            seed,
            target_dim,
            source_dim,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.matrix[r * self.source_dim..(r + 1) * self.source_dim]
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.source_dim {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim,
                got: x.len(),
            });
        }
        Ok((0..self.target_dim).map(|r| dot(self.row(r), x)).collect())
    }

    /// Maps every row; row `i` of the result is the image of row `i`.
    pub fn project(&self, ps: &PointSet) -> Result<PointSet> {
        if ps.dim() != self.source_dim {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim,
                got: ps.dim(),
            });
        }
        let mut data = Vec::with_capacity(ps.len() * self.target_dim);
        for row in ps.rows() {
            data.extend((0..self.target_dim).map(|r| dot(self.row(r), row)));
        }
        PointSet::new(ps.len(), self.target_dim, data)
    }
}

/// `ceil(c * log_n / eps_prime^2)` without a cap.
pub fn target_dim_from_log(log_n: f64, eps_prime: f64, c: f64) -> Result<usize> {
    if !(eps_prime > 0.0 && eps_prime <= 1.0) {
        return Err(Error::param("eps_prime", eps_prime, "must lie in (0, 1]"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param("c", c, "must be positive"));
    }
    if !(log_n.is_finite() && log_n >= 0.0) {
        return Err(Error::param(
            "log_n",
            log_n,
            "must be finite and nonnegative",
        ));
    }
    Ok(((c * log_n / (eps_prime * eps_prime)).ceil() as usize).max(1))
}

/// Target dimension for `n` points, capped at `source_dim`.
pub fn choose_target_dim(n: usize, eps_prime: f64, c: f64, source_dim: usize) -> Result<usize> {
    if n == 0 || source_dim == 0 {
        return Err(Error::InvalidInput(
            "n and the source dimension must be positive".into(),
        ));
    }
    Ok(target_dim_from_log((n as f64).ln(), eps_prime, c)?.min(source_dim))
}

/// Ratios `d(L x_i, L x_j) / d(x_i, x_j)` over all pairs of distinct points.
pub fn distance_ratios(original: &PointSet, projected: &PointSet) -> Result<Vec<f64>> {
    if original.len() != projected.len() {
        return Err(Error::DimensionMismatch {
            expected: original.len(),
            got: projected.len(),
        });
    }
    let mut out = Vec::new();
    for i in 0..original.len() {
        for j in i + 1..original.len() {
            let d = original.distance(i, j);
            if d > 0.0 {
                out.push(projected.distance(i, j) / d);
            }
        }
    }
    Ok(out)
}

/// Largest `|ratio - 1|` over all pairs.
pub fn max_distortion(original: &PointSet, projected: &PointSet) -> Result<f64> {
    Ok(distance_ratios(original, projected)?
        .into_iter()
        .map(|r| (r - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Closest point of `conv(ps)` to `p` by Wolfe's minimum-norm-point method.
///
/// Terminates when `x.(x - u_j) <= tol * max |u_j|^2` for every shifted
/// point `u_j = v_j - p`, with `x = p* - p`.
pub fn closest_point(ps: &PointSet, p: &[f64], tol: f64) -> Result<(Vec<f64>, ConvexCombination)> {
    if p.len() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            got: p.len(),
        });
    }
    let u: Vec<Vec<f64>> = ps
        .rows()
        .map(|r| r.iter().zip(p).map(|(a, b)| a - b).collect())
        .collect();
    let norms: Vec<f64> = u.iter().map(|x| dot(x, x)).collect();
    let big = norms
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let start = (0..u.len())
        .min_by(|&a, &b| norms[a].total_cmp(&norms[b]))
        .unwrap();
    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let combine = |corral: &[usize], lambda: &[f64]| {
        let mut x = vec![0.0; ps.dim()];
        for (&i, &l) in corral.iter().zip(lambda) {
            for (o, v) in x.iter_mut().zip(&u[i]) {
                *o += l * v;
            }
        }
        x
    };
    let mut x = u[start].clone();
    for _ in 0..(10 * u.len() + 100) {
        let xx = dot(&x, &x);
        let (j, xj) = (0..u.len())
            .map(|j| (j, dot(&x, &u[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if xx - xj <= tol * big || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);
        loop {
            let Some(mu) = affine_min_norm(&u, &corral) else {
                // Numerically dependent corral: drop the newcomer.
                corral.pop();
                lambda.pop();
                break;
            };
            if mu.iter().all(|&m| m > 1e-14) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (&l, &m) in lambda.iter().zip(&mu) {
                if m <= 1e-14 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, &m) in lambda.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let smallest = (0..lambda.len())
                .min_by(|&a, &b| lambda[a].total_cmp(&lambda[b]))
                .unwrap();
            let mut keep_c = Vec::new();
            let mut keep_l = Vec::new();
            for (k, (&i, &l)) in corral.iter().zip(&lambda).enumerate() {
                if k != smallest && l > 1e-14 {
                    keep_c.push(i);
                    keep_l.push(l);
                }
            }
            let s: f64 = keep_l.iter().sum();
            corral = keep_c;
            lambda = keep_l.into_iter().map(|l| l / s).collect();
        }
        let next = combine(&corral, &lambda);
        if dot(&next, &next) >= xx {
            break;
        }
        x = next;
    }
    let closest: Vec<f64> = x.iter().zip(p).map(|(a, b)| a + b).collect();
    let comb = ConvexCombination::from_weights(corral.iter().copied().zip(lambda.iter().copied()))?;
    Ok((closest, comb))
}

/// Weights of the minimum-norm point of the affine hull of `u[corral]`.
fn affine_min_norm(u: &[Vec<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    for r in 0..k {
        for c in 0..k {
            a[r][c] = dot(&u[corral[r]], &u[corral[c]]);
        }
        a[r][k] = 1.0;
        a[k][r] = 1.0;
    }
    let mut b = vec![0.0; k + 1];
    b[k] = 1.0;
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    for col in 0..=k {
        let p = (col..=k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..=k {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..k).map(|i| b[i] / a[i][i]).collect())
}

/// How far outside the hull a query is, in the terms that control whether a
/// random projection keeps it outside.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionCertificate {
    /// Closest hull point `p*`.
    pub closest: Vec<f64>,
    /// `min d(p, v_i) / d(p*, v_i)` over points `v_i != p*`; infinite when
    /// every point coincides with `p*`.
    pub e_ratio: f64,
    /// `d(p, p*)`.
    pub d_min: f64,
    /// `max d(p, v_i)`.
    pub d_max: f64,
    /// `(E - 1) / (E + 1)`, or 1 when `E` is infinite.
    pub epsilon_bound: f64,
    /// Whether `epsilon_bound >= d^2 / (4 D^2)` held numerically.
    pub bound_holds: bool,
}

pub fn membership_certificate(ps: &PointSet, p: &[f64]) -> Result<ProjectionCertificate> {
    let (closest, _) = closest_point(ps, p, 1e-15)?;
    let d_min = distance(p, &closest);
    let scale = ps
        .diameter()
        .max(ps.rows().map(|v| distance(v, p)).fold(0.0, f64::max));
    if d_min <= 1e-6 * scale {
        return Err(Error::InsideHull { distance: d_min });
    }
    let mut e_ratio = f64::INFINITY;
    let mut d_max = 0.0f64;
    for v in ps.rows() {
        let dp = distance(p, v);
        d_max = d_max.max(dp);
        let ds = distance(&closest, v);
        if ds > 1e-12 * scale {
            e_ratio = e_ratio.min(dp / ds);
        }
    }
    let epsilon_bound = if e_ratio.is_finite() {
        (e_ratio - 1.0) / (e_ratio + 1.0)
    } else {
        1.0
    };
    let floor = d_min * d_min / (4.0 * d_max * d_max);
    Ok(ProjectionCertificate {
        closest,
        e_ratio,
        d_min,
        d_max,
        epsilon_bound,
        bound_holds: epsilon_bound >= floor * (1.0 - 1e-9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_dim_examples() {
        assert_eq!(target_dim_from_log(100.0, 1.0, 1.0).unwrap(), 100);
        assert_eq!(choose_target_dim(1000, 0.5, 4.0, 500).unwrap(), 111);
        assert_eq!(choose_target_dim(1000, 0.5, 4.0, 20).unwrap(), 20);
        assert_eq!(choose_target_dim(1, 0.5, 4.0, 20).unwrap(), 1);
        assert!(choose_target_dim(10, 0.0, 4.0, 5).is_err());
        assert!(choose_target_dim(10, 1.5, 4.0, 5).is_err());
        assert!(choose_target_dim(10, 0.5, -1.0, 5).is_err());
    }

    #[test]
    fn projection_is_linear_and_keeps_rows() {
        let map = JlMap::gaussian(3, 2, 5).unwrap();
        let ps = PointSet::from_rows(&[[0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]).unwrap();
        let img = map.project(&ps).unwrap();
        assert_eq!(img.point(0), &[0.0, 0.0]);
        assert_eq!(img.point(1), img.point(2));
        let x = [0.5, -1.0, 2.0];
        let y = [3.0, 0.25, -0.5];
        let lhs = map
            .apply(&[2.0 * x[0] - y[0], 2.0 * x[1] - y[1], 2.0 * x[2] - y[2]])
            .unwrap();
        let (lx, ly) = (map.apply(&x).unwrap(), map.apply(&y).unwrap());
        for r in 0..2 {
            assert!((lhs[r] - (2.0 * lx[r] - ly[r])).abs() < 1e-12);
        }
        assert!(map.apply(&[1.0]).is_err());
        assert_eq!(JlMap::gaussian(3, 2, 5).unwrap(), map);
    }

    #[test]
    fn closest_point_on_segment_and_triangle() {
        let seg = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let (c, _) = closest_point(&seg, &[2.0, 0.0], 1e-15).unwrap();
        assert_eq!(c, vec![1.0, 0.0]);
        let (c, w) = closest_point(&seg, &[0.5, 3.0], 1e-15).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-12 && c[1].abs() < 1e-12);
        assert_eq!(w.len(), 2);
        let tri = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let (c, _) = closest_point(&tri, &[1.0, 1.0], 1e-15).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn certificate_for_segment() {
        let seg = PointSet::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let cert = membership_certificate(&seg, &[2.0, 0.0]).unwrap();
        assert!((cert.e_ratio - 2.0).abs() < 1e-12);
        assert!((cert.d_min - 1.0).abs() < 1e-12);
        assert!((cert.d_max - 2.0).abs() < 1e-12);
        assert!((cert.epsilon_bound - 1.0 / 3.0).abs() < 1e-12);
        assert!(cert.bound_holds);
        assert!(matches!(
            membership_certificate(&seg, &[0.5, 0.0]),
            Err(Error::InsideHull { .. })
        ));
    }

    #[test]
    fn certificate_when_hull_is_a_point() {
        let ps = PointSet::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let cert = membership_certificate(&ps, &[1.0, 3.0]).unwrap();
        assert!(cert.e_ratio.is_infinite());
        assert_eq!(cert.epsilon_bound, 1.0);
        assert_eq!(cert.d_min, cert.d_max);
        assert!(cert.bound_holds);
    }
}
