//! Column pruning for `A x = b, x >= 0` by vertex detection.
//!
//! Columns of `A` are treated as points. A column in the convex hull of the
//! others can be rewritten as a convex combination of them, so dropping it
//! preserves feasibility, and with the cost row stacked on top it preserves
//! the optimal value too. For conic queries the columns are first scaled
//! onto a hyperplane `<a, x> = 1`, which turns `b in cone(A)` into a hull
//! membership question.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{parse_csv_rows, write_rows_csv};
use crate::points::{dot, PointSet};
use crate::triangle::{solve_membership, witness_separation};
use crate::vertices::{avta_gamma, AvtaConfig, VertexReport};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    /// `m` rows of length `n`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Option<Vec<f64>>,
}

impl LinearSystem {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Option<Vec<f64>>) -> Result<Self> {
        let m = a.len();
        if m == 0 {
            return Err(Error::InvalidInput("constraint matrix has no rows".into()));
        }
        let n = a[0].len();
        if n == 0 {
            return Err(Error::InvalidInput(
                "constraint matrix has no columns".into(),
            ));
        }
        if let Some(i) = a.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "row {i} of A has the wrong length"
            )));
        }
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: b.len(),
            });
        }
        if let Some(c) = &c {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.len(),
                });
            }
        }
        let finite = a
            .iter()
            .flatten()
            .chain(&b)
            .chain(c.iter().flatten())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidInput("system has a non-finite entry".into()));
        }
        Ok(Self { a, b, c })
    }

    /// Builds a system from columns.
    pub fn from_columns(cols: &[Vec<f64>], b: Vec<f64>, c: Option<Vec<f64>>) -> Result<Self> {
        let m = b.len();
        let a = (0..m)
            .map(|i| cols.iter().map(|col| col[i]).collect())
            .collect();
        Self::new(a, b, c)
    }

    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.a[0].len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.a.iter().map(|r| r[j]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols()).map(|j| self.column(j)).collect()
    }

    /// The columns as `n` points in `R^m`.
    pub fn column_points(&self) -> Result<PointSet> {
        PointSet::from_rows(&self.columns())
    }

    /// The subsystem on the given columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Result<Self> {
        let a = self
            .a
            .iter()
            .map(|r| keep.iter().map(|&j| r[j]).collect())
            .collect();
        let c = self
            .c
            .as_ref()
            .map(|c| keep.iter().map(|&j| c[j]).collect());
        Self::new(a, self.b.clone(), c)
    }

    pub fn with_b(&self, b: Vec<f64>) -> Result<Self> {
        Self::new(self.a.clone(), b, self.c.clone())
    }

    /// `|A x - b|`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(r, bi)| {
                let d = dot(r, x) - bi;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Reads `m` rows of `A`, then `b` (length `m`), then optionally `c`
    /// (length `n`).
    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let rows = parse_csv_rows(reader)?;
        let t = rows.len();
        if t < 2 {
            return Err(Error::Parse(
                "a system needs at least one row of A and a b row".into(),
            ));
        }
        let n = rows[0].len();
        // With c present, row t-2 is b of length t-2; without, the last row
        // is b of length t-1. Both cannot hold at once.
        let with_c = t >= 3 && rows[t - 1].len() == n && rows[t - 2].len() == t - 2;
        let (m, c) = if with_c {
            (t - 2, Some(rows[t - 1].clone()))
        } else {
            (t - 1, None)
        };
        if rows[m].len() != m {
            return Err(Error::Parse(format!(
                "expected a b row of length {m}, found {}",
                rows[m].len()
            )));
        }
        Self::new(rows[..m].to_vec(), rows[m].clone(), c).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        let mut rows: Vec<&[f64]> = self.a.iter().map(Vec::as_slice).collect();
        rows.push(&self.b);
        if let Some(c) = &self.c {
            rows.push(c);
        }
        write_rows_csv(rows, writer)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::parse(std::fs::File::open(path)?)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        self.write(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pruned {
    pub system: LinearSystem,
    /// Original indices of the kept columns, ascending.
    pub kept: Vec<usize>,
    pub report: VertexReport,
}

fn prune_points(
    ps: &PointSet,
    gamma: f64,
    config: &AvtaConfig,
    dedup: bool,
) -> Result<(Vec<usize>, VertexReport)> {
    if dedup {
        let reps = ps.distinct_representatives();
        let sub = ps.subset(&reps)?;
        let report = avta_gamma(&sub, gamma, config)?;
        let mut kept: Vec<usize> = report.vertex_indices.iter().map(|&i| reps[i]).collect();
        kept.sort_unstable();
        Ok((kept, report))
    } else {
        let report = avta_gamma(ps, gamma, config)?;
        Ok((report.sorted_indices(), report))
    }
}

/// Keeps the columns that are vertices of the hull of all columns.
pub fn prune_columns_feasibility(
    sys: &LinearSystem,
    gamma: f64,
    config: &AvtaConfig,
    dedup: bool,
) -> Result<Pruned> {
    let (kept, report) = prune_points(&sys.column_points()?, gamma, config, dedup)?;
    Ok(Pruned {
        system: sys.select_columns(&kept)?,
        kept,
        report,
    })
}

/// Keeps the columns of `[c; A]` that are vertices of their hull, so the
/// optimal value of `min c.x` is unchanged.
pub fn prune_columns_optimization(
    sys: &LinearSystem,
    c: &[f64],
    gamma: f64,
    config: &AvtaConfig,
    dedup: bool,
) -> Result<Pruned> {
    if c.len() != sys.cols() {
        return Err(Error::DimensionMismatch {
            expected: sys.cols(),
            got: c.len(),
        });
    }
    let stacked: Vec<Vec<f64>> = (0..sys.cols())
        .map(|j| {
            std::iter::once(c[j])
                .chain(sys.a.iter().map(|r| r[j]))
                .collect()
        })
        .collect();
    let (kept, report) = prune_points(&PointSet::from_rows(&stacked)?, gamma, config, dedup)?;
    let full = LinearSystem::new(sys.a.clone(), sys.b.clone(), Some(c.to_vec()))?;
    Ok(Pruned {
        system: full.select_columns(&kept)?,
        kept,
        report,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConeCertificate {
    /// `a.A_i > 0` for every column while `a.b <= 0`.
    AnchorSeparates { anchor: Vec<f64>, anchor_dot_b: f64 },
    /// A hull witness for the scaled query.
    Witness {
        /// `b_hat - p'` in the scaled space.
        direction: Vec<f64>,
        /// Lower bound on the distance from `b_hat` to the scaled hull.
        separation: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConeVerdict {
    Feasible {
        /// Nonnegative solution over the original columns.
        x: Vec<f64>,
        residual: f64,
    },
    Infeasible(ConeCertificate),
}

impl ConeVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, ConeVerdict::Feasible { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeOutcome {
    pub verdict: ConeVerdict,
    pub anchor: Vec<f64>,
    /// Generator columns found in the scaled space, ascending.
    pub kept: Vec<usize>,
    pub report: Option<VertexReport>,
}

/// An `a` with `a.A_i > 0` for every column: all ones, else the normalized
/// sum of the column directions.
pub fn choose_anchor(sys: &LinearSystem) -> Result<Vec<f64>> {
    let cols = sys.columns();
    if let Some(j) = cols.iter().position(|c| c.iter().all(|&x| x == 0.0)) {
        return Err(Error::Anchor(format!(
            "column {j} is zero; remove it, it never changes feasibility"
        )));
    }
    let ones = vec![1.0; sys.rows()];
    if cols.iter().all(|c| dot(&ones, c) > 0.0) {
        return Ok(ones);
    }
    let mut sum = vec![0.0; sys.rows()];
    for c in &cols {
        let len = dot(c, c).sqrt();
        for (s, x) in sum.iter_mut().zip(c) {
            *s += x / len;
        }
    }
    let len = dot(&sum, &sum).sqrt();
    if len > 0.0 {
        for s in sum.iter_mut() {
            *s /= len;
        }
        if cols.iter().all(|c| dot(&sum, c) > 0.0) {
            return Ok(sum);
        }
    }
    Err(Error::Anchor(
        "no anchor with a.A_i > 0 for every column; the columns may not lie in an open half-space. \
         Try flipping signs of rows so the columns point into a common orthant"
            .into(),
    ))
}

/// Decides `b in cone(A)` through the scaled hull.
pub fn cone_feasibility(
    sys: &LinearSystem,
    gamma: f64,
    epsilon: f64,
    config: &AvtaConfig,
) -> Result<ConeOutcome> {
    let anchor = choose_anchor(sys)?;
    if sys.b.iter().all(|&x| x == 0.0) {
        return Ok(ConeOutcome {
            verdict: ConeVerdict::Feasible {
                x: vec![0.0; sys.cols()],
                residual: 0.0,
            },
            anchor,
            kept: Vec::new(),
            report: None,
        });
    }
    let ab = dot(&anchor, &sys.b);
    if ab <= 0.0 {
        return Ok(ConeOutcome {
            verdict: ConeVerdict::Infeasible(ConeCertificate::AnchorSeparates {
                anchor: anchor.clone(),
                anchor_dot_b: ab,
            }),
            anchor,
            kept: Vec::new(),
            report: None,
        });
    }
    let cols = sys.columns();
    let levels: Vec<f64> = cols.iter().map(|c| dot(&anchor, c)).collect();
    let scaled: Vec<Vec<f64>> = cols
        .iter()
        .zip(&levels)
        .map(|(c, l)| c.iter().map(|x| x / l).collect())
        .collect();
    let b_hat: Vec<f64> = sys.b.iter().map(|x| x / ab).collect();
    let ps = PointSet::from_rows(&scaled)?;
    let report = avta_gamma(&ps, gamma, config)?;
    let kept = report.sorted_indices();
    let res = solve_membership(&ps, &kept, &b_hat, epsilon, None, &config.solver)?;
    let verdict = if res.is_approx() {
        let mut x = vec![0.0; sys.cols()];
        for (i, w) in res.combination.iter() {
            x[i] = w * ab / levels[i];
        }
        let residual = sys.residual(&x);
        ConeVerdict::Feasible { x, residual }
    } else {
        let it = ps.materialize(&res.combination)?;
        let direction = b_hat.iter().zip(&it).map(|(a, b)| a - b).collect();
        let separation = witness_separation(&ps, &kept, &b_hat, &res.combination)?;
        ConeVerdict::Infeasible(ConeCertificate::Witness {
            direction,
            separation,
        })
    };
    Ok(ConeOutcome {
        verdict,
        anchor,
        kept,
        report: Some(report),
    })
}
