//! Principal component analysis with a cyclic Jacobi eigensolver.

#![allow(clippy::needless_range_loop)] // index loops mirror the matrix formulas

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::PointSet;

const SYMMETRY_TOL: f64 = 1e-8;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const CLIP_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Dense row-major square matrix.
pub type Matrix = Vec<Vec<f64>>;

/// Subtracts the per-coordinate mean.
pub fn center(ps: &PointSet) -> PointSet {
    let mean = mean(ps);
    let coords = ps
        .iter()
        .flat_map(|p| p.iter().zip(&mean).map(|(x, m)| x - m))
        .collect();
    PointSet::new(ps.dim(), coords).expect("centering preserves finiteness")
}

fn mean(ps: &PointSet) -> Vec<f64> {
    let mut m = vec![0.0; ps.dim()];
    for p in ps.iter() {
        for (a, x) in m.iter_mut().zip(p) {
            *a += x;
        }
    }
    let n = ps.len() as f64;
    m.iter_mut().for_each(|a| *a /= n);
    m
}

/// Population covariance `(1/n) sum (x - mean)(x - mean)^T`.
pub fn covariance(ps: &PointSet) -> Result<Matrix> {
    if ps.len() < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            found: ps.len(),
        });
    }
    let d = ps.dim();
    let centered = center(ps);
    let mut c = vec![vec![0.0; d]; d];
    for p in centered.iter() {
        for i in 0..d {
            for j in i..d {
                c[i][j] += p[i] * p[j];
            }
        }
    }
    let n = ps.len() as f64;
    for i in 0..d {
        for j in i..d {
            c[i][j] /= n;
            c[j][i] = c[i][j];
        }
    }
    Ok(c)
}

fn frobenius(m: &Matrix) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// (`vectors[i]` belongs to `values[i]`), each signed so that its
/// largest-magnitude component is positive.
pub fn eig_sym(m: &Matrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = m.len();
    if d == 0 || m.iter().any(|row| row.len() != d) {
        return Err(invalid("eig_sym needs a non-empty square matrix"));
    }
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(invalid("matrix entries must be finite"));
    }
    let norm = frobenius(m);
    for i in 0..d {
        for j in i + 1..d {
            let gap = (m[i][j] - m[j][i]).abs();
            if gap > SYMMETRY_TOL * norm.max(1.0) {
                return Err(Error::Asymmetric { row: i, col: j, gap });
            }
        }
    }
    let mut a: Matrix = (0..d)
        .map(|i| (0..d).map(|j| 0.5 * (m[i][j] + m[j][i])).collect())
        .collect();
    let mut v: Matrix = (0..d)
        .map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let tol = OFF_DIAGONAL_TOL * norm;

    for _ in 0..MAX_SWEEPS {
        let off = (0..d)
            .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].abs())
            .fold(0.0, f64::max);
        if off < tol || off == 0.0 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q] == 0.0 {
                    continue;
                }
                // rotation angle zeroing a[p][q]
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut col: Vec<f64> = v.iter().map(|row| row[i]).collect();
            let lead = col
                .iter()
                .copied()
                .fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            if lead < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    Ok((values, vectors))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaReport {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` is the unit eigenvector of `eigenvalues[i]`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    pub covariance: Matrix,
}

pub fn pca(ps: &PointSet) -> Result<PcaReport> {
    let covariance = covariance(ps)?;
    let (mut eigenvalues, eigenvectors) = eig_sym(&covariance)?;
    for l in eigenvalues.iter_mut() {
        if *l < 0.0 && *l >= -CLIP_TOL {
            *l = 0.0;
        }
    }
    let total: f64 = eigenvalues.iter().sum();
    let explained_variance_ratio = if total > 0.0 {
        eigenvalues.iter().map(|l| l / total).collect()
    } else {
        vec![0.0; eigenvalues.len()]
    };
    Ok(PcaReport {
        eigenvalues,
        eigenvectors,
        explained_variance_ratio,
        covariance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaComparison {
    pub a: PcaReport,
    pub b: PcaReport,
    /// `max_i |lambda_i(a)/lambda_1(a) - lambda_i(b)/lambda_1(b)|`.
    pub max_ratio_discrepancy: f64,
    /// `max_i |r_i(a) - r_i(b)|` over explained-variance ratios.
    pub max_explained_discrepancy: f64,
}

pub fn pca_compare(a: &PointSet, b: &PointSet) -> Result<PcaComparison> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (ra, rb) = (pca(a)?, pca(b)?);
    let rel = |r: &PcaReport| -> Vec<f64> {
        let top = r.eigenvalues[0];
        r.eigenvalues
            .iter()
            .map(|l| if top > 0.0 { l / top } else { 0.0 })
            .collect()
    };
    let max_gap = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    Ok(PcaComparison {
        max_ratio_discrepancy: max_gap(&rel(&ra), &rel(&rb)),
        max_explained_discrepancy: max_gap(&ra.explained_variance_ratio, &rb.explained_variance_ratio),
        a: ra,
        b: rb,
    })
}

/// Coordinates `y = W^T (x - mean)` in the top `m` principal directions.
pub fn project(ps: &PointSet, m: usize) -> Result<PointSet> {
    if m == 0 || m > ps.dim() {
        return Err(invalid(format!("component count {m} must lie in 1..={}", ps.dim())));
    }
    let report = pca(ps)?;
    let w = &report.eigenvectors[..m];
    let centered = center(ps);
    let coords = centered
        .iter()
        .flat_map(|p| w.iter().map(move |u| u.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()))
        .collect();
    PointSet::new(m, coords)
}

/// Largest off-diagonal magnitude.
pub fn max_off_diagonal(m: &Matrix) -> f64 {
    let d = m.len();
    (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m[i][j].abs())
        .fold(0.0, f64::max)
}
