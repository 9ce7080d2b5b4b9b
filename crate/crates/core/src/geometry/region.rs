use serde::{Deserialize, Serialize};

use super::{dist2, PointSet};
use crate::error::{invalid, Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-9;

/// An axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    fn distance2(&self, p: &[f64]) -> f64 {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&x, (&lo, &hi))| {
                let gap = (lo - x).max(x - hi).max(0.0);
                gap * gap
            })
            .sum()
    }
}

/// Geometry of a compact region `E`.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// `{ base + sum_i t_i u_i : t in extent }` with orthonormal `u_i`.
    AffineSubspace {
        base: Vec<f64>,
        directions: Vec<Vec<f64>>,
        extent: Vec<(f64, f64)>,
    },
    PointCloud(PointSet),
    BoxUnion(Vec<AxisBox>),
}

impl Shape {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Shape::AffineSubspace { base, .. } => base.len(),
            Shape::PointCloud(ps) => ps.dim(),
            Shape::BoxUnion(boxes) => boxes.first().map_or(0, |b| b.lo.len()),
        }
    }

    /// Segment, square, ... `[0,1]^k` spanned by the last `k` coordinate axes of `R^d`,
    /// i.e. the plane `x_1 = ... = x_{d-k} = 0` restricted to the unit cube.
    pub fn coordinate_plane(d: usize, k: usize) -> Self {
        let directions = (d - k..d)
            .map(|axis| {
                let mut u = vec![0.0; d];
                u[axis] = 1.0;
                u
            })
            .collect();
        Shape::AffineSubspace {
            base: vec![0.0; d],
            directions,
            extent: vec![(0.0, 1.0); k],
        }
    }
}

/// A compact set together with the covering data `(k, C_E)` asserting
/// `N_E(delta) <= max(C_E delta^-k, 1)` for every `delta > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRegion", into = "RawRegion")]
pub struct RegionSpec {
    shape: Shape,
    k: f64,
    c_e: f64,
}

impl RegionSpec {
    /// Validates the shape and the covering data. `c_e = None` selects
    /// [`default_covering_constant`].
    pub fn new(shape: Shape, k: f64, c_e: Option<f64>) -> Result<Self> {
        let d = shape.ambient_dim();
        if d == 0 {
            return Err(invalid("region has no ambient dimension"));
        }
        if !(k > 0.0 && k <= d as f64) {
            return Err(invalid(format!("covering exponent k = {k} must lie in (0, {d}]")));
        }
        let c_e = match c_e {
            Some(c) if c > 0.0 && c.is_finite() => c,
            Some(c) => return Err(invalid(format!("covering constant C_E = {c} must be positive"))),
            None => default_covering_constant(k)?,
        };
        validate_shape(&shape, k)?;
        Ok(Self { shape, k, c_e })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn c_e(&self) -> f64 {
        self.c_e
    }

    pub fn ambient_dim(&self) -> usize {
        self.shape.ambient_dim()
    }
}

fn validate_shape(shape: &Shape, k: f64) -> Result<()> {
    let d = shape.ambient_dim();
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    match shape {
        Shape::AffineSubspace {
            base,
            directions,
            extent,
        } => {
            if !finite(base) {
                return Err(invalid("affine base point must be finite"));
            }
            if extent.len() != directions.len() {
                return Err(invalid(format!(
                    "extent has {} intervals for {} directions",
                    extent.len(),
                    directions.len()
                )));
            }
            if extent
                .iter()
                .any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite())
            {
                return Err(invalid("extent intervals must be finite with lo <= hi"));
            }
            for (i, u) in directions.iter().enumerate() {
                if u.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: u.len(),
                    });
                }
                for (j, w) in directions.iter().enumerate().skip(i) {
                    let dot: f64 = u.iter().zip(w).map(|(a, b)| a * b).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (dot - want).abs() > ORTHONORMAL_TOL {
                        return Err(invalid(format!(
                            "spanning directions {i} and {j} are not orthonormal (dot = {dot})"
                        )));
                    }
                }
            }
            if k.fract() == 0.0 && directions.len() != k as usize {
                return Err(invalid(format!(
                    "an affine subspace with {} directions cannot carry integer covering exponent k = {k}",
                    directions.len()
                )));
            }
        }
        Shape::PointCloud(_) => {}
        Shape::BoxUnion(boxes) => {
            if boxes.is_empty() {
                return Err(invalid("box union needs at least one box"));
            }
            for b in boxes {
                if b.lo.len() != d || b.hi.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: b.lo.len().max(b.hi.len()),
                    });
                }
                if !finite(&b.lo) || !finite(&b.hi) || b.lo.iter().zip(&b.hi).any(|(l, h)| l > h) {
                    return Err(invalid("box corners must be finite with lo <= hi"));
                }
            }
        }
    }
    Ok(())
}

/// Covering constant `(2 sqrt(k))^k`: a unit k-cube is covered by at most
/// `(2 sqrt(k))^k delta^-k` balls of radius `delta` whenever `delta <= sqrt(k)`.
pub fn default_covering_constant(k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid(format!("covering exponent k = {k} must be positive")));
    }
    Ok((2.0 * k.sqrt()).powf(k))
}

/// Euclidean distance from `p` to the region.
pub fn distance_to_region(p: &[f64], region: &RegionSpec) -> Result<f64> {
    let d = region.ambient_dim();
    if p.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.len(),
        });
    }
    let dist = match &region.shape {
        Shape::AffineSubspace {
            base,
            directions,
            extent,
        } => {
            let offset: Vec<f64> = p.iter().zip(base).map(|(x, b)| x - b).collect();
            let mut nearest = base.clone();
            for (u, &(lo, hi)) in directions.iter().zip(extent) {
                let t: f64 = offset.iter().zip(u).map(|(v, w)| v * w).sum();
                let t = t.clamp(lo, hi);
                for (n, w) in nearest.iter_mut().zip(u) {
                    *n += t * w;
                }
            }
            dist2(p, &nearest).sqrt()
        }
        Shape::PointCloud(cloud) => cloud.iter().map(|q| dist2(p, q)).fold(f64::INFINITY, f64::min).sqrt(),
        Shape::BoxUnion(boxes) => boxes
            .iter()
            .map(|b| b.distance2(p))
            .fold(f64::INFINITY, f64::min)
            .sqrt(),
    };
    Ok(dist)
}

/// On-disk form of a region (`region.json`).
#[derive(Serialize, Deserialize)]
struct RawRegion {
    #[serde(flatten)]
    shape: RawShape,
    k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_e: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawShape {
    AffineSubspace {
        base: Vec<f64>,
        directions: Vec<Vec<f64>>,
        extent: Vec<[f64; 2]>,
    },
    PointCloud {
        points: Vec<Vec<f64>>,
    },
    BoxUnion {
        boxes: Vec<AxisBox>,
    },
}

impl TryFrom<RawRegion> for RegionSpec {
    type Error = Error;

    fn try_from(raw: RawRegion) -> Result<Self> {
        let shape = match raw.shape {
            RawShape::AffineSubspace {
                base,
                directions,
                extent,
            } => Shape::AffineSubspace {
                base,
                directions,
                extent: extent.into_iter().map(|[lo, hi]| (lo, hi)).collect(),
            },
            RawShape::PointCloud { points } => Shape::PointCloud(PointSet::from_rows(&points)?),
            RawShape::BoxUnion { boxes } => Shape::BoxUnion(boxes),
        };
        RegionSpec::new(shape, raw.k, raw.c_e)
    }
}

impl From<RegionSpec> for RawRegion {
    fn from(region: RegionSpec) -> Self {
        let shape = match region.shape {
            Shape::AffineSubspace {
                base,
                directions,
                extent,
            } => RawShape::AffineSubspace {
                base,
                directions,
                extent: extent.into_iter().map(|(lo, hi)| [lo, hi]).collect(),
            },
            Shape::PointCloud(ps) => RawShape::PointCloud { points: ps.to_rows() },
            Shape::BoxUnion(boxes) => RawShape::BoxUnion { boxes },
        };
        RawRegion {
            shape,
            k: region.k,
            c_e: Some(region.c_e),
        }
    }
}
