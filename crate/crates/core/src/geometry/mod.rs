//! Point sets, families of point sets, and the regions they are measured against.

mod csv;
mod region;

pub use csv::{load_csv, read_csv, save_csv, write_csv};
pub use region::{default_covering_constant, distance_to_region, AxisBox, RegionSpec, Shape};

use std::cmp::Ordering;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};

/// A single point with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("a point needs at least one coordinate"));
        }
        if let Some(coord) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { point: 0, coord });
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Squared Euclidean distance, accumulated in axis order.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        acc += t * t;
    }
    acc
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// An ordered, non-empty collection of points sharing one ambient dimension.
///
/// Coordinates are stored row-major in a single buffer. Duplicate points are
/// allowed here; operations that need distinct points (the energy) reject them.
#[derive(Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Builds a point set from a row-major coordinate buffer.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("ambient dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(Error::Empty);
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                point: i / dim,
                coord: i % dim,
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty)?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    pub fn from_points(points: &[Point]) -> Result<Self> {
        Self::from_rows(points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Per-axis `(min, max)`.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bb = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for p in self.iter() {
            for (b, &x) in bb.iter_mut().zip(p) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        bb
    }

    /// Largest pairwise distance, by exhaustive search.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(dist2(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    /// Image of the set under `x -> factor * x`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, self.coords.iter().map(|x| x * factor).collect())
    }

    /// Indices of the first pair of coinciding points (numeric equality, so
    /// `-0.0 == 0.0`), found by sorting rather than by scanning all pairs.
    pub fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| cmp_points(self.point(a), self.point(b)).then(a.cmp(&b)));
        order
            .windows(2)
            .find(|w| cmp_points(self.point(w[0]), self.point(w[1])) == Ordering::Equal)
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    /// Removes repeated points, keeping the first occurrence of each.
    pub fn dedup(&self) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| cmp_points(self.point(a), self.point(b)).then(a.cmp(&b)));
        let mut keep = vec![false; self.len()];
        for (pos, &i) in order.iter().enumerate() {
            if pos == 0 || cmp_points(self.point(order[pos - 1]), self.point(i)) != Ordering::Equal {
                keep[i] = true;
            }
        }
        let coords = self
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .flat_map(|(p, _)| p.iter().copied())
            .collect();
        Self { dim: self.dim, coords }
    }

    /// SHA-256 over the dimension and the raw coordinate bits, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for x in &self.coords {
            h.update(x.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointSet")
            .field("dim", &self.dim)
            .field("n", &self.len())
            .finish()
    }
}

fn cmp_points(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        // coordinates are finite, so partial_cmp never fails
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// A sequence of point sets with strictly increasing sizes, e.g. successive
/// levels of a fractal construction.
#[derive(Clone, Debug)]
pub struct PointFamily {
    label: String,
    members: Vec<PointSet>,
}

impl PointFamily {
    pub fn new(label: impl Into<String>, members: Vec<PointSet>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| invalid("a family needs at least one member"))?;
        let dim = first.dim();
        for (i, m) in members.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            if i > 0 && m.len() <= members[i - 1].len() {
                return Err(invalid(format!(
                    "family member sizes must strictly increase (member {i} has {} points, previous has {})",
                    m.len(),
                    members[i - 1].len()
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            members,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn members(&self) -> &[PointSet] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(PointSet::len).collect()
    }
}

/// The map `x -> scale * (x - origin)` used by [`rescale_to_unit_cube`].
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub origin: Vec<f64>,
}

impl AffineMap {
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(&self.origin).map(|(x, o)| self.scale * (x - o)).collect()
    }

    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.origin).map(|(v, o)| v / self.scale + o).collect()
    }
}

/// Maps the bounding box of `ps` into the unit cube with a single scale factor,
/// anchoring the box's lower corner at the origin and its longest side at length 1.
pub fn rescale_to_unit_cube(ps: &PointSet) -> Result<(PointSet, AffineMap)> {
    if ps.len() < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            found: ps.len(),
        });
    }
    let bb = ps.bounding_box();
    let longest = bb.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
    if longest == 0.0 {
        return Err(Error::ZeroDiameter);
    }
    let map = AffineMap {
        scale: 1.0 / longest,
        origin: bb.iter().map(|b| b.0).collect(),
    };
    let mut coords = Vec::with_capacity(ps.coords().len());
    for p in ps.iter() {
        for (x, o) in p.iter().zip(&map.origin) {
            // divide rather than multiply by the reciprocal so the longest side lands on 1 exactly
            coords.push(((x - o) / longest).clamp(0.0, 1.0));
        }
    }
    Ok((PointSet::new(ps.dim(), coords)?, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(rows: &[&[f64]]) -> PointSet {
        PointSet::from_rows(rows).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_ragged_input() {
        assert!(matches!(
            PointSet::new(2, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { point: 0, coord: 1 })
        ));
        assert!(matches!(
            PointSet::from_rows(&[vec![0.0, 1.0], vec![2.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(PointSet::new(1, vec![]), Err(Error::Empty)));
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn duplicate_detection_treats_signed_zero_as_equal() {
        let ps = set(&[&[0.0, 1.0], &[0.5, 0.5], &[-0.0, 1.0]]);
        assert_eq!(ps.find_duplicate(), Some((0, 2)));
        assert_eq!(ps.dedup().len(), 2);
        assert_eq!(set(&[&[0.0], &[1.0]]).find_duplicate(), None);
    }

    #[test]
    fn family_requires_increasing_sizes_and_common_dimension() {
        let a = set(&[&[0.0], &[1.0]]);
        let b = set(&[&[0.0], &[0.5], &[1.0]]);
        assert!(PointFamily::new("ok", vec![a.clone(), b.clone()]).is_ok());
        assert!(PointFamily::new("flat", vec![b.clone(), a.clone()]).is_err());
        let c = set(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        assert!(PointFamily::new("mixed", vec![a, c]).is_err());
        assert!(PointFamily::new("empty", vec![]).is_err());
    }

    #[test]
    fn rescale_examples() {
        let (out, map) = rescale_to_unit_cube(&set(&[&[0.0, 0.0], &[2.0, 0.0]])).unwrap();
        assert_eq!(out.to_rows(), vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(map.scale, 0.5);

        let already = set(&[&[0.0, 0.0], &[1.0, 0.25], &[0.5, 0.5]]);
        let (out, _) = rescale_to_unit_cube(&already).unwrap();
        assert_eq!(out, already);

        let (out, map) = rescale_to_unit_cube(&set(&[&[1.0, 1.0], &[3.0, 5.0]])).unwrap();
        assert_eq!(map.scale, 0.25);
        assert_eq!(out.bounding_box(), vec![(0.0, 0.5), (0.0, 1.0)]);
        assert_eq!(map.invert(out.point(1)), vec![3.0, 5.0]);

        assert!(matches!(
            rescale_to_unit_cube(&set(&[&[1.0, 1.0], &[1.0, 1.0]])),
            Err(Error::ZeroDiameter)
        ));
        assert!(rescale_to_unit_cube(&set(&[&[1.0]])).is_err());
    }

    #[test]
    fn content_hash_is_sensitive_to_every_bit() {
        let a = set(&[&[0.0, 1.0]]);
        let b = set(&[&[-0.0, 1.0]]);
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash(), a.clone().content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }

    proptest! {
        #[test]
        fn rescale_preserves_distance_ratios(
            rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 3..12)
        ) {
            let ps = PointSet::from_rows(&rows).unwrap();
            prop_assume!(ps.find_duplicate().is_none());
            let (out, _) = rescale_to_unit_cube(&ps).unwrap();
            let base = dist(ps.point(0), ps.point(1));
            let base_out = dist(out.point(0), out.point(1));
            for i in 0..ps.len() {
                for j in i + 1..ps.len() {
                    let r = dist(ps.point(i), ps.point(j)) / base;
                    let r_out = dist(out.point(i), out.point(j)) / base_out;
                    prop_assert!((r - r_out).abs() <= 1e-12 * r.max(1.0));
                }
            }
            for (lo, hi) in out.bounding_box() {
                prop_assert!(lo >= 0.0 && hi <= 1.0);
            }
        }
    }
}
