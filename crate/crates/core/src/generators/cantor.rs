use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::PointSet;

/// Upper limit on the number of kept intervals `m^k` materialized by [`gen_cantor`].
const MAX_INTERVALS: u128 = 1 << 26;

/// Parameters of a discrete Cantor set: split every surviving interval into `n`
/// equal pieces and keep the pieces at `kept` (the same ones at every level),
/// `level` times.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorParams {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "k")]
    pub level: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kept: Option<Vec<usize>>,
}

impl CantorParams {
    pub fn new(m: usize, n: usize, level: u32) -> Self {
        Self {
            m,
            n,
            level,
            kept: None,
        }
    }

    pub fn with_kept(mut self, kept: Vec<usize>) -> Self {
        self.kept = Some(kept);
        self
    }

    /// The kept sub-interval indices: the explicit list if given, otherwise
    /// `0, 2, 4, ...` when `m` non-adjacent indices fit in `[0, n)`, else `0..m`.
    pub fn kept_indices(&self) -> Vec<usize> {
        match &self.kept {
            Some(k) => k.clone(),
            None if 2 * self.m.saturating_sub(1) < self.n => (0..self.m).map(|i| 2 * i).collect(),
            None => (0..self.m).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m >= self.n {
            return Err(invalid(format!(
                "Cantor parameters need 1 <= m < n (m = {}, n = {})",
                self.m, self.n
            )));
        }
        if self.level == 0 {
            return Err(invalid("Cantor level must be at least 1"));
        }
        let kept = self.kept_indices();
        if kept.len() != self.m {
            return Err(invalid(format!("expected {} kept indices, got {}", self.m, kept.len())));
        }
        if kept.windows(2).any(|w| w[0] >= w[1]) || kept.iter().any(|&i| i >= self.n) {
            return Err(invalid(format!(
                "kept indices {kept:?} must be strictly increasing and below n = {}",
                self.n
            )));
        }
        let intervals = (self.m as u128).checked_pow(self.level);
        if intervals.is_none_or(|c| c > MAX_INTERVALS) {
            return Err(invalid(format!(
                "m^k = {}^{} intervals exceeds the limit of {MAX_INTERVALS}",
                self.m, self.level
            )));
        }
        if (self.n as u128).checked_pow(self.level).is_none() {
            return Err(invalid(format!("n^k = {}^{} overflows", self.n, self.level)));
        }
        Ok(())
    }

    /// `ln m / ln n`, the dimension contributed by one factor.
    pub fn similarity_dimension(&self) -> f64 {
        (self.m as f64).ln() / (self.n as f64).ln()
    }
}

/// Sorted, duplicate-free coordinates of the endpoints of all kept level-`k` intervals.
pub fn cantor_coordinates(params: &CantorParams) -> Result<Vec<f64>> {
    params.validate()?;
    let kept: Vec<u128> = params.kept_indices().into_iter().map(|i| i as u128).collect();
    let n = params.n as u128;
    // left endpoints in units of n^-level
    let mut lefts: Vec<u128> = vec![0];
    for _ in 0..params.level {
        lefts = lefts
            .iter()
            .flat_map(|&l| kept.iter().map(move |&i| l * n + i))
            .collect();
    }
    let mut ends: Vec<u128> = lefts.iter().flat_map(|&l| [l, l + 1]).collect();
    ends.sort_unstable();
    ends.dedup();
    let denom = n.pow(params.level) as f64;
    Ok(ends.into_iter().map(|e| e as f64 / denom).collect())
}

pub fn gen_cantor(params: &CantorParams) -> Result<PointSet> {
    PointSet::new(1, cantor_coordinates(params)?)
}

/// Cartesian product of discrete Cantor sets of a common level, first factor
/// varying slowest.
pub fn gen_cantor_product(factors: &[CantorParams]) -> Result<PointSet> {
    let first = factors
        .first()
        .ok_or_else(|| invalid("a Cantor product needs at least one factor"))?;
    if let Some(f) = factors.iter().find(|f| f.level != first.level) {
        return Err(invalid(format!(
            "all factors must share one level (found {} and {})",
            first.level, f.level
        )));
    }
    let axes = factors.iter().map(cantor_coordinates).collect::<Result<Vec<_>>>()?;
    cartesian_product(&axes)
}

/// Lexicographic product of per-axis coordinate lists.
pub fn cartesian_product(axes: &[Vec<f64>]) -> Result<PointSet> {
    if axes.is_empty() || axes.iter().any(Vec::is_empty) {
        return Err(invalid("every axis of a product needs at least one value"));
    }
    let d = axes.len();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut coords = Vec::with_capacity(total * d);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        coords.extend(idx.iter().zip(axes).map(|(&i, axis)| axis[i]));
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }
    PointSet::new(d, coords)
}
