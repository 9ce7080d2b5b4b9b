//! Discrete s-energy `I_s(P) = n^-2 * sum_{p != p'} |p - p'|^-s` over ordered
//! pairs, energy sweeps over `s`, and fixed-radius pair counting.

mod cache;
mod pairwise;
mod product;
mod sum;

use serde::{Deserialize, Serialize};

pub use cache::EnergyCache;
pub use sum::Neumaier;

use crate::error::{invalid, Error, Result};
use crate::geometry::PointSet;
use pairwise::{close_pairs, pair_sums};
use product::ProductPlan;

/// Which summation strategy produced an [`EnergyResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// Blocked `O(n^2)` loop over index pairs.
    Pairwise,
    /// Convolution of per-axis-group distance histograms (product sets only).
    Product,
}

/// Kernel selection policy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelChoice {
    /// Product kernel when the set is a product and it is cheaper, else pairwise.
    #[default]
    Auto,
    Pairwise,
    /// Product kernel, failing if the set has no product structure.
    Product,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    pub s: f64,
    pub n: usize,
    pub value: f64,
    /// Ordered pairs summed, `n(n-1)`.
    pub pair_count: u64,
    pub min_distance: f64,
    pub kernel: Kernel,
}

fn check_s(s_values: &[f64]) -> Result<()> {
    match s_values.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        Some(s) => Err(invalid(format!(
            "energy exponent s = {s} must be finite and nonnegative"
        ))),
        None => Ok(()),
    }
}

fn check_points(ps: &PointSet) -> Result<()> {
    if ps.len() < 2 {
        return Err(Error::TooFewPoints {
            required: 2,
            found: ps.len(),
        });
    }
    match ps.find_duplicate() {
        Some((first, second)) => Err(Error::DuplicatePoints { first, second }),
        None => Ok(()),
    }
}

pub fn s_energy(ps: &PointSet, s: f64) -> Result<EnergyResult> {
    Ok(s_energy_sweep(ps, &[s])?.remove(0))
}

/// Energies at several exponents, sharing one pass over the distances.
pub fn s_energy_sweep(ps: &PointSet, s_values: &[f64]) -> Result<Vec<EnergyResult>> {
    s_energy_sweep_with(ps, s_values, KernelChoice::Auto)
}

pub fn s_energy_sweep_with(ps: &PointSet, s_values: &[f64], choice: KernelChoice) -> Result<Vec<EnergyResult>> {
    check_s(s_values)?;
    check_points(ps)?;
    let n = ps.len();
    let plan = match choice {
        KernelChoice::Pairwise => None,
        KernelChoice::Auto => ProductPlan::detect(ps),
        KernelChoice::Product => Some(
            ProductPlan::detect(ps)
                .ok_or_else(|| invalid("point set is not a Cartesian product of axis-group projections"))?,
        ),
    };
    let (ordered, min_d2, kernel) = match plan {
        Some(plan) => {
            let (sums, min_d2) = plan.ordered_sums(s_values);
            (sums, min_d2, Kernel::Product)
        }
        None => {
            let p = pair_sums(ps, s_values);
            (p.sums.iter().map(|x| 2.0 * x).collect(), p.min_d2, Kernel::Pairwise)
        }
    };
    let n2 = (n as f64) * (n as f64);
    Ok(s_values
        .iter()
        .zip(ordered)
        .map(|(&s, total)| EnergyResult {
            s,
            n,
            value: total / n2,
            pair_count: n as u64 * (n as u64 - 1),
            min_distance: min_d2.sqrt(),
            kernel,
        })
        .collect())
}

/// Ordered pairs `(p, p')`, including `p = p'`, with `|p - p'| <= r`.
pub fn count_close_pairs(ps: &PointSet, r: f64) -> Result<u64> {
    if !(r >= 0.0) {
        return Err(invalid(format!("radius r = {r} must be nonnegative")));
    }
    Ok(ps.len() as u64 + 2 * close_pairs(ps, r))
}
