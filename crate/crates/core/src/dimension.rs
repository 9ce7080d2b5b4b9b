//! Discrete Hausdorff dimension of a point family: the supremum of the
//! exponents `s` whose energies `I_s(P_n)` stay bounded as `n` grows.
//!
//! Boundedness is not observable from finitely many members, so the estimator
//! measures a growth exponent on a grid of `s` and reports where it crosses a
//! threshold. Two growth statistics are available:
//!
//! * [`EstimatorMethod::SlopeThreshold`]: OLS slope of `ln I_s` against `ln n`,
//!   threshold `0.1`. At the critical exponent the energy grows like `ln n`,
//!   which this slope sees as roughly `1 / ln n`, so at desk scale it
//!   underestimates the dimension.
//! * [`EstimatorMethod::IncrementGrowth`] (default): OLS slope of
//!   `ln (I_s(P_{j+1}) - I_s(P_j))` against `ln n_{j+1}`, threshold `0`. The
//!   increments of a bounded sequence decay while those of a growing one do
//!   not, and the logarithmic growth at the critical exponent lands exactly on
//!   zero.

use serde::{Deserialize, Serialize};

use crate::energy::EnergyCache;
use crate::error::{invalid, Error, Result};
use crate::geometry::PointFamily;

/// Smallest accepted `max n / min n` for a growth fit.
pub const MIN_SIZE_RATIO: f64 = 8.0;

/// Least-squares fit of `ln I_s(P_n)` against `ln n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub s: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit, in units of `ln I_s`.
    pub residual: f64,
    pub n_values: Vec<usize>,
    pub energies: Vec<f64>,
}

/// Least-squares fit of `ln (I_s(P_{j+1}) - I_s(P_j))` against `ln n_{j+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementFit {
    pub s: f64,
    /// `None` when some increment is not positive: the energies are not
    /// growing at this `s`, which counts as below any threshold.
    pub exponent: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    pub n_values: Vec<usize>,
    pub increments: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMethod {
    #[default]
    IncrementGrowth,
    SlopeThreshold,
}

impl EstimatorMethod {
    pub fn default_threshold(self) -> f64 {
        match self {
            Self::IncrementGrowth => 0.0,
            Self::SlopeThreshold => 0.1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::IncrementGrowth => "increment_growth",
            Self::SlopeThreshold => "slope_threshold",
        }
    }
}

/// Where the estimate sits relative to the scanned `s` range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// The threshold is crossed inside the range.
    Interior,
    /// Growth exceeds the threshold already at `s_min`; the dimension is at most `s_min`.
    Lower,
    /// Growth never exceeds the threshold; the dimension is at least `s_max`.
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub s_min: f64,
    /// Defaults to the ambient dimension.
    pub s_max: Option<f64>,
    pub step: f64,
    /// Defaults to [`EstimatorMethod::default_threshold`].
    pub threshold: Option<f64>,
    pub method: EstimatorMethod,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            s_min: 0.0,
            s_max: None,
            step: 0.05,
            threshold: None,
            method: EstimatorMethod::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub boundary: Boundary,
    pub method: EstimatorMethod,
    pub threshold: f64,
    pub s_grid: Vec<f64>,
    pub slopes: Vec<SlopeFit>,
    pub increment_slopes: Vec<IncrementFit>,
    pub label: String,
    pub n_values: Vec<usize>,
}

/// Ordinary least squares `y = slope * x + intercept`; returns the RMS residual too.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    (slope, intercept, (ss / m).sqrt())
}

fn check_family(family: &PointFamily) -> Result<()> {
    if family.len() < 3 {
        return Err(invalid(format!(
            "a growth fit needs at least 3 family members, got {}",
            family.len()
        )));
    }
    let sizes = family.sizes();
    let ratio = *sizes.last().unwrap() as f64 / sizes[0] as f64;
    if ratio < MIN_SIZE_RATIO {
        return Err(invalid(format!(
            "member sizes span a ratio of {ratio:.3}; at least {MIN_SIZE_RATIO} is needed"
        )));
    }
    Ok(())
}

fn energy_table(family: &PointFamily, s_values: &[f64], cache: &EnergyCache) -> Result<Vec<Vec<f64>>> {
    // table[member][s]
    family
        .members()
        .iter()
        .map(|m| Ok(cache.sweep(m, s_values)?.into_iter().map(|r| r.value).collect()))
        .collect()
}

fn fit_slope(s: f64, n_values: &[usize], energies: Vec<f64>) -> Result<SlopeFit> {
    if let Some(bad) = energies.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(invalid(format!(
            "energy {bad} at s = {s} cannot be fitted on a log scale"
        )));
    }
    let x: Vec<f64> = n_values.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
    let (slope, intercept, residual) = ols(&x, &y);
    Ok(SlopeFit {
        s,
        slope,
        intercept,
        residual,
        n_values: n_values.to_vec(),
        energies,
    })
}

fn fit_increments(s: f64, n_values: &[usize], energies: &[f64]) -> IncrementFit {
    let increments: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let upper: Vec<usize> = n_values[1..].to_vec();
    let (exponent, intercept, residual) = if increments.iter().all(|&d| d > 0.0) {
        let x: Vec<f64> = upper.iter().map(|&n| (n as f64).ln()).collect();
        let y: Vec<f64> = increments.iter().map(|d| d.ln()).collect();
        let (a, b, r) = ols(&x, &y);
        (Some(a), Some(b), Some(r))
    } else {
        (None, None, None)
    };
    IncrementFit {
        s,
        exponent,
        intercept,
        residual,
        n_values: upper,
        increments,
    }
}

/// OLS slope of `ln I_s(P_n)` against `ln n` over the family members.
pub fn slope_fit(family: &PointFamily, s: f64) -> Result<SlopeFit> {
    slope_fit_cached(family, s, &EnergyCache::new())
}

pub fn slope_fit_cached(family: &PointFamily, s: f64, cache: &EnergyCache) -> Result<SlopeFit> {
    check_family(family)?;
    let table = energy_table(family, &[s], cache)?;
    fit_slope(s, &family.sizes(), table.into_iter().map(|row| row[0]).collect())
}

/// Growth exponent of the energy increments between consecutive members.
pub fn increment_fit(family: &PointFamily, s: f64) -> Result<IncrementFit> {
    check_family(family)?;
    let table = energy_table(family, &[s], &EnergyCache::new())?;
    let energies: Vec<f64> = table.into_iter().map(|row| row[0]).collect();
    Ok(fit_increments(s, &family.sizes(), &energies))
}

/// `s_min, s_min + step, ...` up to `s_max`, which is always included.
pub fn s_grid(s_min: f64, s_max: f64, step: f64) -> Vec<f64> {
    let steps = ((s_max - s_min) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|i| s_min + i as f64 * step).collect();
    if s_max - grid.last().unwrap() > 1e-9 * step {
        grid.push(s_max);
    } else {
        *grid.last_mut().unwrap() = s_max;
    }
    grid
}

pub fn estimate_dimension(family: &PointFamily, opts: &EstimateOptions) -> Result<DimensionEstimate> {
    estimate_dimension_cached(family, opts, &EnergyCache::new())
}

pub fn estimate_dimension_cached(
    family: &PointFamily,
    opts: &EstimateOptions,
    cache: &EnergyCache,
) -> Result<DimensionEstimate> {
    let d = family.dim() as f64;
    let s_max = opts.s_max.unwrap_or(d);
    if !(opts.s_min >= 0.0 && opts.s_min < s_max && s_max <= d) {
        return Err(invalid(format!(
            "need 0 <= s_min < s_max <= d (s_min = {}, s_max = {s_max}, d = {d})",
            opts.s_min
        )));
    }
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(invalid(format!("step {} must be positive", opts.step)));
    }
    let threshold = opts.threshold.unwrap_or(opts.method.default_threshold());
    if !threshold.is_finite() || (opts.method == EstimatorMethod::SlopeThreshold && threshold <= 0.0) {
        return Err(invalid(format!("threshold {threshold} is out of range")));
    }
    check_family(family)?;

    let grid = s_grid(opts.s_min, s_max, opts.step);
    let table = energy_table(family, &grid, cache)?;
    let sizes = family.sizes();
    let column = |j: usize| -> Vec<f64> { table.iter().map(|row| row[j]).collect() };

    let slopes = grid
        .iter()
        .enumerate()
        .map(|(j, &s)| fit_slope(s, &sizes, column(j)))
        .collect::<Result<Vec<_>>>()?;
    let increment_slopes: Vec<IncrementFit> = grid
        .iter()
        .enumerate()
        .map(|(j, &s)| fit_increments(s, &sizes, &column(j)))
        .collect();

    let growth: Vec<f64> = match opts.method {
        EstimatorMethod::SlopeThreshold => slopes.iter().map(|f| f.slope).collect(),
        EstimatorMethod::IncrementGrowth => increment_slopes
            .iter()
            .map(|f| f.exponent.unwrap_or(f64::NEG_INFINITY))
            .collect(),
    };
    let (value, boundary) = crossing(&grid, &growth, threshold);

    Ok(DimensionEstimate {
        value,
        boundary,
        method: opts.method,
        threshold,
        s_grid: grid,
        slopes,
        increment_slopes,
        label: family.label().to_string(),
        n_values: sizes,
    })
}

/// Largest grid `s` whose growth is at most `threshold`, linearly interpolated
/// towards the next grid point where the growth exceeds it.
fn crossing(grid: &[f64], growth: &[f64], threshold: f64) -> (f64, Boundary) {
    let last = grid.len() - 1;
    match (0..=last).rev().find(|&i| growth[i] <= threshold) {
        None => (grid[0], Boundary::Lower),
        Some(i) if i == last => (grid[last], Boundary::Upper),
        Some(i) => {
            let (g0, g1) = (growth[i], growth[i + 1]);
            let t = if g0.is_finite() {
                (threshold - g0) / (g1 - g0)
            } else {
                0.0
            };
            (grid[i] + t * (grid[i + 1] - grid[i]), Boundary::Interior)
        }
    }
}

/// `sum ln m_i / ln n_i`, the dimension of a product of discrete Cantor families.
pub fn cantor_product_dimension(factors: &[(usize, usize)]) -> Result<f64> {
    if factors.is_empty() {
        return Err(invalid("need at least one Cantor factor"));
    }
    factors
        .iter()
        .map(|&(m, n)| {
            if m == 0 || m >= n {
                Err(invalid(format!("Cantor factor needs 1 <= m < n (m = {m}, n = {n})")))
            } else {
                Ok((m as f64).ln() / (n as f64).ln())
            }
        })
        .sum()
}

/// `d - alpha`, the dimension bound for graphs of `alpha`-Hölder functions on `[0,1]^(d-1)`.
pub fn holder_dimension_bound(d: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("Hölder exponent {alpha} must lie in (0, 1]")));
    }
    if d < 2 {
        return Err(Error::InvalidParameter("graphs need ambient dimension d >= 2".into()));
    }
    Ok(d as f64 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{
        gen_cantor, gen_cantor_product, gen_graph_from_fn, gen_lattice, gen_weierstrass_graph, holder_exponent,
        CantorParams, WeierstrassParams,
    };
    use crate::geometry::PointSet;

    fn lattice_family(d: usize, qs: &[usize]) -> PointFamily {
        PointFamily::new("lattice", qs.iter().map(|&q| gen_lattice(d, q).unwrap()).collect()).unwrap()
    }

    fn cantor_family(m: usize, n: usize, levels: std::ops::RangeInclusive<u32>) -> PointFamily {
        let members = levels
            .map(|k| gen_cantor(&CantorParams::new(m, n, k)).unwrap())
            .collect();
        PointFamily::new("cantor", members).unwrap()
    }

    #[test]
    fn ols_recovers_a_line() {
        let (a, b, r) = ols(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 5.0, 7.0]);
        assert!((a - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14 && r < 1e-14);
    }

    #[test]
    fn grid_includes_both_ends() {
        let g = s_grid(0.0, 2.0, 0.05);
        assert_eq!(g.len(), 41);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert_eq!(s_grid(0.0, 1.0, 0.3), vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
    }

    #[test]
    fn crossing_rules() {
        let grid = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(crossing(&grid, &[-1.0, -0.5, 0.5, 1.0], 0.0), (1.5, Boundary::Interior));
        assert_eq!(crossing(&grid, &[-1.0, -0.5, -0.1, -0.01], 0.0), (3.0, Boundary::Upper));
        assert_eq!(crossing(&grid, &[0.2, 0.5, 0.7, 1.0], 0.1), (0.0, Boundary::Lower));
        // the largest sub-threshold point wins even after an early excursion
        assert_eq!(
            crossing(&grid, &[0.3, f64::NEG_INFINITY, 1.0, 2.0], 0.0),
            (1.0, Boundary::Interior)
        );
    }

    #[test]
    fn formula_oracles() {
        assert_eq!(cantor_product_dimension(&[(2, 4), (2, 4)]).unwrap(), 1.0);
        let d = cantor_product_dimension(&[(2, 4), (2, 3), (2, 3)]).unwrap();
        assert!((d - (0.5 + 2.0 * 2f64.ln() / 3f64.ln())).abs() < 1e-15);
        assert!((d - 1.7618595071429148).abs() < 1e-12);
        assert_eq!(cantor_product_dimension(&[(1, 2)]).unwrap(), 0.0);
        assert!(cantor_product_dimension(&[(3, 3)]).is_err());
        assert!(cantor_product_dimension(&[]).is_err());

        assert_eq!(holder_dimension_bound(2, 1.0).unwrap(), 1.0);
        let w = holder_dimension_bound(2, -(0.5f64.ln()) / 3f64.ln()).unwrap();
        assert!((w - 1.3690702464285425).abs() < 1e-12);
        assert_eq!(holder_dimension_bound(3, 0.5).unwrap(), 2.5);
        assert!(holder_dimension_bound(2, 0.0).is_err());
        assert!(holder_dimension_bound(2, 1.5).is_err());
    }

    #[test]
    fn fit_preconditions() {
        let two = lattice_family(2, &[4, 16]);
        assert!(slope_fit(&two, 1.0).is_err());
        let narrow = lattice_family(2, &[4, 5, 6]);
        assert!(slope_fit(&narrow, 1.0).is_err());
        let dup = PointSet::from_rows(&[[0.0, 0.0], [0.0, 0.0]]).unwrap();
        let members = vec![dup, gen_lattice(2, 3).unwrap(), gen_lattice(2, 6).unwrap()];
        let fam = PointFamily::new("dup", members).unwrap();
        assert!(matches!(slope_fit(&fam, 1.0), Err(Error::DuplicatePoints { .. })));
        assert!(estimate_dimension(&fam, &EstimateOptions::default()).is_err());
    }

    #[test]
    fn lattice_slopes() {
        let fam = lattice_family(2, &[16, 32, 64, 128]);
        // s = 2 sits at the critical exponent: the energy grows like ln n, whose
        // log-log slope at these sizes is about 1 / ln n
        let at = slope_fit(&fam, 2.0).unwrap();
        assert!(at.slope > 0.15 && at.slope < 0.22, "{}", at.slope);
        assert_eq!(at.n_values, vec![256, 1024, 4096, 16384]);
    }

    #[test]
    fn slope_above_dimension_matches_exponent() {
        let fam = PointFamily::new(
            "lattice3",
            [16, 32, 64, 128]
                .iter()
                .map(|&q| gen_lattice(2, q).unwrap().scaled(0.5).unwrap())
                .collect(),
        )
        .unwrap();
        // s = 3 > d = 2 is outside estimate_dimension's range but fine for a fit;
        // the s/k - 1 = 0.5 exponent is approached from above as the constant
        // term in I_s ~ c n^0.5 - c' fades
        let f = slope_fit(&fam, 3.0).unwrap();
        assert!((f.slope - 0.5).abs() < 0.1, "{}", f.slope);
    }

    #[test]
    fn cantor_slope_is_flat_at_small_s() {
        let fam = cantor_family(2, 4, 4..=9);
        let f = slope_fit(&fam, 0.1).unwrap();
        assert!(f.slope < 0.1, "{}", f.slope);
    }

    #[test]
    fn one_dimensional_cantor_family() {
        let fam = cantor_family(2, 4, 4..=10);
        let est = estimate_dimension(&fam, &EstimateOptions::default()).unwrap();
        assert_eq!(est.boundary, Boundary::Interior);
        assert!((est.value - 0.5).abs() < 0.05, "{}", est.value);
        assert_eq!(est.slopes.len(), est.s_grid.len());
        assert_eq!(est.increment_slopes.len(), est.s_grid.len());
    }

    #[test]
    fn garnett_family_and_slope_monotonicity() {
        let members = (3..=7)
            .map(|k| gen_cantor_product(&[CantorParams::new(2, 4, k), CantorParams::new(2, 4, k)]).unwrap())
            .collect();
        let fam = PointFamily::new("garnett", members).unwrap();
        let est = estimate_dimension(&fam, &EstimateOptions::default()).unwrap();
        assert!((est.value - 1.0).abs() <= 0.15, "{}", est.value);
        for w in est.slopes.windows(2) {
            let band = 2.0 * w[0].residual.max(w[1].residual);
            assert!(w[1].slope >= w[0].slope - band, "s={}", w[1].s);
        }
    }

    #[test]
    fn lipschitz_graph_family() {
        let members = [32, 64, 128, 256, 512]
            .iter()
            .map(|&q| gen_graph_from_fn(2, q, |x| 0.5 + 0.4 * (3.0 * x[0]).sin()).unwrap())
            .collect();
        let fam = PointFamily::new("graph", members).unwrap();
        let est = estimate_dimension(&fam, &EstimateOptions::default()).unwrap();
        assert!(est.value >= 1.0 - 0.1, "{}", est.value);
        assert!((est.value - 1.0).abs() < 0.1, "{}", est.value);
    }

    /// Graph of a fixed-seed Weierstrass function over `q^(d-1)` grid points.
    fn weierstrass_family(d: usize, qs: &[usize]) -> PointFamily {
        let w = WeierstrassParams::seeded(0.5, 3.0, 1, None).unwrap();
        PointFamily::new(
            "weierstrass",
            qs.iter()
                .map(|&q| gen_weierstrass_graph(&w, d, q, true).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn weierstrass_graph_dimension_in_two_and_three_dimensions() {
        let alpha = holder_exponent(0.5, 3.0);
        for d in [2, 3] {
            // the d = 3 graph is a product with a segment, so the product kernel keeps q = 512 cheap
            let est = estimate_dimension(
                &weierstrass_family(d, &[64, 128, 256, 512]),
                &EstimateOptions::default(),
            )
            .unwrap();
            let expected = holder_dimension_bound(d, alpha).unwrap();
            assert!(
                (est.value - expected).abs() <= 0.15,
                "d = {d}: {} vs {expected}",
                est.value
            );
        }
    }

    #[test]
    fn literal_threshold_method_is_available() {
        let fam = lattice_family(2, &[16, 32, 64, 128]);
        let opts = EstimateOptions {
            method: EstimatorMethod::SlopeThreshold,
            ..EstimateOptions::default()
        };
        let est = estimate_dimension(&fam, &opts).unwrap();
        assert_eq!(est.threshold, 0.1);
        assert_eq!(est.method, EstimatorMethod::SlopeThreshold);
        assert!(est.value > 1.0 && est.value < 2.0);
    }

    #[test]
    fn option_validation() {
        let fam = lattice_family(2, &[4, 8, 16]);
        let bad = |o: EstimateOptions| estimate_dimension(&fam, &o).is_err();
        assert!(bad(EstimateOptions {
            s_max: Some(2.5),
            ..Default::default()
        }));
        assert!(bad(EstimateOptions {
            s_min: 1.0,
            s_max: Some(1.0),
            ..Default::default()
        }));
        assert!(bad(EstimateOptions {
            step: 0.0,
            ..Default::default()
        }));
        assert!(bad(EstimateOptions {
            method: EstimatorMethod::SlopeThreshold,
            threshold: Some(0.0),
            ..Default::default()
        }));
    }
}
