//! Closed-form consequences of the covering condition
//! `N_E(delta) <= max(C_E delta^-k, 1)` for a region `E`: energy lower bounds
//! for point sets inside (or near) `E`, and upper bounds on how many points of
//! a set with known `s`-energy can lie in (or near) `E`.
//!
//! Every formula requires `s > k > 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyCache;
use crate::error::{invalid, Error, Result};
use crate::geometry::{distance_to_region, PointSet, RegionSpec, Shape};

/// Rounding slack for membership in an affine region, whose distance is
/// computed through a projection.
const AFFINE_TOL: f64 = 1e-12;

fn check_sk(s: f64, k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid(format!("covering exponent k = {k} must be positive")));
    }
    if !(s > k && s.is_finite()) {
        return Err(Error::Hypothesis(format!("the bounds need s > k (s = {s}, k = {k})")));
    }
    Ok(())
}

fn check_c_e(c_e: f64) -> Result<()> {
    if c_e > 0.0 && c_e.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("covering constant C_E = {c_e} must be positive")))
    }
}

/// `A_{s,k} = s (s + 1) (s - k) / (k (s - k + 1))`.
pub fn a_constant(s: f64, k: f64) -> Result<f64> {
    check_sk(s, k)?;
    Ok(s * (s + 1.0) * (s - k) / (k * (s - k + 1.0)))
}

/// `I_s(P) >= k/(s-k) C_E^(-s/k) (n^(s/k - 1) - 1)` for every `n`-point `P` inside `E`.
pub fn energy_lower_bound(s: f64, k: f64, c_e: f64, n: usize) -> Result<f64> {
    check_sk(s, k)?;
    check_c_e(c_e)?;
    let r = s / k;
    Ok(k / (s - k) * c_e.powf(-r) * ((n as f64).powf(r - 1.0) - 1.0))
}

/// `|P ∩ E| <= (1 + C_E^(s/k) (s/k - 1) I_s)^(1/(s/k + 1)) n^(2/(s/k + 1))`.
pub fn concentration_bound(s: f64, k: f64, c_e: f64, energy: f64, n: usize) -> Result<f64> {
    check_sk(s, k)?;
    check_c_e(c_e)?;
    if !(energy >= 0.0) {
        return Err(invalid(format!("energy {energy} must be nonnegative")));
    }
    let r = s / k;
    let e = 1.0 / (r + 1.0);
    Ok((1.0 + c_e.powf(r) * (r - 1.0) * energy).powf(e) * (n as f64).powf(2.0 * e))
}

/// Lower bound for sets within distance `eps` of `E`:
/// `k/(s-k) C_E^(-s/k) ((1 - eps A_{s,k} / (C_E^(1/k) n^(-1/k))) n^(s/k - 1) - 1)`.
pub fn thickened_energy_lower_bound(s: f64, k: f64, c_e: f64, n: usize, eps: f64) -> Result<f64> {
    check_sk(s, k)?;
    check_c_e(c_e)?;
    if !(eps >= 0.0) {
        return Err(invalid(format!("thickening eps = {eps} must be nonnegative")));
    }
    let r = s / k;
    let a = a_constant(s, k)?;
    let nf = n as f64;
    let scale = c_e.powf(1.0 / k) * nf.powf(-1.0 / k);
    Ok(k / (s - k) * c_e.powf(-r) * ((1.0 - eps * a / scale) * nf.powf(r - 1.0) - 1.0))
}

/// The thickening `eps = C_E^(1/k) / (2 A_{s,k}) n^(-1/k)` at which the
/// thickened lower bound keeps half of the leading term.
pub fn prescribed_epsilon(s: f64, k: f64, c_e: f64, n: usize) -> Result<f64> {
    check_sk(s, k)?;
    check_c_e(c_e)?;
    Ok(c_e.powf(1.0 / k) / (2.0 * a_constant(s, k)?) * (n as f64).powf(-1.0 / k))
}

/// `(k/(s-k) C_E^(-s/k) (n^(s/k - 1)/2 - 1), eps)` with `eps` from [`prescribed_epsilon`].
pub fn halved_energy_lower_bound(s: f64, k: f64, c_e: f64, n: usize) -> Result<(f64, f64)> {
    let eps = prescribed_epsilon(s, k, c_e, n)?;
    let r = s / k;
    let value = k / (s - k) * c_e.powf(-r) * (0.5 * (n as f64).powf(r - 1.0) - 1.0);
    Ok((value, eps))
}

/// `(2^(1/(s/k + 1)) * concentration_bound, eps)`: the bound on `|P ∩ E^eps|`
/// at the prescribed thickening.
pub fn thickened_concentration_bound(s: f64, k: f64, c_e: f64, energy: f64, n: usize) -> Result<(f64, f64)> {
    let base = concentration_bound(s, k, c_e, energy, n)?;
    let eps = prescribed_epsilon(s, k, c_e, n)?;
    Ok((2f64.powf(1.0 / (s / k + 1.0)) * base, eps))
}

fn membership_slack(region: &RegionSpec) -> f64 {
    match region.shape() {
        Shape::AffineSubspace { .. } => AFFINE_TOL,
        _ => 0.0,
    }
}

/// `|P ∩ E^eps|`: points within distance `eps` of the region.
pub fn count_in_thickened_region(ps: &PointSet, region: &RegionSpec, eps: f64) -> Result<usize> {
    if !(eps >= 0.0) {
        return Err(invalid(format!("thickening eps = {eps} must be nonnegative")));
    }
    if ps.dim() != region.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: region.ambient_dim(),
            found: ps.dim(),
        });
    }
    let limit = eps + membership_slack(region);
    let hits: Vec<bool> = ps
        .coords()
        .par_chunks_exact(ps.dim())
        .map(|p| distance_to_region(p, region).map(|d| d <= limit))
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().filter(|&h| h).count())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `I_s(P) >= energy_lower_bound` for `P ⊂ E`.
    EnergyLowerBound,
    /// `I_s(P) >= thickened_energy_lower_bound` for `P ⊂ E^eps`.
    ThickenedEnergyLowerBound,
    /// `|P ∩ E| <= concentration_bound`.
    Concentration,
    /// `|P ∩ E^eps| <= thickened_concentration_bound`.
    ThickenedConcentration,
}

impl BoundKind {
    /// True when the checked inequality is `lhs >= rhs`.
    pub fn is_lower_bound(self) -> bool {
        matches!(self, Self::EnergyLowerBound | Self::ThickenedEnergyLowerBound)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub s: f64,
    pub k: f64,
    pub c_e: f64,
    pub n: usize,
    pub energy: f64,
    pub eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: BoundKind,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `lhs / rhs` for upper bounds, `rhs / lhs` for lower bounds: at most 1
    /// when satisfied, close to 1 when tight.
    pub tightness: f64,
    pub inputs: BoundInputs,
}

impl BoundReport {
    fn new(bound: BoundKind, lhs: f64, rhs: f64, inputs: BoundInputs) -> Self {
        let (satisfied, tightness) = if bound.is_lower_bound() {
            (lhs >= rhs, rhs / lhs)
        } else {
            (lhs <= rhs, lhs / rhs)
        };
        Self {
            bound,
            lhs,
            rhs,
            satisfied,
            tightness,
            inputs,
        }
    }
}

/// How the thickening is chosen in [`verify_concentration`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsMode {
    /// Count points in `E` itself.
    #[default]
    Exact,
    /// Count points in `E^eps` at the prescribed thickening.
    Auto,
    /// Count points in `E^eps` at a given thickening no larger than the
    /// prescribed one (`0` is the same as `Exact`).
    Value(f64),
}

impl std::str::FromStr for EpsMode {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text.trim() {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|e| *e >= 0.0 && e.is_finite())
                .map(Self::Value)
                .ok_or_else(|| {
                    invalid(format!(
                        "eps must be 'auto', 'exact' or a nonnegative number, got {t:?}"
                    ))
                }),
        }
    }
}

/// Computes `I_s(P)` and checks the count of points in `E` (or its thickening)
/// against the concentration bound.
pub fn verify_concentration(ps: &PointSet, region: &RegionSpec, s: f64, mode: EpsMode) -> Result<BoundReport> {
    verify_concentration_cached(ps, region, s, mode, &EnergyCache::new())
}

pub fn verify_concentration_cached(
    ps: &PointSet,
    region: &RegionSpec,
    s: f64,
    mode: EpsMode,
    cache: &EnergyCache,
) -> Result<BoundReport> {
    let (k, c_e, n) = (region.k(), region.c_e(), ps.len());
    check_sk(s, k)?;
    if ps.dim() != region.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: region.ambient_dim(),
            found: ps.dim(),
        });
    }
    let prescribed = prescribed_epsilon(s, k, c_e, n)?;
    let eps = match mode {
        EpsMode::Exact | EpsMode::Value(0.0) => None,
        EpsMode::Auto => Some(prescribed),
        EpsMode::Value(e) if e <= prescribed => Some(e),
        EpsMode::Value(e) => {
            return Err(Error::Hypothesis(format!(
                "eps = {e} exceeds the thickening {prescribed:e} for which the bound holds"
            )))
        }
    };
    let energy = cache.energy(ps, s)?.value;
    let count = count_in_thickened_region(ps, region, eps.unwrap_or(0.0))? as f64;
    let inputs = BoundInputs {
        s,
        k,
        c_e,
        n,
        energy,
        eps,
    };
    Ok(match eps {
        None => BoundReport::new(
            BoundKind::Concentration,
            count,
            concentration_bound(s, k, c_e, energy, n)?,
            inputs,
        ),
        Some(_) => {
            let (rhs, _) = thickened_concentration_bound(s, k, c_e, energy, n)?;
            BoundReport::new(BoundKind::ThickenedConcentration, count, rhs, inputs)
        }
    })
}

/// Checks `I_s(P)` against the energy lower bound, after confirming every
/// point lies within `eps` of the region (`eps = 0` for the unthickened bound).
pub fn verify_energy_lower_bound(ps: &PointSet, region: &RegionSpec, s: f64, eps: f64) -> Result<BoundReport> {
    let (k, c_e, n) = (region.k(), region.c_e(), ps.len());
    check_sk(s, k)?;
    let inside = count_in_thickened_region(ps, region, eps)?;
    if inside != n {
        return Err(Error::Hypothesis(format!(
            "only {inside} of {n} points lie within eps = {eps} of the region"
        )));
    }
    let energy = crate::energy::s_energy(ps, s)?.value;
    let inputs = BoundInputs {
        s,
        k,
        c_e,
        n,
        energy,
        eps: (eps > 0.0).then_some(eps),
    };
    Ok(if eps > 0.0 {
        let rhs = thickened_energy_lower_bound(s, k, c_e, n, eps)?;
        BoundReport::new(BoundKind::ThickenedEnergyLowerBound, energy, rhs, inputs)
    } else {
        BoundReport::new(
            BoundKind::EnergyLowerBound,
            energy,
            energy_lower_bound(s, k, c_e, n)?,
            inputs,
        )
    })
}

/// Scans exponents `s > k` and returns the report with the smallest
/// concentration bound; every scanned report comes back too, in grid order.
pub fn best_concentration_exponent(
    ps: &PointSet,
    region: &RegionSpec,
    s_values: &[f64],
    mode: EpsMode,
    cache: &EnergyCache,
) -> Result<(BoundReport, Vec<BoundReport>)> {
    let admissible: Vec<f64> = s_values.iter().copied().filter(|&s| s > region.k()).collect();
    if admissible.is_empty() {
        return Err(Error::Hypothesis(format!(
            "no exponent above k = {} to scan",
            region.k()
        )));
    }
    cache.sweep(ps, &admissible)?;
    let reports = admissible
        .iter()
        .map(|&s| verify_concentration_cached(ps, region, s, mode, cache))
        .collect::<Result<Vec<_>>>()?;
    let best = reports
        .iter()
        .min_by(|a, b| a.rhs.total_cmp(&b.rhs))
        .cloned()
        .expect("nonempty");
    Ok((best, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_adversarial_lattice, gen_cantor, gen_cantor_product, gen_lattice, CantorParams};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn a_constant_examples() {
        assert_eq!(a_constant(2.0, 1.0).unwrap(), 3.0);
        assert_eq!(a_constant(1.5, 0.5).unwrap(), 3.75);
        assert!(a_constant(1.0 + 1e-12, 1.0).unwrap() < 1e-10);
        assert!(a_constant(1.0, 1.0).is_err());
        assert!(a_constant(1.0, 0.0).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(energy_lower_bound(2.0, 1.0, 3.0, 1).unwrap(), 0.0);
        assert_eq!(energy_lower_bound(2.0, 1.0, 1.0, 100).unwrap(), 99.0);
        assert!(close(energy_lower_bound(1.0, 0.5, 2.0, 16).unwrap(), 3.75, 1e-15));
        assert!(energy_lower_bound(1.0, 1.0, 1.0, 10).is_err());
    }

    #[test]
    fn concentration_examples() {
        assert!(close(
            concentration_bound(2.0, 1.0, 5.0, 0.0, 100).unwrap(),
            100f64.powf(2.0 / 3.0),
            1e-15
        ));
        let v = concentration_bound(2.0, 1.0, 1.0, 1.0, 100).unwrap();
        assert!(close(v, 2f64.powf(1.0 / 3.0) * 100f64.powf(2.0 / 3.0), 1e-15));
        assert!((v - 27.144).abs() < 1e-3);
        // the exponent 2/(s/k + 1) vanishes as s/k grows
        let far = concentration_bound(200.0, 1.0, 1.0, 0.0, 1_000_000).unwrap();
        assert!(far > 1.0 && far < 1.15);
    }

    #[test]
    fn thickened_examples() {
        for (s, k, c, n) in [(2.0, 1.0, 1.0, 100), (1.5, 0.5, 3.0, 50), (2.5, 2.0, 8.0, 400)] {
            assert_eq!(
                thickened_energy_lower_bound(s, k, c, n, 0.0).unwrap(),
                energy_lower_bound(s, k, c, n).unwrap()
            );
            let (half, eps) = halved_energy_lower_bound(s, k, c, n).unwrap();
            assert!(close(
                thickened_energy_lower_bound(s, k, c, n, eps).unwrap(),
                half,
                1e-12
            ));
        }
        assert!(close(
            thickened_energy_lower_bound(2.0, 1.0, 1.0, 100, 1.0 / 600.0).unwrap(),
            49.0,
            1e-12
        ));

        let (v, eps) = thickened_concentration_bound(2.0, 1.0, 1.0, 1.0, 100).unwrap();
        assert!(close(v, 4f64.powf(1.0 / 3.0) * 100f64.powf(2.0 / 3.0), 1e-15));
        assert!((v - 34.20).abs() < 5e-3);
        assert!(close(eps, 1.0 / 600.0, 1e-15));
        let ratio = v / concentration_bound(2.0, 1.0, 1.0, 1.0, 100).unwrap();
        assert!(close(ratio, 2f64.powf(1.0 / 3.0), 1e-15));
        assert!(prescribed_epsilon(2.0, 1.0, 1.0, 1_000_000).unwrap() < 1e-6);
    }

    #[test]
    fn counting() {
        let lat = gen_lattice(2, 10).unwrap();
        let axis = RegionSpec::new(
            Shape::AffineSubspace {
                base: vec![0.0, 0.0],
                directions: vec![vec![1.0, 0.0]],
                extent: vec![(0.0, 1.0)],
            },
            1.0,
            None,
        )
        .unwrap();
        assert_eq!(count_in_thickened_region(&lat, &axis, 0.0).unwrap(), 10);
        assert_eq!(count_in_thickened_region(&lat, &axis, 2.0).unwrap(), 100);
        let mut last = 0;
        for i in 0..30 {
            let c = count_in_thickened_region(&lat, &axis, i as f64 * 0.04).unwrap();
            assert!(c >= last);
            last = c;
        }
        assert!(count_in_thickened_region(&lat, &axis, -1.0).is_err());

        for k in 1..=5 {
            let f = CantorParams::new(2, 4, k);
            let garnett = gen_cantor_product(&[f.clone(), f.clone()]).unwrap();
            let expected = gen_cantor(&f).unwrap().len();
            assert_eq!(count_in_thickened_region(&garnett, &axis, 0.0).unwrap(), expected);
            assert_eq!(expected, 1 << (k + 1));
        }
    }

    #[test]
    fn eps_modes() {
        assert_eq!("auto".parse::<EpsMode>().unwrap(), EpsMode::Auto);
        assert_eq!("0.01".parse::<EpsMode>().unwrap(), EpsMode::Value(0.01));
        assert!("-1".parse::<EpsMode>().is_err());
        assert!("wide".parse::<EpsMode>().is_err());
    }

    #[test]
    fn verification_against_adversarial_lattice() {
        let (s, k) = (1.5, 1.0);
        let region = RegionSpec::new(Shape::coordinate_plane(2, 1), k, None).unwrap();
        for q in [10, 20] {
            let n = q * q;
            let m = (n as f64).powf(2.0 / (1.0 + s / k)).floor() as usize;
            let ps = gen_adversarial_lattice(2, q, 1, m).unwrap();
            let r = verify_concentration(&ps, &region, s, EpsMode::Exact).unwrap();
            assert_eq!(r.lhs, m as f64);
            assert!(r.satisfied, "{r:?}");
            let t = verify_concentration(&ps, &region, s, EpsMode::Auto).unwrap();
            assert!(t.satisfied && t.inputs.eps.is_some());
        }
        let ps = gen_lattice(2, 5).unwrap();
        assert!(matches!(
            verify_concentration(&ps, &region, 1.0, EpsMode::Exact),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            verify_concentration(&ps, &region, 1.5, EpsMode::Value(10.0)),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn lower_bound_verification() {
        let region = RegionSpec::new(Shape::coordinate_plane(3, 2), 2.0, None).unwrap();
        let rows: Vec<[f64; 3]> = gen_lattice(2, 12).unwrap().iter().map(|p| [0.0, p[0], p[1]]).collect();
        let ps = PointSet::from_rows(&rows).unwrap();
        let r = verify_energy_lower_bound(&ps, &region, 2.5, 0.0).unwrap();
        assert!(r.satisfied && r.bound == BoundKind::EnergyLowerBound);
        // the plane itself is also a point set entirely inside the region
        let c = verify_concentration(&ps, &region, 2.5, EpsMode::Exact).unwrap();
        assert!(c.satisfied && c.lhs == ps.len() as f64);

        let shifted = PointSet::from_rows(&rows.iter().map(|p| [1e-4, p[1], p[2]]).collect::<Vec<_>>()).unwrap();
        assert!(verify_energy_lower_bound(&shifted, &region, 2.5, 0.0).is_err());
        let t = verify_energy_lower_bound(&shifted, &region, 2.5, 1e-4).unwrap();
        assert!(t.satisfied && t.bound == BoundKind::ThickenedEnergyLowerBound);
    }

    #[test]
    fn exponent_scan_picks_the_smallest_bound() {
        let region = RegionSpec::new(Shape::coordinate_plane(2, 1), 1.0, None).unwrap();
        let ps = gen_adversarial_lattice(2, 12, 1, 40).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let (best, all) =
            best_concentration_exponent(&ps, &region, &grid, EpsMode::Exact, &EnergyCache::new()).unwrap();
        assert_eq!(all.len(), 10);
        assert!(all.iter().all(|r| r.rhs >= best.rhs && r.satisfied));
        assert!(best_concentration_exponent(&ps, &region, &[0.5, 1.0], EpsMode::Exact, &EnergyCache::new()).is_err());
    }
}
