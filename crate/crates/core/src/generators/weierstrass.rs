use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::for_each_index;
use crate::error::{invalid, Result};
use crate::geometry::PointSet;

/// `f(x) = sum_{i < N} a^i cos(2 pi (b^i x + theta_i))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassParams {
    pub a: f64,
    pub b: f64,
    pub phases: Vec<f64>,
}

impl WeierstrassParams {
    /// Truncated at `phases.len()` terms.
    pub fn with_phases(a: f64, b: f64, phases: Vec<f64>) -> Result<Self> {
        let p = Self { a, b, phases };
        p.validate()?;
        Ok(p)
    }

    /// Phases drawn uniformly from `[0, 1)` by a ChaCha20 stream keyed on `seed`;
    /// `terms = None` picks [`default_terms`].
    pub fn seeded(a: f64, b: f64, seed: u64, terms: Option<usize>) -> Result<Self> {
        check_ab(a, b)?;
        let terms = terms.unwrap_or_else(|| default_terms(a));
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let phases = (0..terms).map(|_| rng.random::<f64>()).collect();
        Self::with_phases(a, b, phases)
    }

    /// All phases zero.
    pub fn zero_phase(a: f64, b: f64, terms: usize) -> Result<Self> {
        Self::with_phases(a, b, vec![0.0; terms])
    }

    pub fn validate(&self) -> Result<()> {
        check_ab(self.a, self.b)?;
        if self.phases.is_empty() {
            return Err(invalid("truncation must keep at least one term"));
        }
        if self.phases.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(invalid("phases must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn terms(&self) -> usize {
        self.phases.len()
    }

    /// Hölder exponent `-ln a / ln b`.
    pub fn holder_exponent(&self) -> f64 {
        holder_exponent(self.a, self.b)
    }

    /// `1 / (1 - a)`, which bounds `|f|` for every truncation.
    pub fn amplitude_bound(&self) -> f64 {
        1.0 / (1.0 - self.a)
    }

    /// Evaluates the truncated series at an arbitrary real `x`.
    pub fn value(&self, x: f64) -> f64 {
        let mut amp = 1.0;
        let mut freq = 1.0;
        let mut sum = 0.0;
        for &theta in &self.phases {
            let t = freq * x;
            sum += amp * (TAU * (t - t.floor() + theta)).cos();
            amp *= self.a;
            freq *= self.b;
        }
        sum
    }

    /// Evaluates at the grid point `x = j / q`. For integer `b` the fractional
    /// part of `b^i j / q` is reduced exactly as `(b^i j mod q) / q`; a float
    /// product would lose it once `b^i` passes `2^53`.
    pub fn value_at_grid(&self, j: usize, q: usize) -> f64 {
        if self.b.fract() != 0.0 || self.b > u64::MAX as f64 || q == 0 {
            return self.value(j as f64 / q as f64);
        }
        let b = self.b as u128;
        let q128 = q as u128;
        let mut b_pow = 1u128 % q128;
        let mut amp = 1.0;
        let mut sum = 0.0;
        for &theta in &self.phases {
            let r = (b_pow * j as u128) % q128;
            sum += amp * (TAU * (r as f64 / q as f64 + theta)).cos();
            amp *= self.a;
            b_pow = (b_pow * b) % q128;
        }
        sum
    }
}

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid(format!("need 0 < a < 1 (a = {a})")));
    }
    if !(b > 1.0) || !b.is_finite() {
        return Err(invalid(format!("need b > 1 (b = {b})")));
    }
    if a * b < 1.0 {
        return Err(invalid(format!(
            "need a * b >= 1 so the Hölder exponent is at most 1 (a * b = {})",
            a * b
        )));
    }
    Ok(())
}

pub fn holder_exponent(a: f64, b: f64) -> f64 {
    -a.ln() / b.ln()
}

/// Smallest `N` whose tail bound `a^N / (1 - a)` drops below `1e-12`.
pub fn default_terms(a: f64) -> usize {
    ((1e-12 * (1.0 - a)).ln() / a.ln()).ceil().max(1.0) as usize
}

/// The graph `{ (j/q, g(j/q)) : j in [0,q)^(d-1) }` with `g(x) = f(x_1)`. With
/// `rescale`, values are mapped affinely from `[-1/(1-a), 1/(1-a)]` onto `[0, 1]`.
pub fn gen_weierstrass_graph(params: &WeierstrassParams, d: usize, q: usize, rescale: bool) -> Result<PointSet> {
    params.validate()?;
    if d < 2 {
        return Err(invalid("a graph needs ambient dimension d >= 2"));
    }
    if q < 2 {
        return Err(invalid(format!("grid side q = {q} must be at least 2")));
    }
    let bound = params.amplitude_bound();
    let values: Vec<f64> = (0..q)
        .into_par_iter()
        .map(|j| {
            let y = params.value_at_grid(j, q);
            if rescale {
                ((y + bound) / (2.0 * bound)).clamp(0.0, 1.0)
            } else {
                y
            }
        })
        .collect();
    let mut coords = Vec::with_capacity(q.pow(d as u32 - 1) * d);
    for_each_index(d - 1, q, |j| {
        coords.extend(j.iter().map(|&ji| ji as f64 / q as f64));
        coords.push(values[j[0]]);
    });
    PointSet::new(d, coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_phase_at_origin_is_a_geometric_series() {
        for terms in [1, 5, 20, 60] {
            let w = WeierstrassParams::zero_phase(0.5, 3.0, terms).unwrap();
            let expected = 2.0 * (1.0 - 0.5f64.powi(terms as i32));
            assert!((w.value(0.0) - expected).abs() < 1e-15);
            assert!((w.value_at_grid(0, 7) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn holder_exponent_of_reference_parameters() {
        // -ln 0.5 / ln 3
        assert!((holder_exponent(0.5, 3.0) - 0.630_929_753_571_457_4).abs() < 1e-15);
        assert!((holder_exponent(0.5, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_truncation() {
        assert_eq!(default_terms(0.5), 41);
        let w = WeierstrassParams::seeded(0.5, 3.0, 1, None).unwrap();
        assert_eq!(w.terms(), 41);
        assert!(0.5f64.powi(41) / 0.5 < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        assert!(WeierstrassParams::seeded(1.0, 3.0, 0, None).is_err());
        assert!(WeierstrassParams::seeded(0.5, 1.0, 0, None).is_err());
        assert!(WeierstrassParams::seeded(0.2, 3.0, 0, None).is_err()); // a*b < 1
        assert!(WeierstrassParams::with_phases(0.5, 3.0, vec![1.5]).is_err());
        assert!(WeierstrassParams::with_phases(0.5, 3.0, vec![]).is_err());
    }

    #[test]
    fn two_sample_graph() {
        let w = WeierstrassParams::zero_phase(0.5, 3.0, 30).unwrap();
        let ps = gen_weierstrass_graph(&w, 2, 2, false).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.point(0), &[0.0, w.value_at_grid(0, 2)]);
        assert_eq!(ps.point(1), &[0.5, w.value_at_grid(1, 2)]);
        assert!((ps.point(1)[1] - w.value(0.5)).abs() < 1e-12);
    }

    #[test]
    fn exact_reduction_matches_float_evaluation_while_float_is_exact() {
        let w = WeierstrassParams::seeded(0.5, 3.0, 9, Some(12)).unwrap();
        for q in [2, 7, 64, 243] {
            for j in 0..q {
                let exact = w.value_at_grid(j, q);
                let float = w.value(j as f64 / q as f64);
                assert!((exact - float).abs() < 1e-9, "q={q} j={j}");
            }
        }
    }

    #[test]
    fn truncation_error_is_within_tail_bound() {
        let long = WeierstrassParams::seeded(0.7, 2.0, 3, Some(120)).unwrap();
        for n in [5, 10, 20, 40] {
            let short = WeierstrassParams::with_phases(0.7, 2.0, long.phases[..n].to_vec()).unwrap();
            let bound = 0.7f64.powi(n as i32) / (1.0 - 0.7);
            for j in 0..50 {
                let gap = (short.value_at_grid(j, 50) - long.value_at_grid(j, 50)).abs();
                assert!(gap <= bound + 1e-15, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn graphs_are_deterministic_and_rescaled_into_unit_interval() {
        let w = WeierstrassParams::seeded(0.5, 3.0, 42, None).unwrap();
        let a = gen_weierstrass_graph(&w, 3, 8, true).unwrap();
        let b = gen_weierstrass_graph(&WeierstrassParams::seeded(0.5, 3.0, 42, None).unwrap(), 3, 8, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert!(a.iter().all(|p| (0.0..=1.0).contains(&p[2])));
        // g is constant in x_2
        assert_eq!(a.point(0)[2], a.point(1)[2]);
        let other = gen_weierstrass_graph(&WeierstrassParams::seeded(0.5, 3.0, 43, None).unwrap(), 3, 8, true).unwrap();
        assert_ne!(a, other);
    }
}
