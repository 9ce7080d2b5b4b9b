use rayon::prelude::*;

use super::sum::Neumaier;
use crate::geometry::{dist2, PointSet};

/// Index block edge length; tile `(I, J)` covers rows `I*TILE..` and columns `J*TILE..`.
pub(crate) const TILE: usize = 1024;

/// `d^-s` evaluated from the squared distance, with exact shortcuts for the
/// common exponents.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Power {
    Zero,
    One,
    Two,
    General(f64),
}

impl Power {
    pub(crate) fn new(s: f64) -> Self {
        match s {
            0.0 => Self::Zero,
            1.0 => Self::One,
            2.0 => Self::Two,
            _ => Self::General(-0.5 * s),
        }
    }

    /// `d2^(-s/2)`; `ln_d2` is only read by the general case.
    #[inline(always)]
    pub(crate) fn eval(self, d2: f64, ln_d2: f64) -> f64 {
        match self {
            Self::Zero => 1.0,
            Self::One => 1.0 / d2.sqrt(),
            Self::Two => 1.0 / d2,
            Self::General(neg_half_s) => (neg_half_s * ln_d2).exp(),
        }
    }

    pub(crate) fn needs_log(powers: &[Power]) -> bool {
        powers.iter().any(|p| matches!(p, Self::General(_)))
    }
}

/// Sum of `|p - p'|^-s` over unordered pairs `i < j`, one compensated sum per
/// exponent, plus the smallest squared distance seen.
pub(crate) struct PairSums {
    pub sums: Vec<f64>,
    pub min_d2: f64,
}

/// Blocked pairwise kernel. Tiles are processed in parallel, each with its own
/// compensated accumulators, and reduced in tile order, so the result does not
/// depend on the number of worker threads.
pub(crate) fn pair_sums(ps: &PointSet, s_values: &[f64]) -> PairSums {
    let n = ps.len();
    let powers: Vec<Power> = s_values.iter().map(|&s| Power::new(s)).collect();
    let log = Power::needs_log(&powers);
    let tiles = n.div_ceil(TILE);
    let tile_pairs: Vec<(usize, usize)> = (0..tiles).flat_map(|a| (a..tiles).map(move |b| (a, b))).collect();

    let partials: Vec<(Vec<Neumaier>, f64)> = tile_pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = vec![Neumaier::new(); powers.len()];
            let mut min_d2 = f64::INFINITY;
            let rows = a * TILE..((a + 1) * TILE).min(n);
            for i in rows {
                let p = ps.point(i);
                let start = if a == b { i + 1 } else { b * TILE };
                for j in start..((b + 1) * TILE).min(n) {
                    let d2 = dist2(p, ps.point(j));
                    min_d2 = min_d2.min(d2);
                    let ln_d2 = if log { d2.ln() } else { 0.0 };
                    for (acc, &pw) in acc.iter_mut().zip(&powers) {
                        acc.add(pw.eval(d2, ln_d2));
                    }
                }
            }
            (acc, min_d2)
        })
        .collect();

    let mut total = vec![Neumaier::new(); powers.len()];
    let mut min_d2 = f64::INFINITY;
    for (acc, m) in &partials {
        for (t, a) in total.iter_mut().zip(acc) {
            t.merge(a);
        }
        min_d2 = min_d2.min(*m);
    }
    PairSums {
        sums: total.iter().map(Neumaier::value).collect(),
        min_d2,
    }
}

/// Number of unordered pairs `i < j` with `|p_i - p_j| <= r`.
pub(crate) fn close_pairs(ps: &PointSet, r: f64) -> u64 {
    let n = ps.len();
    let tiles = n.div_ceil(TILE);
    (0..tiles)
        .into_par_iter()
        .map(|a| {
            let mut count = 0u64;
            for i in a * TILE..((a + 1) * TILE).min(n) {
                let p = ps.point(i);
                for j in i + 1..n {
                    if dist2(p, ps.point(j)).sqrt() <= r {
                        count += 1;
                    }
                }
            }
            count
        })
        .sum()
}
