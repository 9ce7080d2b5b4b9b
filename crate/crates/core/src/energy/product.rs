//! Exact energy of point sets that are Cartesian products of their projections
//! onto groups of axes.
//!
//! If `P = P_1 x ... x P_m` with `P_g` living on axis group `g`, every squared
//! distance is `D_1 + ... + D_m` with `D_g` a squared distance inside `P_g`. The
//! multiset of squared distances over all ordered pairs is therefore the
//! convolution of the per-group histograms, which has far fewer distinct
//! values than there are pairs for the lattice-like sets this targets.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::pairwise::Power;
use super::sum::Neumaier;
use crate::geometry::{dist2, PointSet};

/// Folded histograms stop growing past this many distinct keys.
const FOLD_CAP: usize = 1 << 22;
/// Partitions are only enumerated up to this ambient dimension; above it only
/// the split into single axes is tried.
const MAX_PARTITION_DIM: usize = 4;
const CHUNK: usize = 256;

/// Sorted `(squared distance, multiplicity)` pairs.
type Histogram = Vec<(f64, f64)>;

/// A product decomposition: per-group distinct projections.
#[derive(Debug)]
pub(crate) struct ProductPlan {
    #[cfg_attr(not(test), allow(dead_code))]
    pub groups: Vec<Vec<usize>>,
    head: Histogram,
    tail: Histogram,
}

impl ProductPlan {
    /// Tries axis partitions with the most groups first. Returns a plan only
    /// when the set is a product and evaluating it is much cheaper than the
    /// `n(n-1)/2` pairwise kernel. `ps` must be duplicate-free.
    pub(crate) fn detect(ps: &PointSet) -> Option<Self> {
        let d = ps.dim();
        let n = ps.len();
        if d < 2 || n < 2 {
            return None;
        }
        let budget = (n as f64) * (n as f64) / 8.0;
        let partitions = if d <= MAX_PARTITION_DIM {
            set_partitions(d)
        } else {
            vec![(0..d).map(|a| vec![a]).collect()]
        };
        for groups in partitions {
            let Some(projections) = split(ps, &groups) else {
                continue;
            };
            let build: f64 = projections.iter().map(|p| (p.len() as f64).powi(2) / 2.0).sum();
            if build > budget {
                continue;
            }
            let hists: Vec<Histogram> = projections.iter().map(|p| histogram(p)).collect();
            let (head, tail) = fold_all(hists);
            if (head.len() as f64) * (tail.len().max(1) as f64) + build > budget {
                continue;
            }
            return Some(Self { groups, head, tail });
        }
        None
    }

    /// Sums over ordered pairs (not halved), one entry per exponent, plus the
    /// smallest nonzero squared distance.
    pub(crate) fn ordered_sums(&self, s_values: &[f64]) -> (Vec<f64>, f64) {
        let powers: Vec<Power> = s_values.iter().map(|&s| Power::new(s)).collect();
        let log = Power::needs_log(&powers);
        let unit = [(0.0, 1.0)];
        let tail: &[(f64, f64)] = if self.tail.is_empty() { &unit } else { &self.tail };
        let partials: Vec<(Vec<Neumaier>, f64)> = self
            .head
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = vec![Neumaier::new(); powers.len()];
                let mut min_d2 = f64::INFINITY;
                for &(h, ch) in chunk {
                    for &(t, ct) in tail {
                        let d2 = h + t;
                        if d2 == 0.0 {
                            continue;
                        }
                        min_d2 = min_d2.min(d2);
                        let w = ch * ct;
                        let ln_d2 = if log { d2.ln() } else { 0.0 };
                        for (a, &pw) in acc.iter_mut().zip(&powers) {
                            a.add(w * pw.eval(d2, ln_d2));
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
        (total.iter().map(Neumaier::value).collect(), min_d2)
    }
}

/// All set partitions of `0..d` with at least two blocks, most blocks first.
fn set_partitions(d: usize) -> Vec<Vec<Vec<usize>>> {
    // restricted growth strings
    fn rec(a: &mut Vec<usize>, d: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if a.len() == d {
            let blocks = a.iter().max().map_or(0, |m| m + 1);
            if blocks >= 2 {
                let mut groups = vec![Vec::new(); blocks];
                for (axis, &b) in a.iter().enumerate() {
                    groups[b].push(axis);
                }
                out.push(groups);
            }
            return;
        }
        let next = a.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            a.push(b);
            rec(a, d, out);
            a.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(d), d, &mut out);
    out.sort_by_key(|x| std::cmp::Reverse(x.len()));
    out
}

/// Distinct projections onto each group, in first-seen order, if their product
/// has exactly `n` elements (which, for a duplicate-free set, means the set is
/// the full product).
fn split(ps: &PointSet, groups: &[Vec<usize>]) -> Option<Vec<Vec<Vec<f64>>>> {
    let n = ps.len();
    let mut out = Vec::with_capacity(groups.len());
    let mut total: usize = 1;
    for g in groups {
        let mut seen = HashSet::new();
        let mut distinct = Vec::new();
        for p in ps.iter() {
            // +0.0 folds -0.0 into 0.0
            let key: Vec<u64> = g.iter().map(|&a| (p[a] + 0.0).to_bits()).collect();
            if seen.insert(key) {
                distinct.push(g.iter().map(|&a| p[a] + 0.0).collect::<Vec<f64>>());
            }
        }
        total = total.checked_mul(distinct.len())?;
        if total > n || n % distinct.len() != 0 {
            return None;
        }
        out.push(distinct);
    }
    (total == n).then_some(out)
}

/// Squared-distance histogram over ordered pairs of `pts`, diagonal included
/// (key 0), sorted by key; counts are stored as floats (exact below 2^53).
fn histogram(pts: &[Vec<f64>]) -> Histogram {
    let mut h: HashMap<u64, u64> = HashMap::new();
    h.insert(0f64.to_bits(), pts.len() as u64);
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            *h.entry(dist2(p, q).to_bits()).or_default() += 2;
        }
    }
    sorted(h)
}

fn sorted(h: HashMap<u64, u64>) -> Histogram {
    let mut v: Vec<(f64, f64)> = h.into_iter().map(|(k, c)| (f64::from_bits(k), c as f64)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn fold(a: &[(f64, f64)], b: &[(f64, f64)]) -> Histogram {
    let mut h: HashMap<u64, u64> = HashMap::with_capacity(a.len().saturating_mul(b.len()).min(FOLD_CAP));
    for &(x, cx) in a {
        for &(y, cy) in b {
            *h.entry((x + y).to_bits()).or_default() += (cx * cy) as u64;
        }
    }
    sorted(h)
}

/// Folds groups left to right into `head` while it stays under the cap, and
/// the remaining groups into `tail`. Left-to-right folding keeps the
/// per-pair addition order of `dist2` when every group is a single axis.
fn fold_all(hists: Vec<Histogram>) -> (Histogram, Histogram) {
    let mut iter = hists.into_iter();
    let mut head = iter.next().unwrap_or_default();
    let mut rest: Vec<Histogram> = Vec::new();
    for h in iter {
        if rest.is_empty() && head.len().saturating_mul(h.len()) <= FOLD_CAP {
            head = fold(&head, &h);
        } else {
            rest.push(h);
        }
    }
    let mut rest = rest.into_iter();
    let mut tail = rest.next().unwrap_or_default();
    for h in rest {
        tail = fold(&tail, &h);
    }
    (head, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_cantor_product, gen_lattice, CantorParams};

    #[test]
    fn partitions_of_three_axes() {
        let p = set_partitions(3);
        assert_eq!(p.len(), 4); // Bell(3) = 5 minus the single block
        assert_eq!(p[0], vec![vec![0], vec![1], vec![2]]);
        assert!(p.contains(&vec![vec![0, 2], vec![1]]));
        assert_eq!(set_partitions(4).len(), 14);
    }

    #[test]
    fn detects_products_and_rejects_others() {
        let lat = gen_lattice(2, 12).unwrap();
        let plan = ProductPlan::detect(&lat).unwrap();
        assert_eq!(plan.groups, vec![vec![0], vec![1]]);

        let garnett = gen_cantor_product(&[CantorParams::new(2, 4, 3), CantorParams::new(2, 4, 3)]).unwrap();
        assert!(ProductPlan::detect(&garnett).is_some());

        let mut rows = lat.to_rows();
        rows.pop();
        assert!(ProductPlan::detect(&PointSet::from_rows(&rows).unwrap()).is_none());
    }

    #[test]
    fn histogram_counts_every_ordered_pair() {
        let pts: Vec<Vec<f64>> = [0.0, 0.5, 1.0].iter().map(|&x| vec![x]).collect();
        let h = histogram(&pts);
        assert_eq!(h, vec![(0.0, 3.0), (0.25, 4.0), (1.0, 2.0)]);
        let total: f64 = fold(&h, &h).iter().map(|e| e.1).sum();
        assert_eq!(total, 81.0);
    }
}
