use std::collections::BTreeMap;

use crate::error::{invalid, Result};
use crate::geometry::PointSet;

/// Calls `f` with every multi-index in `[0, q)^d`, last axis varying fastest.
pub(crate) fn for_each_index(d: usize, q: usize, mut f: impl FnMut(&[usize])) {
    if d == 0 {
        f(&[]);
        return;
    }
    let mut idx = vec![0usize; d];
    loop {
        f(&idx);
        let mut a = d;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < q {
                break;
            }
            idx[a] = 0;
        }
    }
}

fn checked_count(d: usize, q: usize) -> Result<usize> {
    u32::try_from(d)
        .ok()
        .and_then(|d| q.checked_pow(d))
        .filter(|&n| n <= 1 << 30)
        .ok_or_else(|| invalid(format!("{q}^{d} points is too many")))
}

/// `{ j / (q - 1) : j in Z^d, 0 <= j_i <= q - 1 }`, the `q^d` points of a uniform
/// grid filling `[0,1]^d`.
pub fn gen_lattice(d: usize, q: usize) -> Result<PointSet> {
    if d == 0 {
        return Err(invalid("lattice dimension must be at least 1"));
    }
    if q < 2 {
        return Err(invalid(format!("lattice side q = {q} must be at least 2")));
    }
    let n = checked_count(d, q)?;
    let step = (q - 1) as f64;
    let mut coords = Vec::with_capacity(n * d);
    for_each_index(d, q, |j| coords.extend(j.iter().map(|&ji| ji as f64 / step)));
    PointSet::new(d, coords)
}

/// The `d`-dimensional lattice with its `q^k` points on the plane
/// `x_1 = ... = x_{d-k} = 0` replaced by an `m`-point `k`-dimensional grid of
/// spacing `1/r`, `r = ceil(m^(1/k))`, truncated to its first `m` points.
///
/// The result has `q^d - q^k + m` points: the surviving lattice points in
/// lexicographic order followed by the plane points.
pub fn gen_adversarial_lattice(d: usize, q: usize, k: usize, m: usize) -> Result<PointSet> {
    if k == 0 || k >= d {
        return Err(invalid(format!("need 1 <= k < d (k = {k}, d = {d})")));
    }
    if m == 0 {
        return Err(invalid("the densified plane needs at least one point"));
    }
    let lattice = gen_lattice(d, q)?;
    let codim = d - k;
    let mut coords = Vec::with_capacity((lattice.len() + m) * d);
    for p in lattice.iter() {
        if p[..codim].iter().any(|&x| x != 0.0) {
            coords.extend_from_slice(p);
        }
    }
    let side = kth_root_ceil(m, k);
    let mut emitted = 0;
    for_each_index(k, side, |j| {
        if emitted < m {
            coords.extend(std::iter::repeat_n(0.0, codim));
            coords.extend(j.iter().map(|&ji| ji as f64 / side as f64));
            emitted += 1;
        }
    });
    PointSet::new(d, coords)
}

/// Smallest `r` with `r^k >= m`.
fn kth_root_ceil(m: usize, k: usize) -> usize {
    let pow_at_least = |r: usize| {
        let mut acc: u128 = 1;
        for _ in 0..k {
            acc *= r as u128;
            if acc >= m as u128 {
                return true;
            }
        }
        acc >= m as u128
    };
    let mut r = ((m as f64).powf(1.0 / k as f64).floor() as usize)
        .saturating_sub(1)
        .max(1);
    while !pow_at_least(r) {
        r += 1;
    }
    r
}

/// The point set graph `{ (j/q, f(j/q)) : j in [0,q)^(d-1) }` from samples of `f`
/// given on every grid index.
pub fn gen_graph_from_samples(values: &BTreeMap<Vec<usize>, f64>, d: usize, q: usize) -> Result<PointSet> {
    if d < 2 {
        return Err(invalid("a graph needs ambient dimension d >= 2"));
    }
    if q == 0 {
        return Err(invalid("grid side q must be positive"));
    }
    let n = checked_count(d - 1, q)?;
    let mut coords = Vec::with_capacity(n * d);
    let mut missing = None;
    for_each_index(d - 1, q, |j| {
        if missing.is_some() {
            return;
        }
        match values.get(j) {
            Some(&y) => {
                coords.extend(j.iter().map(|&ji| ji as f64 / q as f64));
                coords.push(y);
            }
            None => missing = Some(j.to_vec()),
        }
    });
    if let Some(j) = missing {
        return Err(invalid(format!("no sample for grid point {j:?}")));
    }
    PointSet::new(d, coords)
}

/// Point set graph of a function evaluated on the grid.
pub fn gen_graph_from_fn(d: usize, q: usize, f: impl Fn(&[f64]) -> f64) -> Result<PointSet> {
    if d < 2 {
        return Err(invalid("a graph needs ambient dimension d >= 2"));
    }
    if q == 0 {
        return Err(invalid("grid side q must be positive"));
    }
    let n = checked_count(d - 1, q)?;
    let mut coords = Vec::with_capacity(n * d);
    let mut x = vec![0.0; d - 1];
    for_each_index(d - 1, q, |j| {
        for (xi, &ji) in x.iter_mut().zip(j) {
            *xi = ji as f64 / q as f64;
        }
        coords.extend_from_slice(&x);
        coords.push(f(&x));
    });
    PointSet::new(d, coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_examples() {
        assert_eq!(
            gen_lattice(2, 2).unwrap().to_rows(),
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
        assert_eq!(gen_lattice(1, 3).unwrap().coords(), &[0.0, 0.5, 1.0]);
        assert_eq!(gen_lattice(2, 11).unwrap().len(), 121);
        assert!(gen_lattice(2, 1).is_err());
        assert!(gen_lattice(0, 3).is_err());
    }

    #[test]
    fn adversarial_cardinality() {
        let ps = gen_adversarial_lattice(2, 10, 1, 50).unwrap();
        assert_eq!(ps.len(), 140);
        let on_plane = ps.iter().filter(|p| p[0] == 0.0).count();
        assert_eq!(on_plane, 50);

        let ps = gen_adversarial_lattice(3, 5, 2, 40).unwrap();
        assert_eq!(ps.len(), 125 - 25 + 40);
        assert_eq!(ps.iter().filter(|p| p[0] == 0.0).count(), 40);
        assert!(ps.find_duplicate().is_none());
    }

    #[test]
    fn adversarial_without_densification_is_a_lattice() {
        let ps = gen_adversarial_lattice(2, 6, 1, 6).unwrap();
        assert_eq!(ps.len(), 36);
        let plane: Vec<f64> = ps.iter().filter(|p| p[0] == 0.0).map(|p| p[1]).collect();
        assert_eq!(plane, (0..6).map(|j| j as f64 / 6.0).collect::<Vec<_>>());
    }

    #[test]
    fn adversarial_parameter_errors() {
        assert!(gen_adversarial_lattice(2, 10, 2, 5).is_err());
        assert!(gen_adversarial_lattice(2, 10, 0, 5).is_err());
        assert!(gen_adversarial_lattice(2, 10, 1, 0).is_err());
        assert!(gen_adversarial_lattice(2, 1, 1, 5).is_err());
    }

    #[test]
    fn kth_roots() {
        assert_eq!(kth_root_ceil(50, 1), 50);
        assert_eq!(kth_root_ceil(49, 2), 7);
        assert_eq!(kth_root_ceil(50, 2), 8);
        assert_eq!(kth_root_ceil(1, 3), 1);
        assert_eq!(kth_root_ceil(28, 3), 4);
    }

    #[test]
    fn graph_examples() {
        let zero: BTreeMap<Vec<usize>, f64> = (0..4).map(|j| (vec![j], 0.0)).collect();
        let ps = gen_graph_from_samples(&zero, 2, 4).unwrap();
        assert_eq!(ps.len(), 4);
        assert!(ps.iter().all(|p| p[1] == 0.0));

        let diag: BTreeMap<Vec<usize>, f64> = (0..4).map(|j| (vec![j], j as f64 / 4.0)).collect();
        let ps = gen_graph_from_samples(&diag, 2, 4).unwrap();
        assert!(ps.iter().all(|p| p[0] == p[1]));

        let ps = gen_graph_from_fn(3, 3, |x| x[0] * x[1]).unwrap();
        assert_eq!(ps.len(), 9);

        let mut partial = zero.clone();
        partial.remove(&vec![2]);
        assert!(gen_graph_from_samples(&partial, 2, 4).is_err());
        assert!(gen_graph_from_fn(1, 3, |_| 0.0).is_err());
    }
}
