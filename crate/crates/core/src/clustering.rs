//! Deterministic k-means used to group samples before box abstraction.
//!
//! Seeding picks the first center with a seeded RNG and then repeatedly takes
//! the point farthest from all chosen centers (ties go to the lowest index).
//! Lloyd iterations follow until the largest centroid displacement drops
//! below `tol` or `max_iter` is reached. Clusters that end up empty are
//! dropped rather than reseeded.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FeatureVector;

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    /// Cluster index per input point, in input order.
    pub assignments: Vec<usize>,
    pub centroids: Vec<FeatureVector>,
    /// Number of non-empty clusters.
    pub k: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusteringResult {
    /// Points grouped by cluster, preserving input order inside each group.
    pub fn groups<'a>(&self, points: &'a [FeatureVector]) -> Vec<Vec<&'a FeatureVector>> {
        let mut out = vec![Vec::new(); self.k];
        for (p, &a) in points.iter().zip(&self.assignments) {
            out[a].push(p);
        }
        out
    }

    /// Within-cluster sum of squared distances to the centroids.
    pub fn inertia(&self, points: &[FeatureVector]) -> f64 {
        points
            .iter()
            .zip(&self.assignments)
            .map(|(p, &a)| sq_dist(p.as_slice(), self.centroids[a].as_slice()))
            .sum()
    }
}

/// Default cluster count: `max(1, floor(sqrt(n / 2)))`, capped at `n`.
pub fn choose_k(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("choose_k requires at least one point"));
    }
    let k = ((n as f64) / 2.0).sqrt().floor() as usize;
    Ok(k.max(1).min(n))
}

pub fn kmeans(
    points: &[FeatureVector],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<ClusteringResult> {
    if points.is_empty() {
        return Err(Error::Empty("clustering input"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the number of points ({})",
            points.len()
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let dim = points[0].dim();
    if let Some(p) = points.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: p.dim(),
        });
    }

    let mut centroids = seed_centers(points, k, seed);
    let mut assignments = vec![0usize; points.len()];
    let mut iterations = 0;
    let mut converged = false;
    let mut last_inertia = f64::INFINITY;

    loop {
        assign(points, &centroids, &mut assignments);
        let (means, remap) = recompute(points, &assignments, centroids.len(), dim);
        for a in &mut assignments {
            *a = remap[*a].expect("assigned cluster is non-empty");
        }
        // Displacement is measured only over clusters that survived.
        let shift = remap
            .iter()
            .enumerate()
            .filter_map(|(old, new)| new.map(|n| sq_dist(&centroids[old], &means[n]).sqrt()))
            .fold(0.0f64, f64::max);
        centroids = means;
        iterations += 1;

        let inertia: f64 = points
            .iter()
            .zip(&assignments)
            .map(|(p, &a)| sq_dist(p.as_slice(), &centroids[a]))
            .sum();
        debug_assert!(
            inertia <= last_inertia + 1e-9 * last_inertia.abs().max(1.0),
            "k-means inertia increased: {last_inertia} -> {inertia}"
        );
        last_inertia = inertia;

        if shift < tol {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
    }

    let centroids = centroids
        .into_iter()
        .map(FeatureVector::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusteringResult {
        assignments,
        k: centroids.len(),
        centroids,
        iterations,
        converged,
    })
}

fn seed_centers(points: &[FeatureVector], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..points.len());
    let mut centers = vec![points[first].as_slice().to_vec()];
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p.as_slice(), &centers[0]))
        .collect();
    while centers.len() < k {
        let mut best = 0;
        for (i, d) in nearest.iter().enumerate() {
            if *d > nearest[best] {
                best = i;
            }
        }
        let c = points[best].as_slice().to_vec();
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p.as_slice(), &c));
        }
        centers.push(c);
    }
    centers
}

fn assign(points: &[FeatureVector], centroids: &[Vec<f64>], out: &mut [usize]) {
    for (p, slot) in points.iter().zip(out.iter_mut()) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in centroids.iter().enumerate() {
            let d = sq_dist(p.as_slice(), c);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        *slot = best;
    }
}

/// Means of non-empty clusters plus the old-index to new-index map.
fn recompute(
    points: &[FeatureVector],
    assignments: &[usize],
    k: usize,
    dim: usize,
) -> (Vec<Vec<f64>>, Vec<Option<usize>>) {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p.as_slice()) {
            *s += v;
        }
    }
    let mut remap = vec![None; k];
    let mut means = Vec::with_capacity(k);
    for (i, (sum, n)) in sums.into_iter().zip(counts).enumerate() {
        if n == 0 {
            continue;
        }
        remap[i] = Some(means.len());
        means.push(sum.into_iter().map(|s| s / n as f64).collect());
    }
    (means, remap)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(raw: &[[f64; 2]]) -> Vec<FeatureVector> {
        raw.iter().map(|p| FeatureVector::new(p.to_vec()).unwrap()).collect()
    }

    /// Brute force: every assignment of n points to k labels, best inertia.
    fn brute_force_partition(points: &[FeatureVector], k: usize) -> (f64, Vec<usize>) {
        let n = points.len();
        let mut best = (f64::INFINITY, vec![]);
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut labels = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                labels.push(c % k);
                c /= k;
            }
            let mut cost = 0.0;
            for g in 0..k {
                let members: Vec<&FeatureVector> =
                    points.iter().zip(&labels).filter(|(_, l)| **l == g).map(|(p, _)| p).collect();
                if members.is_empty() {
                    continue;
                }
                let d = members[0].dim();
                let mean: Vec<f64> = (0..d)
                    .map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64)
                    .collect();
                cost += members.iter().map(|p| sq_dist(p.as_slice(), &mean)).sum::<f64>();
            }
            if cost < best.0 - 1e-12 {
                best = (cost, labels);
            }
        }
        best
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        a.len() == b.len()
            && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn single_point() {
        let p = pts(&[[5.0, 5.0]]);
        let r = kmeans(&p, 1, 0, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert_eq!(r.assignments, vec![0]);
        assert_eq!(r.centroids[0].as_slice(), &[5.0, 5.0]);
        assert!(r.converged);
    }

    #[test]
    fn two_separated_pairs_match_brute_force() {
        let p = pts(&[[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0]]);
        let (_, oracle) = brute_force_partition(&p, 2);
        for seed in 0..8 {
            let r = kmeans(&p, 2, seed, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
            assert!(same_partition(&r.assignments, &oracle));
            let mut cs: Vec<Vec<f64>> = r.centroids.iter().map(|c| c.as_slice().to_vec()).collect();
            cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
            assert!((cs[0][0] - 0.05).abs() < 1e-12 && cs[0][1].abs() < 1e-12);
            assert!((cs[1][0] - 10.05).abs() < 1e-12 && (cs[1][1] - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_points_two_clusters_are_singletons() {
        let p = pts(&[[0.0, 0.0], [1.0, 1.0]]);
        let r = kmeans(&p, 2, 3, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert_ne!(r.assignments[0], r.assignments[1]);
        assert_eq!(r.centroids[r.assignments[0]], p[0]);
        assert_eq!(r.centroids[r.assignments[1]], p[1]);
    }

    #[test]
    fn duplicate_points_drop_empty_clusters() {
        let p = pts(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]);
        let r = kmeans(&p, 3, 0, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert_eq!(r.k, 1);
        assert_eq!(r.assignments, vec![0, 0, 0]);
    }

    #[test]
    fn argument_errors() {
        let p = pts(&[[0.0, 0.0]]);
        assert!(kmeans(&p, 0, 0, 10, 1e-9).is_err());
        assert!(kmeans(&p, 2, 0, 10, 1e-9).is_err());
        assert!(kmeans(&[], 1, 0, 10, 1e-9).is_err());
        let mixed = vec![FeatureVector::new(vec![0.0]).unwrap(), FeatureVector::new(vec![0.0, 1.0]).unwrap()];
        assert!(matches!(kmeans(&mixed, 1, 0, 10, 1e-9), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn choose_k_examples() {
        assert_eq!(choose_k(1).unwrap(), 1);
        assert_eq!(choose_k(200).unwrap(), 10);
        assert_eq!(choose_k(3).unwrap(), 1);
        assert!(choose_k(0).is_err());
    }

    fn separated_instance() -> impl Strategy<Value = (Vec<FeatureVector>, usize)> {
        (1usize..=3, 0u64..1000).prop_flat_map(|(k, s)| {
            let n = (k..=12).prop_map(move |n| n);
            (Just(k), Just(s), n, prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 12))
        })
        .prop_map(|(k, s, n, jitter)| {
            // Cluster centers 100 apart, spread at most 1: gap > 10x spread.
            let mut out = Vec::with_capacity(n);
            for (i, &(dx, dy)) in jitter.iter().take(n).enumerate() {
                let g = if i < k { i } else { (i + s as usize) % k };
                out.push(FeatureVector::new(vec![100.0 * g as f64 + dx, dy]).unwrap());
            }
            (out, k)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn recovers_brute_force_optimum_when_separated((p, k) in separated_instance(), seed in any::<u64>()) {
            let r = kmeans(&p, k, seed, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
            let (_, oracle) = brute_force_partition(&p, k);
            prop_assert!(same_partition(&r.assignments, &oracle));
        }
    }

    proptest! {

        #[test]
        fn deterministic_and_means_consistent(
            raw in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40),
            seed in any::<u64>(),
            k in 1usize..6,
        ) {
            let p: Vec<FeatureVector> = raw.iter().map(|(x, y)| FeatureVector::new(vec![*x, *y]).unwrap()).collect();
            let k = k.min(p.len());
            let a = kmeans(&p, k, seed, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
            let b = kmeans(&p, k, seed, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.k <= k);
            prop_assert!(a.assignments.iter().all(|&i| i < a.k));
            for (c, members) in a.centroids.iter().zip(a.groups(&p)) {
                prop_assert!(!members.is_empty());
                for j in 0..2 {
                    let mean = members.iter().map(|m| m[j]).sum::<f64>() / members.len() as f64;
                    prop_assert!((mean - c[j]).abs() <= 1e-12 * (1.0 + mean.abs()));
                }
            }
        }
    }
}
