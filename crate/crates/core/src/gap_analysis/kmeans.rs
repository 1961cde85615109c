//! Lloyd's k-means with k-means++ seeding, plus cluster composition reports.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 3;
pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
    /// Inertia after each update step; non-increasing.
    pub history: Vec<f64>,
    pub converged: bool,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn nearest(x: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(x, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds(x: ArrayView2<f64>, k: usize, rng: &mut impl Rng) -> Array2<f64> {
    let n = x.nrows();
    let mut centroids = Array2::zeros((k, x.ncols()));
    centroids.row_mut(0).assign(&x.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = x.rows().into_iter().map(|r| sq_dist(r, centroids.row(0))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&x.row(pick));
        for (i, r) in x.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, centroids.row(c)));
        }
    }
    centroids
}

fn inertia_of(x: ArrayView2<f64>, assignments: &[usize], centroids: &Array2<f64>) -> f64 {
    x.rows()
        .into_iter()
        .zip(assignments)
        .map(|(r, &c)| sq_dist(r, centroids.row(c)))
        .sum()
}

/// Moves the farthest points of multi-member clusters into empty clusters,
/// then recomputes every centroid as its members' mean.
fn update_centroids(x: ArrayView2<f64>, assignments: &mut [usize], old: &Array2<f64>) -> Array2<f64> {
    let k = old.nrows();
    let mut sizes = vec![0usize; k];
    for &c in assignments.iter() {
        sizes[c] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let (far, _) = x
            .rows()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| sizes[assignments[*i]] > 1)
            .map(|(i, r)| (i, sq_dist(r, old.row(assignments[i]))))
            .fold((usize::MAX, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        sizes[assignments[far]] -= 1;
        assignments[far] = empty;
        sizes[empty] = 1;
    }
    let mut centroids = Array2::zeros(old.dim());
    for (r, &c) in x.rows().into_iter().zip(assignments.iter()) {
        let mut row = centroids.row_mut(c);
        row += &r;
    }
    for (mut row, &s) in centroids.rows_mut().into_iter().zip(&sizes) {
        row /= s as f64;
    }
    centroids
}

/// Clusters the rows of `x` into `k` groups; deterministic per seed.
pub fn kmeans(x: ArrayView2<f64>, k: usize, seed: u64) -> Result<KMeansResult> {
    let n = x.nrows();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds the number of points ({n})")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means input".into()));
    }
    let mut rng = crate::rng::seeded(seed, 0x3ea);
    let mut centroids = plus_plus_seeds(x, k, &mut rng);
    let mut assignments: Vec<usize> = x.rows().into_iter().map(|r| nearest(r, &centroids).0).collect();
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        centroids = update_centroids(x, &mut assignments, &centroids);
        let inertia = inertia_of(x, &assignments, &centroids);
        debug_assert!(history.last().map_or(true, |&prev| inertia <= prev * (1.0 + 1e-12) + 1e-12));
        history.push(inertia);
        // ties keep the current cluster so duplicate points reach a fixpoint
        let next: Vec<usize> = x
            .rows()
            .into_iter()
            .zip(&assignments)
            .map(|(r, &cur)| {
                let (best, d) = nearest(r, &centroids);
                if sq_dist(r, centroids.row(cur)) <= d {
                    cur
                } else {
                    best
                }
            })
            .collect();
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
    }
    if !converged {
        centroids = update_centroids(x, &mut assignments, &centroids);
        history.push(inertia_of(x, &assignments, &centroids));
    }
    Ok(KMeansResult {
        inertia: *history.last().expect("at least one iteration"),
        assignments,
        centroids,
        history,
        converged,
    })
}

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewRecords { needed: 2, got: n });
    }
    let pairs = |c: usize| (c * c.saturating_sub(1)) as f64 / 2.0;
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let expected = sum_a * sum_b / pairs(n);
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        // both labelings trivial (all one cluster or all singletons)
        return Ok(if index == expected { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Membership counts of one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterComposition {
    pub cluster: usize,
    pub size: usize,
    pub datasets: BTreeMap<String, usize>,
    pub genres: BTreeMap<String, usize>,
}

impl ClusterComposition {
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Counts divided by the cluster size; empty for an empty cluster.
    pub fn proportions(counts: &BTreeMap<String, usize>) -> BTreeMap<String, f64> {
        let total: usize = counts.values().sum();
        counts
            .iter()
            .filter(|_| total > 0)
            .map(|(k, &v)| (k.clone(), v as f64 / total as f64))
            .collect()
    }
}

/// Genre name used for clips without a genre label.
pub const UNKNOWN_GENRE: &str = "unknown";

/// Dataset and genre histograms for each of `k` clusters. Empty clusters are
/// kept with zero counts.
pub fn cluster_composition(
    assignments: &[usize],
    k: usize,
    dataset_labels: &[String],
    genre_labels: &[Option<String>],
) -> Result<Vec<ClusterComposition>> {
    for len in [dataset_labels.len(), genre_labels.len()] {
        if len != assignments.len() {
            return Err(Error::LengthMismatch {
                left: assignments.len(),
                right: len,
            });
        }
    }
    let mut out: Vec<ClusterComposition> = (0..k)
        .map(|cluster| ClusterComposition {
            cluster,
            size: 0,
            datasets: BTreeMap::new(),
            genres: BTreeMap::new(),
        })
        .collect();
    for ((&c, ds), genre) in assignments.iter().zip(dataset_labels).zip(genre_labels) {
        let entry = out
            .get_mut(c)
            .ok_or_else(|| Error::InvalidParameter(format!("cluster index {c} out of range for k = {k}")))?;
        entry.size += 1;
        *entry.datasets.entry(ds.clone()).or_default() += 1;
        *entry
            .genres
            .entry(genre.clone().unwrap_or_else(|| UNKNOWN_GENRE.to_owned()))
            .or_default() += 1;
    }
    Ok(out)
}

/// Full clustering output for a labeled collection of clips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k: usize,
    pub seed: u64,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    pub assignments: BTreeMap<String, usize>,
    pub centroids: Vec<Vec<f64>>,
    pub clusters: Vec<ClusterComposition>,
}

/// Runs [`kmeans`] and [`cluster_composition`] over row-aligned metadata.
pub fn cluster_report(
    x: ArrayView2<f64>,
    clip_ids: &[String],
    dataset_labels: &[String],
    genre_labels: &[Option<String>],
    k: usize,
    seed: u64,
) -> Result<ClusterReport> {
    if clip_ids.len() != x.nrows() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: clip_ids.len(),
        });
    }
    let km = kmeans(x, k, seed)?;
    let clusters = cluster_composition(&km.assignments, k, dataset_labels, genre_labels)?;
    Ok(ClusterReport {
        k,
        seed,
        inertia: km.inertia,
        iterations: km.history.len(),
        converged: km.converged,
        assignments: clip_ids.iter().cloned().zip(km.assignments.iter().copied()).collect(),
        centroids: km.centroids.rows().into_iter().map(|r| r.to_vec()).collect(),
        clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    pub(crate) fn blobs(per: usize, sigma: f64, seed: u64) -> (Array2<f64>, Vec<usize>) {
        let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        let mut rng = crate::rng::seeded(seed, 1);
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut x = Array2::zeros((3 * per, 2));
        let mut labels = Vec::new();
        for (b, c) in centers.iter().enumerate() {
            for i in 0..per {
                x[[b * per + i, 0]] = c[0] + noise.sample(&mut rng);
                x[[b * per + i, 1]] = c[1] + noise.sample(&mut rng);
                labels.push(b);
            }
        }
        (x, labels)
    }

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn recovers_blobs() {
        let (x, truth) = blobs(50, 0.1, 3);
        let km = kmeans(x.view(), 3, 0).unwrap();
        assert!(adjusted_rand_index(&km.assignments, &truth).unwrap() > 0.99);
        // some relabeling of the clusters matches the truth exactly
        let exact = permutations(3)
            .iter()
            .any(|p| km.assignments.iter().zip(&truth).all(|(&a, &t)| p[a] == t));
        assert!(exact);
        assert!(km.converged);
    }

    #[test]
    fn trivial_k() {
        let x = array![[0.0, 1.0], [2.0, 3.0], [4.0, 8.0]];
        let one = kmeans(x.view(), 1, 0).unwrap();
        assert_eq!(one.centroids.row(0).to_vec(), vec![2.0, 4.0]);
        let all = kmeans(x.view(), 3, 0).unwrap();
        assert_eq!(all.inertia, 0.0);
        let mut seen = all.assignments.clone();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2]);
        assert!(matches!(kmeans(x.view(), 4, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn duplicate_points_fill_every_cluster() {
        let x = array![[1.0], [1.0], [1.0], [5.0]];
        let km = kmeans(x.view(), 3, 7).unwrap();
        let mut used = km.assignments.clone();
        used.sort();
        used.dedup();
        assert_eq!(used.len(), 3);
        assert_eq!(km.inertia, 0.0);
    }

    #[test]
    fn ari_cases() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        // classic example: ARI of [0,0,1,1] vs [0,0,1,2] = 0.5714...
        assert!((adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 2]).unwrap() - 4.0 / 7.0).abs() < 1e-12);
        assert!(adjusted_rand_index(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn composition_cases() {
        let comp = cluster_composition(
            &[0, 0, 0],
            2,
            &["E".into(), "E".into(), "P".into()],
            &[Some("rock".into()), None, Some("rock".into())],
        )
        .unwrap();
        let props = ClusterComposition::proportions(&comp[0].datasets);
        assert!((props["E"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((props["P"] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(comp[0].genres[UNKNOWN_GENRE], 1);
        assert!(comp[1].is_empty());
        assert!(ClusterComposition::proportions(&comp[1].datasets).is_empty());
        assert!(cluster_composition(&[0], 1, &[], &[None]).is_err());
        assert!(cluster_composition(&[2], 1, &["E".into()], &[None]).is_err());
    }

    #[test]
    fn uniform_labels() {
        let ds: Vec<String> = ["E", "D", "P"].iter().cycle().take(9).map(|s| s.to_string()).collect();
        let comp = cluster_composition(&[0; 9], 1, &ds, &vec![None; 9]).unwrap();
        assert!(ClusterComposition::proportions(&comp[0].datasets).values().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
    }

    proptest! {
        #[test]
        fn inertia_non_increasing(n in 3usize..60, k in 1usize..6, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let mut rng = crate::rng::seeded(seed, 2);
            let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-1.0..1.0));
            let km = kmeans(x.view(), k, seed).unwrap();
            for w in km.history.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{:?}", km.history);
            }
            prop_assert!(km.assignments.iter().all(|&c| c < k));
        }

        #[test]
        fn histograms_sum_to_sizes(assign in proptest::collection::vec(0usize..4, 1..50)) {
            let ds: Vec<String> = assign.iter().map(|a| format!("d{}", a % 3)).collect();
            let genres: Vec<Option<String>> = assign.iter().enumerate().map(|(i, _)| (i % 2 == 0).then(|| "pop".to_string())).collect();
            let comp = cluster_composition(&assign, 4, &ds, &genres).unwrap();
            prop_assert_eq!(comp.iter().map(|c| c.size).sum::<usize>(), assign.len());
            for c in &comp {
                prop_assert_eq!(c.datasets.values().sum::<usize>(), c.size);
                prop_assert_eq!(c.genres.values().sum::<usize>(), c.size);
            }
        }
    }
}
