//! Lloyd's k-means with seeded initialisation.
//!
//! The objective is `J = Σ_i Σ_{x ∈ S_i} ‖x − μ_i‖²`; each iteration assigns
//! every point to its nearest centroid and moves centroids to member means.

use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use super::MaterialError;

pub const DEFAULT_K: usize = 64;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;

/// k-means centroids (visual words).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Point → cluster labels plus the objective for those labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub objective: f64,
}

impl ClusterAssignment {
    /// Member index sets `S_1..S_k`.
    pub fn clusters(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub codebook: Codebook,
    pub assignment: ClusterAssignment,
    /// Indices of the vectors used as initial centroids.
    pub initial_indices: Vec<usize>,
    /// Objective after each completed iteration (assignment, reseeding and
    /// mean update).
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            seed: 42,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid by squared distance; the lowest index wins ties.
fn nearest(v: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(v, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Visual word for `v`.
pub fn assign_word(v: &[f64], codebook: &Codebook) -> Result<usize, MaterialError> {
    if codebook.centroids.is_empty() {
        return Err(MaterialError::UntrainedModel);
    }
    let dim = codebook.centroids[0].len();
    if v.len() != dim {
        return Err(MaterialError::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    Ok(nearest(v, &codebook.centroids))
}

pub fn objective(vectors: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    vectors
        .iter()
        .zip(labels)
        .map(|(v, &l)| squared_distance(v, &centroids[l]))
        .sum()
}

fn check_input(vectors: &[Vec<f64>], k: usize) -> Result<usize, MaterialError> {
    if k == 0 {
        return Err(MaterialError::InvalidK(k));
    }
    if vectors.len() < k {
        return Err(MaterialError::TooFewVectors {
            needed: k,
            got: vectors.len(),
        });
    }
    let dim = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(MaterialError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    Ok(dim)
}

/// Picks `k` vectors with pairwise different values, visiting indices in
/// the seeded Fisher–Yates order.
pub fn initial_indices(
    vectors: &[Vec<f64>],
    k: usize,
    seed: u64,
) -> Result<Vec<usize>, MaterialError> {
    check_input(vectors, k)?;
    let mut rng = SplitMix64::new(seed);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for idx in rng.shuffled_indices(vectors.len()) {
        if chosen.iter().all(|&c| vectors[c] != vectors[idx]) {
            chosen.push(idx);
            if chosen.len() == k {
                return Ok(chosen);
            }
        }
    }
    Err(MaterialError::TooFewVectors {
        needed: k,
        got: chosen.len(),
    })
}

/// Fits `k` centroids, seeding from `initial_indices(vectors, k, seed)`.
pub fn kmeans_fit(vectors: &[Vec<f64>], params: KMeansParams) -> Result<KMeansFit, MaterialError> {
    let init = initial_indices(vectors, params.k, params.seed)?;
    let centroids = init.iter().map(|&i| vectors[i].clone()).collect();
    let mut fit = lloyd(vectors, centroids, params.max_iter, params.tol)?;
    fit.codebook.seed = params.seed;
    fit.initial_indices = init;
    Ok(fit)
}

/// Lloyd iterations from explicit starting centroids.
///
/// Stops when labels stop changing, when `J` drops by less than `tol`, or
/// after `max_iter` iterations. A cluster left empty is re-seeded with the
/// point farthest from its own centroid (taken from a cluster with at least
/// two members). The returned labels are always the nearest-centroid
/// labels for the returned centroids.
pub fn lloyd(
    vectors: &[Vec<f64>],
    mut centroids: Vec<Vec<f64>>,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansFit, MaterialError> {
    let k = centroids.len();
    let dim = check_input(vectors, k)?;
    if let Some(bad) = centroids.iter().find(|c| c.len() != dim) {
        return Err(MaterialError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }

    let n = vectors.len();
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut previous = f64::INFINITY;

    for _ in 0..max_iter {
        let next: Vec<usize> = vectors.iter().map(|v| nearest(v, &centroids)).collect();
        if next == labels {
            break;
        }
        labels = next;

        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        for empty in 0..k {
            if sizes[empty] > 0 {
                continue;
            }
            let mut far = None;
            let mut far_d = -1.0;
            for (i, v) in vectors.iter().enumerate() {
                if sizes[labels[i]] < 2 {
                    continue;
                }
                let d = squared_distance(v, &centroids[labels[i]]);
                if d > far_d {
                    far = Some(i);
                    far_d = d;
                }
            }
            if let Some(i) = far {
                sizes[labels[i]] -= 1;
                sizes[empty] = 1;
                labels[i] = empty;
                centroids[empty] = vectors[i].clone();
            }
        }

        let mut sums = vec![vec![0.0; dim]; k];
        for (v, &l) in vectors.iter().zip(&labels) {
            for (s, x) in sums[l].iter_mut().zip(v) {
                *s += x;
            }
        }
        for (c, (sum, &size)) in centroids.iter_mut().zip(sums.into_iter().zip(&sizes)) {
            if size > 0 {
                *c = sum.into_iter().map(|s| s / size as f64).collect();
            }
        }

        let j = objective(vectors, &labels, &centroids);
        trace.push(j);
        if previous - j < tol {
            break;
        }
        previous = j;
    }

    let labels: Vec<usize> = vectors.iter().map(|v| nearest(v, &centroids)).collect();
    let objective = objective(vectors, &labels, &centroids);
    Ok(KMeansFit {
        codebook: Codebook {
            k,
            centroids,
            seed: 0,
        },
        assignment: ClusterAssignment { labels, objective },
        initial_indices: Vec::new(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| vec![*x]).collect()
    }

    fn params(k: usize, seed: u64) -> KMeansParams {
        KMeansParams {
            k,
            seed,
            max_iter: 100,
            tol: 1e-12,
        }
    }

    #[test]
    fn two_groups_on_a_line() {
        // Exhaustive check of all 2-partitions of {0, 0.1, 10, 10.1}: the
        // best split is {0, 0.1} | {10, 10.1} with J = 4 · 0.05² = 0.01.
        let v = pts(&[0.0, 0.1, 10.0, 10.1]);
        let mut best = f64::INFINITY;
        for mask in 1u32..15 {
            let mut j = 0.0;
            for side in [true, false] {
                let members: Vec<f64> = (0..4)
                    .filter(|i| ((mask >> i) & 1 == 1) == side)
                    .map(|i| v[i][0])
                    .collect();
                let mean = members.iter().sum::<f64>() / members.len() as f64;
                j += members.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
            }
            best = best.min(j);
        }
        assert!((best - 0.01).abs() < 1e-12);

        for seed in 0..20 {
            let fit = kmeans_fit(&v, params(2, seed)).unwrap();
            assert!(
                (fit.assignment.objective - 0.01).abs() < 1e-12,
                "seed {seed}"
            );
            let mut c: Vec<f64> = fit.codebook.centroids.iter().map(|c| c[0]).collect();
            c.sort_by(f64::total_cmp);
            assert!((c[0] - 0.05).abs() < 1e-12 && (c[1] - 10.05).abs() < 1e-12);
        }
    }

    #[test]
    fn singletons_have_zero_objective() {
        let v = pts(&[3.0, 1.0, 4.0, 1.5, 9.0]);
        let fit = kmeans_fit(&v, params(5, 1)).unwrap();
        assert_eq!(fit.assignment.objective, 0.0);
    }

    #[test]
    fn one_cluster_is_the_mean() {
        let v = vec![
            vec![1.0, 2.0],
            vec![3.0, 6.0],
            vec![5.0, 1.0],
            vec![7.0, 3.0],
        ];
        let fit = kmeans_fit(&v, params(1, 9)).unwrap();
        let mean = [4.0, 3.0];
        assert_eq!(fit.codebook.centroids[0], mean.to_vec());
        let total: f64 = v.iter().map(|p| squared_distance(p, &mean)).sum();
        assert!((fit.assignment.objective - total).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let v = pts(&[1.0, 2.0]);
        assert!(matches!(
            kmeans_fit(&v, params(0, 1)),
            Err(MaterialError::InvalidK(0))
        ));
        assert!(matches!(
            kmeans_fit(&v, params(3, 1)),
            Err(MaterialError::TooFewVectors { needed: 3, got: 2 })
        ));
        // Only two distinct values among three points.
        assert!(matches!(
            kmeans_fit(&pts(&[1.0, 1.0, 2.0]), params(3, 1)),
            Err(MaterialError::TooFewVectors { needed: 3, got: 2 })
        ));
        assert!(matches!(
            kmeans_fit(&[vec![1.0], vec![1.0, 2.0]], params(1, 1)),
            Err(MaterialError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        // Both starting centroids far right: centroid 1 gets no members on
        // the first assignment and must be re-seeded.
        let v = pts(&[0.0, 1.0, 2.0, 10.0, 11.0]);
        let fit = lloyd(&v, vec![vec![100.0], vec![200.0]], 100, 0.0).unwrap();
        let sizes = fit
            .assignment
            .clusters(2)
            .iter()
            .map(Vec::len)
            .collect::<Vec<_>>();
        assert!(sizes.iter().all(|&s| s > 0), "{sizes:?}");
        assert!((fit.assignment.objective - 2.5).abs() < 1e-12);
    }

    #[test]
    fn assign_word_rules() {
        let cb = Codebook {
            k: 4,
            centroids: vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![3.0, 0.0],
                vec![5.0, 5.0],
            ],
            seed: 0,
        };
        assert_eq!(assign_word(&[5.0, 5.0], &cb).unwrap(), 3);
        assert_eq!(assign_word(&[2.0, 0.0], &cb).unwrap(), 1);
        assert!(matches!(
            assign_word(&[1.0], &cb),
            Err(MaterialError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        let empty = Codebook {
            k: 0,
            centroids: vec![],
            seed: 0,
        };
        assert!(matches!(
            assign_word(&[1.0], &empty),
            Err(MaterialError::UntrainedModel)
        ));
    }

    #[test]
    fn same_seed_same_fit() {
        let v: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i * 37 % 11) as f64, (i * 13 % 7) as f64])
            .collect();
        let a = kmeans_fit(&v, params(5, 77)).unwrap();
        let b = kmeans_fit(&v, params(5, 77)).unwrap();
        assert_eq!(a, b);
    }
}
