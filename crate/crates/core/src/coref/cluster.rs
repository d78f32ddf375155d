//! Average-linkage (UPGMA) agglomerative clustering over cosine distance.

use crate::encode::{dot, EmbeddingVector};
use crate::error::{Error, Result};

/// Linkage values closer than this are treated as tied.
pub const TIE_EPS: f64 = 1e-12;

/// Clusters unit-normalizable vectors bottom-up, merging while the smallest
/// average cross-cluster cosine distance is `<= threshold`.
///
/// Labels are dense and numbered by first appearance. Ties between candidate
/// merges go to the pair whose smallest member indices are lexicographically
/// smallest.
pub fn agglomerative_cluster(vectors: &[EmbeddingVector], threshold: f64) -> Result<Vec<usize>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Precondition("cannot cluster an empty vector list".into()))?;
    let dim = first.dim();
    let mut unit = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::Precondition(format!("dimension mismatch: {} vs {dim}", v.dim())));
        }
        unit.push(v.normalized()?);
    }
    let n = unit.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = 1.0 - dot(unit[i].as_slice(), unit[j].as_slice()).clamp(-1.0, 1.0);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    cluster_distance_matrix(n, dist, threshold)
}

/// Same as [`agglomerative_cluster`] over a full symmetric `n x n` distance matrix.
pub fn cluster_distance_matrix(n: usize, dist: Vec<f64>, threshold: f64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Precondition("cannot cluster zero items".into()));
    }
    if dist.len() != n * n {
        return Err(Error::Precondition(format!("distance matrix has {} entries, want {}", dist.len(), n * n)));
    }
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::Precondition(format!("clustering threshold {threshold} must be finite and >= 0")));
    }

    // Cluster slot = smallest member index; `sums` holds cross-cluster distance sums.
    let mut sums = dist;
    let mut sizes = vec![1usize; n];
    let mut owner: Vec<usize> = (0..n).collect();
    let mut active: Vec<usize> = (0..n).collect();

    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (ai, &a) in active.iter().enumerate() {
            let row = &sums[a * n..(a + 1) * n];
            for &b in &active[ai + 1..] {
                let avg = row[b] / (sizes[a] * sizes[b]) as f64;
                match best {
                    Some((d, _, _)) if avg >= d - TIE_EPS => {}
                    _ => best = Some((avg, a, b)),
                }
            }
        }
        let (d, a, b) = best.expect("at least two active clusters");
        if d > threshold {
            break;
        }
        for &c in &active {
            if c != a && c != b {
                let merged = sums[a * n + c] + sums[b * n + c];
                sums[a * n + c] = merged;
                sums[c * n + a] = merged;
            }
        }
        sizes[a] += sizes[b];
        active.retain(|&c| c != b);
        for o in owner.iter_mut() {
            if *o == b {
                *o = a;
            }
        }
    }

    Ok(dense_labels(&owner))
}

/// Renumbers arbitrary labels densely in order of first appearance.
pub fn dense_labels<T: PartialEq + Copy>(raw: &[T]) -> Vec<usize> {
    let mut seen: Vec<T> = Vec::new();
    raw.iter()
        .map(|r| match seen.iter().position(|s| s == r) {
            Some(i) => i,
            None => {
                seen.push(*r);
                seen.len() - 1
            }
        })
        .collect()
}
