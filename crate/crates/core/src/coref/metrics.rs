//! Pair-counting clustering metrics.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringMetrics {
    pub ari: f64,
    pub pairwise_precision: f64,
    pub pairwise_recall: f64,
    pub pairwise_f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

struct PairCounts {
    /// same cluster in both labelings
    both: u64,
    pred: u64,
    gold: u64,
    total: u64,
}

fn pair_counts<P: Hash + Eq, G: Hash + Eq>(pred: &[P], gold: &[G]) -> PairCounts {
    let mut cells: HashMap<(&P, &G), u64> = HashMap::new();
    let mut pred_sizes: HashMap<&P, u64> = HashMap::new();
    let mut gold_sizes: HashMap<&G, u64> = HashMap::new();
    for (p, g) in pred.iter().zip(gold) {
        *cells.entry((p, g)).or_default() += 1;
        *pred_sizes.entry(p).or_default() += 1;
        *gold_sizes.entry(g).or_default() += 1;
    }
    PairCounts {
        both: cells.values().map(|&c| choose2(c)).sum(),
        pred: pred_sizes.values().map(|&c| choose2(c)).sum(),
        gold: gold_sizes.values().map(|&c| choose2(c)).sum(),
        total: choose2(pred.len() as u64),
    }
}

/// Adjusted Rand index under the permutation model.
pub fn adjusted_rand_index<P: Hash + Eq, G: Hash + Eq>(pred: &[P], gold: &[G]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::Precondition(format!(
            "label lengths differ: {} vs {}",
            pred.len(),
            gold.len()
        )));
    }
    if pred.len() < 2 {
        return Err(Error::Precondition("ARI needs at least two items".into()));
    }
    let c = pair_counts(pred, gold);
    let index = c.both as f64;
    let expected = c.pred as f64 * c.gold as f64 / c.total as f64;
    let max_index = (c.pred as f64 + c.gold as f64) / 2.0;
    let denom = max_index - expected;
    if denom == 0.0 {
        // only reachable when both labelings are all-singletons or both one cluster
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Precision, recall and F1 over same-cluster item pairs. Precision is 0
/// when no pair is predicted; recall is 0 when the gold has no pairs.
pub fn pairwise_prf<P: Hash + Eq, G: Hash + Eq>(pred: &[P], gold: &[G]) -> Result<PairwiseScores> {
    if pred.len() != gold.len() {
        return Err(Error::Precondition(format!(
            "label lengths differ: {} vs {}",
            pred.len(),
            gold.len()
        )));
    }
    let c = pair_counts(pred, gold);
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(c.both, c.pred);
    let recall = ratio(c.both, c.gold);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(PairwiseScores { precision, recall, f1 })
}

pub fn clustering_metrics<P: Hash + Eq, G: Hash + Eq>(pred: &[P], gold: &[G]) -> Result<ClusteringMetrics> {
    let ari = adjusted_rand_index(pred, gold)?;
    let prf = pairwise_prf(pred, gold)?;
    Ok(ClusteringMetrics {
        ari,
        pairwise_precision: prf.precision,
        pairwise_recall: prf.recall,
        pairwise_f1: prf.f1,
    })
}
