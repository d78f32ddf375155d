//! Deterministic feature-hashing encoder used for tests and offline runs.

use crate::error::{Error, Result};
use crate::hashing::{fnv1a64, mix64};

use super::vector::EmbeddingVector;

/// Character n-gram order.
pub const NGRAM: usize = 3;
pub const MIN_DIM: usize = 8;

/// Bucket and sign for one n-gram.
pub fn ngram_slot(gram: &str, dim: usize) -> (usize, f64) {
    let h = mix64(fnv1a64(gram.as_bytes()));
    let bucket = (h % dim as u64) as usize;
    let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
    (bucket, sign)
}

/// Signed n-gram counts of `text` (padded with one space on each side),
/// hashed into `dim` buckets. Not normalized.
pub fn hash_features(text: &str, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    let padded: Vec<char> = std::iter::once(' ')
        .chain(text.chars())
        .chain(std::iter::once(' '))
        .collect();
    let mut gram = String::with_capacity(NGRAM * 4);
    for window in padded.windows(NGRAM) {
        gram.clear();
        gram.extend(window);
        let (bucket, sign) = ngram_slot(&gram, dim);
        out[bucket] += sign;
    }
    out
}

/// Unit-normalized [`hash_features`]. A text whose features cancel to zero
/// maps to the first basis vector so the output is always unit length.
pub fn hash_embed(text: &str, dim: usize) -> Result<EmbeddingVector> {
    if dim < MIN_DIM {
        return Err(Error::Precondition(format!("hash encoder dim must be >= {MIN_DIM}, got {dim}")));
    }
    let features = EmbeddingVector::new(hash_features(text, dim))?;
    match features.normalized() {
        Ok(v) => Ok(v),
        Err(_) => {
            let mut e0 = vec![0.0; dim];
            e0[0] = 1.0;
            EmbeddingVector::new(e0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::vector::cosine_similarity;
    use std::collections::HashMap;

    #[test]
    fn deterministic_and_unit_norm() {
        let a = hash_embed("President [M] Kennedy [\\M] spoke", 256).unwrap();
        let b = hash_embed("President [M] Kennedy [\\M] spoke", 256).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-6);
        assert_eq!(hash_embed("", 16).unwrap().norm(), 1.0);
        assert!(hash_embed("x", 4).is_err());
    }

    #[test]
    fn abc_vs_abd_matches_ngram_overlap() {
        // padded " abc " -> {" ab","abc","bc "}, " abd " -> {" ab","abd","bd "}
        let a = hash_embed("abc", 256).unwrap();
        let b = hash_embed("abd", 256).unwrap();
        let cos = cosine_similarity(&a, &b).unwrap();
        assert!(cos < 1.0);

        let grams = |t: &str| -> HashMap<(usize, i8), f64> {
            let mut m: HashMap<usize, f64> = HashMap::new();
            let chars: Vec<char> = format!(" {t} ").chars().collect();
            for w in chars.windows(3) {
                let g: String = w.iter().collect();
                let (b, s) = ngram_slot(&g, 256);
                *m.entry(b).or_default() += s;
            }
            m.into_iter().map(|(b, v)| ((b, 0), v)).collect()
        };
        let (ga, gb) = (grams("abc"), grams("abd"));
        let dot: f64 = ga.iter().map(|(k, v)| v * gb.get(k).copied().unwrap_or(0.0)).sum();
        let na: f64 = ga.values().map(|v| v * v).sum::<f64>().sqrt();
        let nb: f64 = gb.values().map(|v| v * v).sum::<f64>().sqrt();
        assert!((cos - dot / (na * nb)).abs() < 1e-12);
    }
}
