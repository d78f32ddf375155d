use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense embedding. Entries are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("embedding must have dim >= 1".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite embedding entry at {i}")));
        }
        Ok(EmbeddingVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        EmbeddingVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    /// Unit-length copy. Fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Ok(EmbeddingVector(self.0.iter().map(|v| v / n).collect()))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        EmbeddingVector(self.0.iter().map(|v| v * alpha).collect())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Precondition(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("cosine similarity of a zero vector".into()));
    }
    Ok((dot(a.as_slice(), b.as_slice()) / (na * nb)).clamp(-1.0, 1.0))
}

/// `1 - cosine_similarity`; in `[0, 2]`.
pub fn cosine_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    cosine_similarity(a, b).map(|s| 1.0 - s)
}

/// Componentwise arithmetic mean.
pub fn mean_pool<'a, I>(vs: I) -> Result<EmbeddingVector>
where
    I: IntoIterator<Item = &'a EmbeddingVector>,
{
    let mut iter = vs.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Precondition("mean_pool of an empty list".into()))?;
    let mut acc = first.0.clone();
    let mut n = 1usize;
    for v in iter {
        if v.dim() != acc.len() {
            return Err(Error::Precondition(format!(
                "dimension mismatch in mean_pool: {} vs {}",
                acc.len(),
                v.dim()
            )));
        }
        for (a, x) in acc.iter_mut().zip(&v.0) {
            *a += x;
        }
        n += 1;
    }
    let n = n as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(EmbeddingVector(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn cosine_examples() {
        let a = v(&[0.3, -1.2, 2.0]);
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        let s = cosine_similarity(&v(&[1.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        assert!((s - 0.7071).abs() < 1e-4);
        assert!(matches!(
            cosine_similarity(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn mean_pool_examples() {
        let a = v(&[1.0, -2.0]);
        assert_eq!(mean_pool([&a]).unwrap(), a);
        let neg = a.scaled(-1.0);
        assert_eq!(mean_pool([&a, &neg]).unwrap(), EmbeddingVector::zeros(2));
        assert_eq!(mean_pool([&v(&[1.0, 0.0]), &v(&[0.0, 1.0])]).unwrap(), v(&[0.5, 0.5]));
        assert!(mean_pool(std::iter::empty()).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(EmbeddingVector::new(vec![1.0, f64::NAN]).is_err());
    }

    fn nonzero_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, dim).prop_filter("nonzero", |xs| xs.iter().any(|x| x.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric_and_scale_invariant(a in nonzero_vec(6), b in nonzero_vec(6), alpha in 0.01f64..100.0) {
            let (a, b) = (v(&a), v(&b));
            let ab = cosine_similarity(&a, &b).unwrap();
            prop_assert!((ab - cosine_similarity(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((ab - cosine_similarity(&a.scaled(alpha), &b).unwrap()).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }

        #[test]
        fn mean_pool_of_copies_is_identity(a in nonzero_vec(5), k in 1usize..8) {
            let a = v(&a);
            let copies = vec![a.clone(); k];
            let pooled = mean_pool(&copies).unwrap();
            for (p, x) in pooled.as_slice().iter().zip(a.as_slice()) {
                prop_assert!((p - x).abs() < 1e-12);
            }
        }

        #[test]
        fn normalized_has_unit_norm(a in nonzero_vec(9)) {
            prop_assert!((v(&a).normalized().unwrap().norm() - 1.0).abs() < 1e-6);
        }
    }
}
