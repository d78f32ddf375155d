//! Encoder seam and the vector math shared by the rest of the pipeline.

pub mod bridge;
pub mod hash;
pub mod vector;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bridge::BridgeClient;
pub use hash::{hash_embed, hash_features};
pub use vector::{cosine_distance, cosine_similarity, dot, mean_pool, EmbeddingVector};

pub const DEFAULT_HASH_DIM: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    Hash,
    Bridge,
}

/// A live encoder. Texts go in, unit-length vectors of a fixed dimension come out.
#[derive(Debug)]
pub enum EncoderHandle {
    HashStub { dim: usize },
    Bridge(BridgeClient),
}

impl EncoderHandle {
    pub fn hash(dim: usize) -> Result<Self> {
        if dim < hash::MIN_DIM {
            return Err(Error::Config(format!("hash encoder dim must be >= {}, got {dim}", hash::MIN_DIM)));
        }
        Ok(EncoderHandle::HashStub { dim })
    }

    pub fn bridge(endpoint: &str, retries: u32) -> Result<Self> {
        BridgeClient::connect(endpoint, retries).map(EncoderHandle::Bridge)
    }

    pub fn kind(&self) -> EncoderKind {
        match self {
            EncoderHandle::HashStub { .. } => EncoderKind::Hash,
            EncoderHandle::Bridge(_) => EncoderKind::Bridge,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            EncoderHandle::HashStub { dim } => *dim,
            EncoderHandle::Bridge(b) => b.dim(),
        }
    }

    pub fn model_name(&self) -> String {
        match self {
            EncoderHandle::HashStub { dim } => format!("hash-stub-{dim}"),
            EncoderHandle::Bridge(b) => b.model_name().to_string(),
        }
    }

    /// One normalized vector per input text, in input order.
    pub fn embed_batch<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<EmbeddingVector>> {
        if texts.is_empty() {
            return Err(Error::Precondition("embed_batch called with no texts".into()));
        }
        let raw = match self {
            EncoderHandle::HashStub { dim } => texts.iter().map(|t| hash_embed(t.as_ref(), *dim)).collect(),
            EncoderHandle::Bridge(b) => b.embed_batch(texts),
        }?;
        // bridge vectors are nominally unit length; renormalize so inner product = cosine
        raw.into_iter()
            .map(|v| match self {
                EncoderHandle::HashStub { .. } => Ok(v),
                EncoderHandle::Bridge(_) => v.normalized().map_err(|e| Error::Protocol(e.to_string())),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_handle_maps_hash_embed() {
        let h = EncoderHandle::hash(64).unwrap();
        let texts = ["one [M] A [\\M]", "two [M] B [\\M]", "one [M] A [\\M]"];
        let vs = h.embed_batch(&texts).unwrap();
        assert_eq!(vs.len(), 3);
        assert_eq!(vs[0], vs[2]);
        for (t, v) in texts.iter().zip(&vs) {
            assert_eq!(v, &hash_embed(t, 64).unwrap());
            assert_eq!(v.dim(), 64);
        }
    }

    #[test]
    fn texts_differing_inside_markers_differ() {
        let h = EncoderHandle::hash(256).unwrap();
        let vs = h.embed_batch(&["He met [M] John [\\M] today.", "He met [M] Joan [\\M] today."]).unwrap();
        assert_ne!(vs[0], vs[1]);
        // direct feature computation: the only differing trigrams are around the name
        let fa = hash_features("He met [M] John [\\M] today.", 256);
        let fb = hash_features("He met [M] Joan [\\M] today.", 256);
        assert_ne!(fa, fb);
    }

    #[test]
    fn empty_batch_is_precondition_error() {
        let h = EncoderHandle::hash(16).unwrap();
        assert!(matches!(h.embed_batch::<&str>(&[]), Err(Error::Precondition(_))));
    }
}
