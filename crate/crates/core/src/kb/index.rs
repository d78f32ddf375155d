//! Exact flat inner-product index over unit vectors.
//!
//! On disk:
//!
//! ```text
//! offset 0   magic   b"HLKBIDX\0"
//!        8   version u32 LE (= 1)
//!       12   dim     u32 LE
//!       16   count   u64 LE
//!       24   vectors count * dim f64 LE, row-major
//!       ..   qids    count * (u32 LE byte length, UTF-8 bytes)
//! ```
//!
//! The vector block starts 8-byte aligned so it can be mapped in place.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tracing::info;

use crate::encode::{dot, EmbeddingVector, EncoderHandle};
use crate::error::{Error, Result};
use crate::io::write_atomic;

use super::template::EntityTemplate;

pub const INDEX_MAGIC: &[u8; 8] = b"HLKBIDX\0";
pub const INDEX_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct KbIndex {
    dim: usize,
    qids: Vec<String>,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub qid: String,
    /// Insertion position in the index.
    pub position: usize,
    pub similarity: f64,
}

#[derive(PartialEq)]
struct Candidate {
    similarity: f64,
    position: usize,
}

impl Eq for Candidate {}

// "Greater" means worse, so a max-heap keeps the current worst on top.
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .similarity
            .total_cmp(&self.similarity)
            .then(self.position.cmp(&other.position))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KbIndex {
    /// Builds an index from (qid, vector) pairs; vectors are normalized on insert.
    pub fn from_vectors(entries: Vec<(String, EmbeddingVector)>) -> Result<Self> {
        let dim = entries
            .first()
            .map(|(_, v)| v.dim())
            .ok_or_else(|| Error::Precondition("cannot build an empty index".into()))?;
        let mut seen = HashSet::with_capacity(entries.len());
        let mut qids = Vec::with_capacity(entries.len());
        let mut data = Vec::with_capacity(entries.len() * dim);
        for (qid, v) in entries {
            if v.dim() != dim {
                return Err(Error::Validation(format!("{qid}: vector dim {} but index dim {dim}", v.dim())));
            }
            if !seen.insert(qid.clone()) {
                return Err(Error::Validation(format!("duplicate qid {qid} in index")));
            }
            let unit = v.normalized().map_err(|e| Error::Validation(format!("{qid}: {e}")))?;
            data.extend_from_slice(unit.as_slice());
            qids.push(qid);
        }
        Ok(KbIndex { dim, qids, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.qids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qids.is_empty()
    }

    pub fn qids(&self) -> &[String] {
        &self.qids
    }

    pub fn vector(&self, position: usize) -> &[f64] {
        &self.data[position * self.dim..(position + 1) * self.dim]
    }

    /// Exact top-`k` by inner product, best first; equal similarities keep
    /// insertion order. `k` is clipped to the index size.
    pub fn knn_search(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<Neighbor>> {
        if query.dim() != self.dim {
            return Err(Error::Precondition(format!(
                "query dim {} but index dim {}",
                query.dim(),
                self.dim
            )));
        }
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        let k = k.min(self.len());
        let q = query.as_slice();
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        for (position, row) in self.data.chunks_exact(self.dim).enumerate() {
            let cand = Candidate {
                similarity: dot(q, row),
                position,
            };
            if heap.len() < k {
                heap.push(cand);
            } else if heap.peek().is_some_and(|worst| cand < *worst) {
                heap.pop();
                heap.push(cand);
            }
        }
        Ok(heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| Neighbor {
                qid: self.qids[c.position].clone(),
                position: c.position,
                similarity: c.similarity,
            })
            .collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| {
            w.write_all(INDEX_MAGIC)?;
            w.write_all(&INDEX_VERSION.to_le_bytes())?;
            w.write_all(&(self.dim as u32).to_le_bytes())?;
            w.write_all(&(self.len() as u64).to_le_bytes())?;
            for x in &self.data {
                w.write_all(&x.to_le_bytes())?;
            }
            for q in &self.qids {
                w.write_all(&(q.len() as u32).to_le_bytes())?;
                w.write_all(q.as_bytes())?;
            }
            Ok(())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let bad = |message: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: message.to_string(),
        };
        if bytes.len() < HEADER_LEN || &bytes[..8] != INDEX_MAGIC {
            return Err(bad("not a knowledgebase index (bad magic)"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let version = u32_at(8);
        if version != INDEX_VERSION {
            return Err(bad(&format!("unsupported index version {version}")));
        }
        let dim = u32_at(12) as usize;
        let count = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")) as usize;
        let vec_bytes = count
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| bad("index size overflow"))?;
        let vec_end = HEADER_LEN + vec_bytes;
        if bytes.len() < vec_end || dim == 0 {
            return Err(bad("truncated vector block"));
        }
        let data: Vec<f64> = bytes[HEADER_LEN..vec_end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let mut qids = Vec::with_capacity(count);
        let mut at = vec_end;
        for _ in 0..count {
            if bytes.len() < at + 4 {
                return Err(bad("truncated qid table"));
            }
            let n = u32_at(at) as usize;
            at += 4;
            let raw = bytes.get(at..at + n).ok_or_else(|| bad("truncated qid table"))?;
            qids.push(String::from_utf8(raw.to_vec()).map_err(|_| bad("qid is not UTF-8"))?);
            at += n;
        }
        if at != bytes.len() {
            return Err(bad("trailing bytes after qid table"));
        }
        info!(path = %path.display(), count, dim, "index loaded");
        Ok(KbIndex { dim, qids, data })
    }
}

/// Embeds each template's text and indexes it in input order.
pub fn build_index(templates: &[EntityTemplate], encoder: &EncoderHandle) -> Result<KbIndex> {
    if templates.is_empty() {
        return Err(Error::Precondition("no templates to index".into()));
    }
    let mut seen = HashSet::with_capacity(templates.len());
    if let Some(dup) = templates.iter().find(|t| !seen.insert(t.qid.as_str())) {
        return Err(Error::Validation(format!("duplicate qid {} in templates", dup.qid)));
    }
    let mut entries = Vec::with_capacity(templates.len());
    for chunk in templates.chunks(1024) {
        let texts: Vec<&str> = chunk.iter().map(|t| t.template_text.as_str()).collect();
        let vectors = encoder.embed_batch(&texts)?;
        entries.extend(chunk.iter().map(|t| t.qid.clone()).zip(vectors));
    }
    let idx = KbIndex::from_vectors(entries)?;
    info!(count = idx.len(), dim = idx.dim(), "index built");
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::template::EntityCandidate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn template(qid: &str, text: &str) -> EntityTemplate {
        let mut t = EntityTemplate::from_candidate(&EntityCandidate {
            qid: qid.into(),
            label: qid.into(),
            aliases: vec![],
            occupations: vec![],
            instance_type: "human".into(),
            birth_date: None,
            death_date: None,
            page_title: None,
            first_paragraph: text.into(),
        });
        t.template_text = text.into();
        t
    }

    fn random_index(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> KbIndex {
        let entries = (0..n)
            .map(|i| {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (format!("Q{i}"), EmbeddingVector::new(v).unwrap())
            })
            .collect();
        KbIndex::from_vectors(entries).unwrap()
    }

    #[test]
    fn self_query_returns_itself() {
        let enc = EncoderHandle::hash(64).unwrap();
        let idx = build_index(&[template("Q9696", "John F. Kennedy is of type human.")], &enc).unwrap();
        assert_eq!(idx.len(), 1);
        let q = enc.embed_batch(&["John F. Kennedy is of type human."]).unwrap().remove(0);
        let hits = idx.knn_search(&q, 1).unwrap();
        assert_eq!(hits[0].qid, "Q9696");
        assert!((hits[0].similarity - 1.0).abs() < 1e-6);
    }

    #[test]
    fn duplicate_qid_rejected() {
        let enc = EncoderHandle::hash(16).unwrap();
        let err = build_index(&[template("Q1", "a"), template("Q1", "b")], &enc).unwrap_err();
        assert!(err.to_string().contains("Q1"));
    }

    #[test]
    fn k_is_clipped_and_ties_keep_insertion_order() {
        let e = |x: f64, y: f64| EmbeddingVector::new(vec![x, y]).unwrap();
        let idx = KbIndex::from_vectors(vec![
            ("Q3".into(), e(0.0, 1.0)),
            ("Q1".into(), e(1.0, 0.0)),
            ("Q2".into(), e(2.0, 0.0)),
        ])
        .unwrap();
        let hits = idx.knn_search(&e(1.0, 0.0), 10).unwrap();
        let qids: Vec<&str> = hits.iter().map(|h| h.qid.as_str()).collect();
        assert_eq!(qids, ["Q1", "Q2", "Q3"]);
        assert!(idx.knn_search(&EmbeddingVector::new(vec![1.0; 3]).unwrap(), 1).is_err());
        assert!(idx.knn_search(&e(1.0, 0.0), 0).is_err());
    }

    #[test]
    fn matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let idx = random_index(&mut rng, 200, 32);
        let q = EmbeddingVector::new((0..32).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap()
            .normalized()
            .unwrap();
        let mut scan: Vec<(f64, usize)> = (0..idx.len()).map(|i| (dot(q.as_slice(), idx.vector(i)), i)).collect();
        scan.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let hits = idx.knn_search(&q, 10).unwrap();
        for (h, (s, i)) in hits.iter().zip(&scan[..10]) {
            assert_eq!(h.position, *i);
            assert_eq!(h.similarity, *s);
        }
        let sims: Vec<f64> = hits.iter().map(|h| h.similarity).collect();
        assert!(sims.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn save_load_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let idx = random_index(&mut rng, 17, 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kb.idx");
        idx.save(&path).unwrap();
        assert_eq!(KbIndex::load(&path).unwrap(), idx);
        let mut raw = std::fs::read(&path).unwrap();
        raw[0] = b'X';
        std::fs::write(&path, &raw).unwrap();
        assert!(KbIndex::load(&path).is_err());
    }
}
