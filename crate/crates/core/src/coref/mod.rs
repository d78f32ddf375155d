//! Cross-document coreference within date partitions.

pub mod cluster;
pub mod metrics;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::corpus::{mark_mention, partition_by_window, truncate_to_window, DateKey, Markers, MentionRecord};
use crate::encode::{mean_pool, EmbeddingVector, EncoderHandle};
use crate::error::{Error, Result};
use crate::io::{open_lines, write_atomic};

pub use cluster::agglomerative_cluster;
pub use metrics::{adjusted_rand_index, clustering_metrics, pairwise_prf, ClusteringMetrics, PairwiseScores};

pub const DEFAULT_CLUSTER_THRESHOLD: f64 = 0.15;
pub const DEFAULT_WINDOW_TOKENS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorefConfig {
    /// Maximum average-linkage cosine distance at which clusters still merge.
    pub threshold: f64,
    pub markers: Markers,
    pub window_tokens: usize,
    /// Rescale pooled prototypes to unit length before retrieval.
    pub renormalize_prototypes: bool,
}

impl Default for CorefConfig {
    fn default() -> Self {
        CorefConfig {
            threshold: DEFAULT_CLUSTER_THRESHOLD,
            markers: Markers::default(),
            window_tokens: DEFAULT_WINDOW_TOKENS,
            renormalize_prototypes: true,
        }
    }
}

/// Clusters of one date partition with their pooled prototypes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub date: DateKey,
    pub clusters: BTreeMap<String, Vec<String>>,
    pub prototypes: BTreeMap<String, EmbeddingVector>,
    pub threshold_used: f64,
}

impl ClusterAssignment {
    pub fn mention_count(&self) -> usize {
        self.clusters.values().map(Vec::len).sum()
    }

    /// Replaces every prototype with the pooled mean of `vectors` over the
    /// cluster's mentions. Used when disambiguation embeds mentions with a
    /// different encoder from the one that clustered them.
    pub fn repool(&mut self, vectors: &BTreeMap<String, EmbeddingVector>, renormalize: bool) -> Result<()> {
        for (cid, members) in &self.clusters {
            let vs = members
                .iter()
                .map(|m| {
                    vectors
                        .get(m)
                        .ok_or_else(|| Error::Validation(format!("no embedding for mention {m}")))
                })
                .collect::<Result<Vec<_>>>()?;
            self.prototypes.insert(cid.clone(), pool_prototype(vs, renormalize)?);
        }
        Ok(())
    }
}

pub fn cluster_id(date: DateKey, label: usize) -> String {
    format!("{date}:{label}")
}

fn pool_prototype<'a>(vs: impl IntoIterator<Item = &'a EmbeddingVector>, renormalize: bool) -> Result<EmbeddingVector> {
    let pooled = mean_pool(vs)?;
    if renormalize {
        // a cluster whose members cancel out keeps its zero prototype
        Ok(pooled.normalized().unwrap_or(pooled))
    } else {
        Ok(pooled)
    }
}

/// Marks, truncates and embeds mentions, in input order.
pub fn embed_mentions(ms: &[&MentionRecord], encoder: &EncoderHandle, cfg: &CorefConfig) -> Result<Vec<EmbeddingVector>> {
    if ms.is_empty() {
        return Ok(Vec::new());
    }
    let texts = ms
        .iter()
        .map(|m| {
            let marked = mark_mention(m, &cfg.markers)?;
            truncate_to_window(&marked, cfg.window_tokens, &cfg.markers).map(|t| t.text)
        })
        .collect::<Result<Vec<_>>>()?;
    encoder.embed_batch(&texts)
}

fn build_assignment(
    date: DateKey,
    part: &[&MentionRecord],
    vectors: &[EmbeddingVector],
    labels: &[usize],
    threshold: f64,
    renormalize: bool,
) -> Result<ClusterAssignment> {
    let mut grouped: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        grouped.entry(l).or_default().push(i);
    }
    let mut clusters = BTreeMap::new();
    let mut prototypes = BTreeMap::new();
    for (label, idxs) in grouped {
        let cid = cluster_id(date, label);
        prototypes.insert(cid.clone(), pool_prototype(idxs.iter().map(|&i| &vectors[i]), renormalize)?);
        clusters.insert(cid, idxs.iter().map(|&i| part[i].mention_id.clone()).collect());
    }
    Ok(ClusterAssignment {
        date,
        clusters,
        prototypes,
        threshold_used: threshold,
    })
}

/// Embeds and clusters one date partition.
pub fn coref_partition(
    date: DateKey,
    part: &[&MentionRecord],
    encoder: &EncoderHandle,
    cfg: &CorefConfig,
) -> Result<ClusterAssignment> {
    // wider windows key on the bucket start, so only datedness is checked here
    if let Some(m) = part.iter().find(|m| m.date.is_none() != (date == DateKey::Undated)) {
        return Err(Error::Precondition(format!("mention {} does not belong to partition {date}", m.mention_id)));
    }
    if part.is_empty() {
        return Ok(ClusterAssignment {
            date,
            clusters: BTreeMap::new(),
            prototypes: BTreeMap::new(),
            threshold_used: cfg.threshold,
        });
    }
    let vectors = embed_mentions(part, encoder, cfg)?;
    let labels = agglomerative_cluster(&vectors, cfg.threshold)?;
    build_assignment(date, part, &vectors, &labels, cfg.threshold, cfg.renormalize_prototypes)
}

/// Every mention in its own cluster, prototype = its own embedding.
pub fn singleton_assignment(
    date: DateKey,
    part: &[&MentionRecord],
    vectors: &[EmbeddingVector],
    renormalize: bool,
) -> Result<ClusterAssignment> {
    let labels: Vec<usize> = (0..part.len()).collect();
    build_assignment(date, part, vectors, &labels, 0.0, renormalize)
}

/// Clusters every date partition (in parallel on the current rayon pool);
/// output is ordered by date key regardless of scheduling.
pub fn coref_corpus(
    ms: &[MentionRecord],
    encoder: &EncoderHandle,
    cfg: &CorefConfig,
    window_days: u32,
) -> Result<Vec<ClusterAssignment>> {
    let parts: Vec<(DateKey, Vec<&MentionRecord>)> = partition_by_window(ms, window_days).into_iter().collect();
    let out = parts
        .par_iter()
        .map(|(date, part)| coref_partition(*date, part, encoder, cfg))
        .collect::<Result<Vec<_>>>()?;
    info!(
        partitions = out.len(),
        mentions = ms.len(),
        clusters = out.iter().map(|a| a.clusters.len()).sum::<usize>(),
        "coreference done"
    );
    Ok(out)
}

/// One line of the cluster file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterRow {
    pub mention_id: String,
    pub date: DateKey,
    pub cluster_id: String,
}

pub const CLUSTER_HEADER: &str = "mention_id\tdate\tcluster_id";

pub fn write_clusters(path: &Path, assignments: &[ClusterAssignment]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{CLUSTER_HEADER}")?;
        for a in assignments {
            for (cid, members) in &a.clusters {
                for m in members {
                    writeln!(w, "{m}\t{}\t{cid}", a.date)?;
                }
            }
        }
        Ok(())
    })
}

pub fn write_prototypes(path: &Path, assignments: &[ClusterAssignment]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "cluster_id\tdim\tvalues")?;
        for a in assignments {
            for (cid, v) in &a.prototypes {
                let values: Vec<String> = v.as_slice().iter().map(|x| x.to_string()).collect();
                writeln!(w, "{cid}\t{}\t{}", v.dim(), values.join(" "))?;
            }
        }
        Ok(())
    })
}

pub fn read_clusters(path: &Path) -> Result<Vec<ClusterRow>> {
    let mut rows = Vec::new();
    for (line_no, line) in open_lines(path)? {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() || (line_no == 1 && line == CLUSTER_HEADER) {
            continue;
        }
        let bad = |message: String| Error::Parse { path: path.to_path_buf(), line: line_no, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let [mention_id, date, cluster_id] = fields[..] else {
            return Err(bad(format!("expected 3 tab-separated fields, got {}", fields.len())));
        };
        rows.push(ClusterRow {
            mention_id: mention_id.to_string(),
            date: date.parse().map_err(|e: Error| bad(e.to_string()))?,
            cluster_id: cluster_id.to_string(),
        });
    }
    Ok(rows)
}

pub fn read_prototypes(path: &Path) -> Result<BTreeMap<String, EmbeddingVector>> {
    let mut out = BTreeMap::new();
    for (line_no, line) in open_lines(path)? {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() || line_no == 1 && line.starts_with("cluster_id\t") {
            continue;
        }
        let bad = |message: String| Error::Parse { path: path.to_path_buf(), line: line_no, message };
        let mut fields = line.split('\t');
        let (Some(cid), Some(dim), Some(values)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(bad("expected cluster_id, dim, values".into()));
        };
        let dim: usize = dim.parse().map_err(|_| bad(format!("bad dim {dim:?}")))?;
        let values = values
            .split(' ')
            .map(|x| x.parse::<f64>().map_err(|_| bad(format!("bad value {x:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != dim {
            return Err(bad(format!("declared dim {dim} but {} values", values.len())));
        }
        out.insert(cid.to_string(), EmbeddingVector::new(values).map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}

/// Rebuilds assignments from cluster rows. Prototypes are left empty unless
/// supplied.
pub fn assignments_from_rows(
    rows: &[ClusterRow],
    prototypes: Option<&BTreeMap<String, EmbeddingVector>>,
) -> Result<Vec<ClusterAssignment>> {
    let mut by_date: BTreeMap<DateKey, ClusterAssignment> = BTreeMap::new();
    for r in rows {
        let a = by_date.entry(r.date).or_insert_with(|| ClusterAssignment {
            date: r.date,
            clusters: BTreeMap::new(),
            prototypes: BTreeMap::new(),
            threshold_used: f64::NAN,
        });
        a.clusters.entry(r.cluster_id.clone()).or_default().push(r.mention_id.clone());
    }
    if let Some(protos) = prototypes {
        for a in by_date.values_mut() {
            for cid in a.clusters.keys() {
                let p = protos
                    .get(cid)
                    .ok_or_else(|| Error::Validation(format!("cluster {cid} has no prototype")))?;
                a.prototypes.insert(cid.clone(), p.clone());
            }
        }
    }
    Ok(by_date.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn mention(id: &str, ctx: &str, surface: &str) -> MentionRecord {
        let start = ctx.find(surface).unwrap();
        MentionRecord {
            mention_id: id.into(),
            doc_id: format!("doc-{id}"),
            date: NaiveDate::from_ymd_opt(1963, 11, 22),
            surface: surface.into(),
            context: ctx.into(),
            span_start: ctx[..start].chars().count(),
            span_end: ctx[..start].chars().count() + surface.chars().count(),
            gold_qid: None,
            gold_entity: None,
        }
    }

    fn day() -> DateKey {
        DateKey::Day(NaiveDate::from_ymd_opt(1963, 11, 22).unwrap())
    }

    #[test]
    fn single_mention_is_singleton_with_own_prototype() {
        let enc = EncoderHandle::hash(64).unwrap();
        let m = mention("m1", "Kennedy spoke in Dallas.", "Kennedy");
        let cfg = CorefConfig::default();
        let a = coref_partition(day(), &[&m], &enc, &cfg).unwrap();
        assert_eq!(a.clusters.len(), 1);
        let own = embed_mentions(&[&m], &enc, &cfg).unwrap().remove(0);
        let proto = a.prototypes.values().next().unwrap();
        for (p, o) in proto.as_slice().iter().zip(own.as_slice()) {
            assert!((p - o).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_contexts_share_a_cluster() {
        let enc = EncoderHandle::hash(64).unwrap();
        let a = mention("a", "Kennedy spoke in Dallas.", "Kennedy");
        let b = mention("b", "Kennedy spoke in Dallas.", "Kennedy");
        let c = mention("c", "Mrs. Edna Pruitt taught arithmetic at the Tulsa school.", "Edna Pruitt");
        let out = coref_partition(day(), &[&a, &b, &c], &enc, &CorefConfig::default()).unwrap();
        assert_eq!(out.clusters.len(), 2);
        assert_eq!(out.clusters[&cluster_id(day(), 0)], ["a", "b"]);
        assert_eq!(out.mention_count(), 3);
    }

    #[test]
    fn files_round_trip() {
        let enc = EncoderHandle::hash(16).unwrap();
        let a = mention("a", "Kennedy spoke in Dallas.", "Kennedy");
        let b = mention("b", "Johnson spoke in Austin later.", "Johnson");
        let assignment = coref_partition(day(), &[&a, &b], &enc, &CorefConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let cpath = dir.path().join("clusters.tsv");
        let ppath = dir.path().join("prototypes.tsv");
        write_clusters(&cpath, std::slice::from_ref(&assignment)).unwrap();
        write_prototypes(&ppath, std::slice::from_ref(&assignment)).unwrap();
        let rows = read_clusters(&cpath).unwrap();
        assert_eq!(rows.len(), 2);
        let protos = read_prototypes(&ppath).unwrap();
        let back = assignments_from_rows(&rows, Some(&protos)).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].clusters, assignment.clusters);
        assert_eq!(back[0].prototypes, assignment.prototypes);
    }
}
