//! Linking cluster prototypes to knowledgebase entries.
//!
//! For each prototype the decision rule is:
//!
//! 1. retrieve the `k` nearest templates;
//! 2. if the best similarity is below the no-match threshold, the person is
//!    not in the knowledgebase;
//! 3. if the runner-up is at least `margin` cosine distance further away
//!    than the best, link to the best;
//! 4. otherwise gather every neighbour within `margin` of the best and link
//!    to the most popular one by qrank (ties to the smallest qid). With
//!    qrank re-ranking off this step also links to the best.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::coref::ClusterAssignment;
use crate::corpus::NOT_IN_KB;
use crate::encode::EmbeddingVector;
use crate::error::{Error, Result};
use crate::io::{open_lines, write_atomic};
use crate::kb::{cmp_qid, KbIndex, QrankTable};

pub const DEFAULT_MARGIN: f64 = 0.01;
pub const DEFAULT_K: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisambigConfig {
    /// Minimum top-1 cosine similarity for a link.
    pub no_match_threshold: f64,
    /// Cosine-distance band around the best neighbour that triggers re-ranking.
    pub margin: f64,
    pub k: usize,
    pub use_qrank: bool,
    pub use_coref: bool,
    /// Recorded for provenance; the filter itself is applied when the KB is pruned.
    pub use_birth_filter: bool,
}

impl DisambigConfig {
    pub fn new(no_match_threshold: f64) -> Self {
        DisambigConfig {
            no_match_threshold,
            margin: DEFAULT_MARGIN,
            k: DEFAULT_K,
            use_qrank: true,
            use_coref: true,
            use_birth_filter: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.no_match_threshold.is_finite() && (-1.0..=1.0).contains(&self.no_match_threshold)) {
            return Err(Error::Config(format!(
                "no-match threshold {} must be a cosine similarity in [-1, 1]",
                self.no_match_threshold
            )));
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return Err(Error::Config(format!("margin {} must be >= 0", self.margin)));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.use_qrank && self.margin > 0.0 && self.k < 2 {
            return Err(Error::Config(format!("k = {} but the margin rule needs k >= 2", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decision {
    Linked(String),
    NotInKb,
}

impl Decision {
    pub fn parse(s: &str) -> Self {
        if s == NOT_IN_KB {
            Decision::NotInKb
        } else {
            Decision::Linked(s.to_string())
        }
    }

    pub fn qid(&self) -> Option<&str> {
        match self {
            Decision::Linked(q) => Some(q),
            Decision::NotInKb => None,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Linked(q) => f.write_str(q),
            Decision::NotInKb => f.write_str(NOT_IN_KB),
        }
    }
}

impl Serialize for Decision {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decision {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d).map(|s| Decision::parse(&s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub qid: String,
    pub similarity: f64,
    pub qrank: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub decision: Decision,
    pub top_similarity: f64,
    /// Cosine-distance gap between the best and second-best neighbour;
    /// `None` when the index holds a single entry.
    pub runner_up_gap: Option<f64>,
    pub rerank_applied: bool,
    /// Neighbours within the margin band of the best, best first.
    pub candidates_considered: Vec<RankedCandidate>,
}

pub fn resolve(idx: &KbIndex, prototype: &EmbeddingVector, cfg: &DisambigConfig, qrank: &QrankTable) -> Result<Resolution> {
    cfg.validate()?;
    if idx.is_empty() {
        return Err(Error::Precondition("cannot resolve against an empty index".into()));
    }
    let in_band = |best: f64, sim: f64| best - sim < cfg.margin;

    let mut k = cfg.k.min(idx.len());
    let hits = loop {
        let hits = idx.knn_search(prototype, k)?;
        let last = hits.last().expect("k >= 1").similarity;
        // widen until the band is closed off by a neighbour outside it
        if cfg.use_qrank && k < idx.len() && in_band(hits[0].similarity, last) {
            k = (k * 2).min(idx.len());
            continue;
        }
        break hits;
    };

    let best = &hits[0];
    let top_similarity = best.similarity;
    let runner_up_gap = hits.get(1).map(|second| top_similarity - second.similarity);
    let band: Vec<RankedCandidate> = hits
        .iter()
        .take_while(|h| in_band(top_similarity, h.similarity))
        .map(|h| RankedCandidate {
            qid: h.qid.clone(),
            similarity: h.similarity,
            qrank: qrank.rank(&h.qid),
        })
        .collect();

    let mut resolution = Resolution {
        decision: Decision::Linked(best.qid.clone()),
        top_similarity,
        runner_up_gap,
        rerank_applied: false,
        candidates_considered: band,
    };
    if top_similarity < cfg.no_match_threshold {
        resolution.decision = Decision::NotInKb;
        return Ok(resolution);
    }
    let clear_winner = runner_up_gap.is_none_or(|gap| gap >= cfg.margin);
    if clear_winner || !cfg.use_qrank {
        return Ok(resolution);
    }
    let chosen = resolution
        .candidates_considered
        .iter()
        .max_by(|a, b| a.qrank.cmp(&b.qrank).then_with(|| cmp_qid(&b.qid, &a.qid)))
        .expect("band contains the best neighbour");
    resolution.decision = Decision::Linked(chosen.qid.clone());
    resolution.rerank_applied = true;
    Ok(resolution)
}

/// The decision for one mention, inherited from its cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionDecision {
    pub mention_id: String,
    pub cluster_id: String,
    pub decision: Decision,
    pub top_similarity: f64,
    pub runner_up_gap: Option<f64>,
    pub rerank_applied: bool,
}

pub fn singleton_cluster_id(mention_id: &str) -> String {
    format!("m:{mention_id}")
}

/// Resolves every cluster and fans the decisions out to member mentions.
///
/// With `use_coref` off each mention is resolved on its own vector from
/// `mention_vectors`, ignoring the clusters.
pub fn resolve_corpus(
    assignments: &[ClusterAssignment],
    idx: &KbIndex,
    cfg: &DisambigConfig,
    qrank: &QrankTable,
    mention_vectors: Option<&BTreeMap<String, EmbeddingVector>>,
) -> Result<BTreeMap<String, MentionDecision>> {
    cfg.validate()?;
    // (cluster id, members, query)
    let mut jobs: Vec<(String, Vec<String>, &EmbeddingVector)> = Vec::new();
    for a in assignments {
        for (cid, members) in &a.clusters {
            if cfg.use_coref {
                let proto = a
                    .prototypes
                    .get(cid)
                    .ok_or_else(|| Error::Precondition(format!("cluster {cid} has no prototype")))?;
                jobs.push((cid.clone(), members.clone(), proto));
            } else {
                let vectors = mention_vectors.ok_or_else(|| {
                    Error::Precondition("resolving without coreference needs per-mention vectors".into())
                })?;
                for m in members {
                    let v = vectors
                        .get(m)
                        .ok_or_else(|| Error::Precondition(format!("no vector for mention {m}")))?;
                    jobs.push((singleton_cluster_id(m), vec![m.clone()], v));
                }
            }
        }
    }

    let resolved = jobs
        .par_iter()
        .map(|(cid, members, query)| resolve(idx, query, cfg, qrank).map(|r| (cid, members, r)))
        .collect::<Result<Vec<_>>>()?;

    let mut out = BTreeMap::new();
    for (cid, members, r) in resolved {
        for m in members {
            out.insert(
                m.clone(),
                MentionDecision {
                    mention_id: m.clone(),
                    cluster_id: cid.clone(),
                    decision: r.decision.clone(),
                    top_similarity: r.top_similarity,
                    runner_up_gap: r.runner_up_gap,
                    rerank_applied: r.rerank_applied,
                },
            );
        }
    }
    info!(
        mentions = out.len(),
        linked = out.values().filter(|d| d.decision != Decision::NotInKb).count(),
        reranked = out.values().filter(|d| d.rerank_applied).count(),
        "resolution done"
    );
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccuracyScope {
    All,
    InKb,
}

/// Fraction of gold mentions whose decision matches; `InKb` skips mentions
/// whose gold label is not-in-KB. An empty scope scores 0.
pub fn accuracy(decisions: &BTreeMap<String, Decision>, gold: &BTreeMap<String, Decision>, scope: AccuracyScope) -> Result<f64> {
    let mut total = 0usize;
    let mut correct = 0usize;
    for (mention_id, g) in gold {
        if scope == AccuracyScope::InKb && *g == Decision::NotInKb {
            continue;
        }
        let d = decisions
            .get(mention_id)
            .ok_or_else(|| Error::Validation(format!("no decision for mention {mention_id}")))?;
        total += 1;
        correct += usize::from(d == g);
    }
    Ok(if total == 0 { 0.0 } else { correct as f64 / total as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Picks the no-match threshold among observed similarities that maximizes
/// pairwise precision of `similarity >= threshold`. Equal precision prefers
/// higher recall, then the higher threshold.
pub fn sweep_no_match_threshold(labeled: &[(f64, bool)]) -> Result<SweepResult> {
    let positives = labeled.iter().filter(|(_, m)| *m).count();
    if positives == 0 || positives == labeled.len() {
        return Err(Error::Precondition("threshold sweep needs both matching and non-matching pairs".into()));
    }
    if let Some((s, _)) = labeled.iter().find(|(s, _)| !s.is_finite()) {
        return Err(Error::Precondition(format!("non-finite similarity {s}")));
    }
    let mut sorted: Vec<(f64, bool)> = labeled.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    // (tp, predicted, threshold); walking down the sorted list, each distinct
    // similarity is a candidate cut with everything at or above it predicted.
    let mut best: Option<(usize, usize, f64)> = None;
    let (mut tp, mut predicted) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            tp += usize::from(sorted[i].1);
            predicted += 1;
            i += 1;
        }
        let better = match best {
            None => true,
            // compare tp/predicted as fractions, then recall (tp), then keep the earlier (higher) t
            Some((btp, bpred, _)) => {
                let lhs = tp * bpred;
                let rhs = btp * predicted;
                lhs > rhs || (lhs == rhs && tp > btp)
            }
        };
        if better {
            best = Some((tp, predicted, t));
        }
    }
    let (tp, predicted, threshold) = best.expect("non-empty input");
    Ok(SweepResult {
        threshold,
        precision: tp as f64 / predicted as f64,
        recall: tp as f64 / positives as f64,
    })
}

pub const DECISIONS_HEADER: &str = "mention_id\tcluster_id\tdecision\ttop_similarity\tgap\trerank_applied";

pub fn write_decisions(path: &Path, decisions: &BTreeMap<String, MentionDecision>) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{DECISIONS_HEADER}")?;
        for d in decisions.values() {
            let gap = d.runner_up_gap.map_or_else(|| "NA".to_string(), |g| format!("{g:.6}"));
            writeln!(
                w,
                "{}\t{}\t{}\t{:.6}\t{}\t{}",
                d.mention_id, d.cluster_id, d.decision, d.top_similarity, gap, d.rerank_applied
            )?;
        }
        Ok(())
    })
}

pub fn read_decisions(path: &Path) -> Result<BTreeMap<String, MentionDecision>> {
    let mut out = BTreeMap::new();
    for (line_no, line) in open_lines(path)? {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() || (line_no == 1 && line == DECISIONS_HEADER) {
            continue;
        }
        let bad = |message: String| Error::Parse { path: path.to_path_buf(), line: line_no, message };
        let f: Vec<&str> = line.split('\t').collect();
        let [mention_id, cluster_id, decision, top, gap, rerank] = f[..] else {
            return Err(bad(format!("expected 6 fields, got {}", f.len())));
        };
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number {s:?}")));
        out.insert(
            mention_id.to_string(),
            MentionDecision {
                mention_id: mention_id.to_string(),
                cluster_id: cluster_id.to_string(),
                decision: Decision::parse(decision),
                top_similarity: parse_f(top)?,
                runner_up_gap: if gap == "NA" { None } else { Some(parse_f(gap)?) },
                rerank_applied: rerank.parse().map_err(|_| bad(format!("bad flag {rerank:?}")))?,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Unit vectors in 2-D whose inner product with e1 is exactly `sims[i]`.
    fn index_with_sims(entries: &[(&str, f64)]) -> KbIndex {
        KbIndex::from_vectors(
            entries
                .iter()
                .map(|(q, s)| {
                    let v = EmbeddingVector::new(vec![*s, (1.0 - s * s).max(0.0).sqrt()]).unwrap();
                    (q.to_string(), v)
                })
                .collect(),
        )
        .unwrap()
    }

    fn e1() -> EmbeddingVector {
        EmbeddingVector::new(vec![1.0, 0.0]).unwrap()
    }

    fn ranks(pairs: &[(&str, u64)]) -> QrankTable {
        QrankTable::from_pairs(pairs.iter().map(|(q, r)| (q.to_string(), *r)))
    }

    #[test]
    fn clear_winner_links_directly() {
        let idx = index_with_sims(&[("A", 0.95), ("B", 0.90)]);
        let r = resolve(&idx, &e1(), &DisambigConfig::new(0.8), &QrankTable::default()).unwrap();
        assert_eq!(r.decision, Decision::Linked("A".into()));
        assert!(!r.rerank_applied);
        assert!((r.runner_up_gap.unwrap() - 0.05).abs() < 1e-9);
    }

    #[test]
    fn below_threshold_is_not_in_kb() {
        let idx = index_with_sims(&[("A", 0.5), ("B", 0.2)]);
        let r = resolve(&idx, &e1(), &DisambigConfig::new(0.8), &QrankTable::default()).unwrap();
        assert_eq!(r.decision, Decision::NotInKb);
        assert!(r.top_similarity < 0.8);
    }

    #[test]
    fn qrank_flips_near_tie() {
        let idx = index_with_sims(&[("A", 0.90), ("B", 0.895)]);
        let q = ranks(&[("A", 10), ("B", 9000)]);
        let mut cfg = DisambigConfig::new(0.8);
        let r = resolve(&idx, &e1(), &cfg, &q).unwrap();
        assert_eq!(r.decision, Decision::Linked("B".into()));
        assert!(r.rerank_applied);
        assert!(r.runner_up_gap.unwrap() < 0.01);
        cfg.use_qrank = false;
        let r = resolve(&idx, &e1(), &cfg, &q).unwrap();
        assert_eq!(r.decision, Decision::Linked("A".into()));
        assert!(!r.rerank_applied);
    }

    #[test]
    fn band_widens_past_k() {
        // six entries inside the band, the most popular one retrieved last
        let entries: Vec<(String, f64)> = (0..6).map(|i| (format!("Q{i}"), 0.9 - 0.001 * i as f64)).collect();
        let refs: Vec<(&str, f64)> = entries.iter().map(|(q, s)| (q.as_str(), *s)).collect();
        let idx = index_with_sims(&refs);
        let mut cfg = DisambigConfig::new(0.5);
        cfg.k = 2;
        let r = resolve(&idx, &e1(), &cfg, &ranks(&[("Q5", 100)])).unwrap();
        assert_eq!(r.decision, Decision::Linked("Q5".into()));
        assert_eq!(r.candidates_considered.len(), 6);
    }

    #[test]
    fn rank_ties_go_to_smallest_qid() {
        let idx = index_with_sims(&[("Q20", 0.9), ("Q3", 0.899)]);
        let r = resolve(&idx, &e1(), &DisambigConfig::new(0.5), &ranks(&[("Q20", 5), ("Q3", 5)])).unwrap();
        assert_eq!(r.decision, Decision::Linked("Q3".into()));
    }

    #[test]
    fn config_errors() {
        let idx = index_with_sims(&[("A", 0.9), ("B", 0.1)]);
        let mut cfg = DisambigConfig::new(0.5);
        cfg.k = 1;
        assert!(matches!(resolve(&idx, &e1(), &cfg, &QrankTable::default()), Err(Error::Config(_))));
        cfg.use_qrank = false;
        assert!(resolve(&idx, &e1(), &cfg, &QrankTable::default()).is_ok());
    }

    #[test]
    fn single_entry_index_has_no_gap() {
        let idx = index_with_sims(&[("A", 0.9)]);
        let r = resolve(&idx, &e1(), &DisambigConfig::new(0.5), &QrankTable::default()).unwrap();
        assert_eq!(r.decision, Decision::Linked("A".into()));
        assert_eq!(r.runner_up_gap, None);
    }

    #[test]
    fn accuracy_scopes() {
        let g = |pairs: &[(&str, &str)]| -> BTreeMap<String, Decision> {
            pairs.iter().map(|(m, d)| (m.to_string(), Decision::parse(d))).collect()
        };
        let gold = g(&[("m1", "Q1"), ("m2", NOT_IN_KB), ("m3", "Q3")]);
        assert_eq!(accuracy(&gold, &gold, AccuracyScope::All).unwrap(), 1.0);
        let dec = g(&[("m1", "Q1"), ("m2", "Q9"), ("m3", "Q3")]);
        assert!((accuracy(&dec, &gold, AccuracyScope::All).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(accuracy(&dec, &gold, AccuracyScope::InKb).unwrap(), 1.0);
        let missing = g(&[("m1", "Q1")]);
        assert!(accuracy(&missing, &gold, AccuracyScope::All).unwrap_err().to_string().contains("m2"));

        let gold10: BTreeMap<String, Decision> = (0..10).map(|i| (format!("m{i}"), Decision::Linked(format!("Q{i}")))).collect();
        let mut dec10 = gold10.clone();
        for i in 0..3 {
            dec10.insert(format!("m{i}"), Decision::NotInKb);
        }
        assert!((accuracy(&dec10, &gold10, AccuracyScope::All).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn sweep_examples() {
        let sep = [(0.9, true), (0.9, true), (0.95, true), (0.5, false), (0.3, false)];
        assert_eq!(sweep_no_match_threshold(&sep).unwrap().threshold, 0.9);
        let inter = [(0.9, true), (0.8, false), (0.7, true)];
        let r = sweep_no_match_threshold(&inter).unwrap();
        assert_eq!((r.threshold, r.precision), (0.9, 1.0));
        assert_eq!(sweep_no_match_threshold(&[(0.6, true), (0.4, false)]).unwrap().threshold, 0.6);
        assert!(sweep_no_match_threshold(&[(0.6, true)]).is_err());
        assert!(sweep_no_match_threshold(&[(0.6, false), (0.1, false)]).is_err());
    }

    #[test]
    fn decisions_file_round_trip() {
        let mut d = BTreeMap::new();
        d.insert(
            "m1".to_string(),
            MentionDecision {
                mention_id: "m1".into(),
                cluster_id: "1963-11-22:0".into(),
                decision: Decision::Linked("Q9696".into()),
                top_similarity: 0.75,
                runner_up_gap: Some(0.125),
                rerank_applied: false,
            },
        );
        d.insert(
            "m2".to_string(),
            MentionDecision {
                mention_id: "m2".into(),
                cluster_id: "m:m2".into(),
                decision: Decision::NotInKb,
                top_similarity: 0.25,
                runner_up_gap: None,
                rerank_applied: false,
            },
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("decisions.tsv");
        write_decisions(&p, &d).unwrap();
        assert_eq!(read_decisions(&p).unwrap(), d);
    }

    fn sims_index(sims: &[f64]) -> KbIndex {
        let named: Vec<(String, f64)> = sims.iter().enumerate().map(|(i, s)| (format!("Q{i}"), *s)).collect();
        let refs: Vec<(&str, f64)> = named.iter().map(|(q, s)| (q.as_str(), *s)).collect();
        index_with_sims(&refs)
    }

    proptest! {
        #[test]
        fn raising_threshold_never_links_more(
            sims in prop::collection::vec(-1.0f64..1.0, 1..12),
            rank_seed in prop::collection::vec(0u64..100, 12),
            t in -1.0f64..1.0,
            dt in 0.0f64..1.0,
            use_qrank in any::<bool>(),
        ) {
            let idx = sims_index(&sims);
            let q = QrankTable::from_pairs(rank_seed.iter().enumerate().map(|(i, r)| (format!("Q{i}"), *r)));
            let mut cfg = DisambigConfig::new(t);
            cfg.use_qrank = use_qrank;
            let low = resolve(&idx, &e1(), &cfg, &q).unwrap();
            cfg.no_match_threshold = (t + dt).min(1.0);
            let high = resolve(&idx, &e1(), &cfg, &q).unwrap();
            if low.decision == Decision::NotInKb {
                prop_assert_eq!(high.decision, Decision::NotInKb);
            }
        }

        #[test]
        fn without_qrank_or_margin_is_gated_nearest_neighbour(
            sims in prop::collection::vec(-1.0f64..1.0, 1..12),
            t in -1.0f64..1.0,
        ) {
            let idx = sims_index(&sims);
            let mut cfg = DisambigConfig::new(t);
            cfg.use_qrank = false;
            cfg.margin = 0.0;
            let r = resolve(&idx, &e1(), &cfg, &ranks(&[("Q0", 1_000_000)])).unwrap();
            let (best, top) = sims.iter().enumerate().fold((0, f64::MIN), |acc, (i, s)| if *s > acc.1 { (i, *s) } else { acc });
            let want = if top >= t { Decision::Linked(format!("Q{best}")) } else { Decision::NotInKb };
            prop_assert_eq!(r.decision, want);
            prop_assert!(!r.rerank_applied);
        }

        #[test]
        fn in_kb_accuracy_is_all_scope_restricted(labels in prop::collection::vec((prop::option::of(0u8..4), prop::option::of(0u8..4)), 1..30)) {
            let dec = |x: &Option<u8>| x.map_or(Decision::NotInKb, |q| Decision::Linked(format!("Q{q}")));
            let gold: BTreeMap<String, Decision> = labels.iter().enumerate().map(|(i, (g, _))| (format!("m{i}"), dec(g))).collect();
            let decisions: BTreeMap<String, Decision> = labels.iter().enumerate().map(|(i, (_, d))| (format!("m{i}"), dec(d))).collect();
            let in_kb: BTreeMap<String, Decision> = gold.iter().filter(|(_, g)| **g != Decision::NotInKb).map(|(k, v)| (k.clone(), v.clone())).collect();
            prop_assert_eq!(
                accuracy(&decisions, &gold, AccuracyScope::InKb).unwrap(),
                accuracy(&decisions, &in_kb, AccuracyScope::All).unwrap()
            );
        }
    }
}
