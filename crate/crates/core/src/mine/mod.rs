//! Contrastive training pairs mined from hyperlink records.
//!
//! Each [`LinkRecord`] is a paragraph containing a hyperlink to a person's
//! page. Two record sets are produced: mention-mention pairs for the
//! coreference encoder and mention-template pairs for the disambiguation
//! encoder. Negatives come in four flavours; when a pair qualifies for more
//! than one, the first of family > disambiguation page > in-context wins.
//!
//! Every entity is assigned to exactly one split and pairs never join
//! entities from different splits. Sampling keeps the pairs with the smallest
//! seeded hash of their content, so output depends only on the inputs, the
//! seed and the quota, never on input order or thread count.

pub mod loss;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tracing::info;

use crate::corpus::{char_to_byte, mark_span, truncate_to_window, Markers};
use crate::coref::DEFAULT_WINDOW_TOKENS;
use crate::error::{Error, Result};
use crate::hashing::seeded_hash;
use crate::io::{open_lines, read_jsonl, write_atomic};
use crate::kb::{cmp_qid, EntityTemplate};

pub use loss::{online_contrastive_loss, toy_train_step, ToyEncoder, DEFAULT_LOSS_MARGIN};

pub const DEFAULT_POSITIVE_CAP: usize = 50;
pub const DEFAULT_SPLIT_RATIOS: [f64; 3] = [0.8, 0.1, 0.1];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub page_id: String,
    pub target_qid: String,
    pub context: String,
    /// Character offsets of the anchor text inside `context`.
    pub anchor_start: usize,
    pub anchor_end: usize,
    #[serde(default)]
    pub in_context_qids: Vec<String>,
}

impl LinkRecord {
    pub fn validate(&self) -> Result<()> {
        let what = || format!("link on page {} to {}", self.page_id, self.target_qid);
        if self.anchor_start >= self.anchor_end || self.anchor_byte_span().is_none() {
            return Err(Error::Validation(format!(
                "{}: anchor {}..{} is empty or outside the context",
                what(),
                self.anchor_start,
                self.anchor_end
            )));
        }
        if self.in_context_qids.contains(&self.target_qid) {
            return Err(Error::Validation(format!("{}: target also listed as in-context", what())));
        }
        Ok(())
    }

    fn anchor_byte_span(&self) -> Option<std::ops::Range<usize>> {
        Some(char_to_byte(&self.context, self.anchor_start)?..char_to_byte(&self.context, self.anchor_end)?)
    }

    /// The context with the anchor marked, cut to the encoder window.
    pub fn marked_text(&self, markers: &Markers, window_tokens: usize) -> Result<String> {
        let span = self.anchor_byte_span().ok_or_else(|| Error::Validation("anchor outside context".into()))?;
        let mc = mark_span(&self.page_id, &self.context, span, markers);
        Ok(truncate_to_window(&mc, window_tokens, markers)?.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisambigGroup {
    pub group_name: String,
    #[serde(alias = "member_qids")]
    pub qids: Vec<String>,
}

impl DisambigGroup {
    pub fn validate(&self) -> Result<()> {
        let distinct: HashSet<&String> = self.qids.iter().collect();
        if distinct.len() < 2 {
            return Err(Error::Validation(format!(
                "group {:?} needs at least two distinct members",
                self.group_name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRelation {
    pub qid_a: String,
    pub qid_b: String,
    #[serde(default)]
    pub relation: String,
}

impl FamilyRelation {
    pub fn validate(&self) -> Result<()> {
        if self.qid_a == self.qid_b {
            return Err(Error::Validation(format!("family relation of {} with itself", self.qid_a)));
        }
        Ok(())
    }
}

fn load_validated<T: serde::de::DeserializeOwned>(path: &Path, check: impl Fn(&T) -> Result<()>) -> Result<Vec<T>> {
    let items: Vec<T> = read_jsonl(path)?;
    for item in &items {
        check(item)?;
    }
    Ok(items)
}

pub fn load_link_records(path: &Path) -> Result<Vec<LinkRecord>> {
    load_validated(path, LinkRecord::validate)
}

pub fn load_groups(path: &Path) -> Result<Vec<DisambigGroup>> {
    load_validated(path, DisambigGroup::validate)
}

pub fn load_families(path: &Path) -> Result<Vec<FamilyRelation>> {
    load_validated(path, FamilyRelation::validate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Positive,
    FamilyHard,
    DisambigPageHard,
    InContextHard,
    Easy,
}

impl PairKind {
    pub const ALL: [PairKind; 5] = [
        PairKind::Positive,
        PairKind::FamilyHard,
        PairKind::DisambigPageHard,
        PairKind::InContextHard,
        PairKind::Easy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PairKind::Positive => "positive",
            PairKind::FamilyHard => "family_hard",
            PairKind::DisambigPageHard => "disambig_page_hard",
            PairKind::InContextHard => "in_context_hard",
            PairKind::Easy => "easy",
        }
    }

    pub fn label(self) -> u8 {
        u8::from(self == PairKind::Positive)
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PairKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown pair kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Split::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown split {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairExample {
    pub text_a: String,
    pub text_b: String,
    pub label: u8,
    pub kind: PairKind,
    pub split: Split,
    /// Entity behind `text_a` / `text_b`; kept for auditing, not written to the TSV.
    pub qid_a: String,
    pub qid_b: String,
}

/// Number of entities per split under largest-remainder rounding; ties in
/// the remainder go to the earlier split.
pub fn split_counts(n: usize, ratios: [f64; 3]) -> Result<[usize; 3]> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split ratios {ratios:?} must be non-negative and sum to 1")));
    }
    let targets = ratios.map(|r| r * n as f64);
    let mut counts = targets.map(|t| (t + 1e-9).floor() as usize);
    let mut order = [0usize, 1, 2];
    let rem = |i: usize| targets[i] - counts[i] as f64;
    order.sort_by(|&a, &b| {
        let (ra, rb) = (rem(a), rem(b));
        if (ra - rb).abs() <= 1e-9 {
            a.cmp(&b)
        } else {
            rb.total_cmp(&ra)
        }
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    Ok(counts)
}

/// Assigns every distinct qid to a split: qids are ordered by a seeded hash
/// and cut according to [`split_counts`].
pub fn split_by_entity(qids: &[String], ratios: [f64; 3], seed: u64) -> Result<BTreeMap<String, Split>> {
    let unique: BTreeSet<&str> = qids.iter().map(String::as_str).collect();
    let mut ordered: Vec<(u64, &str)> = unique.into_iter().map(|q| (seeded_hash(seed, &["split", q]), q)).collect();
    ordered.sort();
    let counts = split_counts(ordered.len(), ratios)?;
    let mut out = BTreeMap::new();
    let mut it = ordered.into_iter();
    for (split, count) in Split::ALL.into_iter().zip(counts) {
        for (_, q) in it.by_ref().take(count) {
            out.insert(q.to_string(), split);
        }
    }
    Ok(out)
}

/// Every qid mentioned by the mining inputs, for split assignment.
pub fn entity_universe<'a>(
    records: &'a [LinkRecord],
    groups: &'a [DisambigGroup],
    families: &'a [FamilyRelation],
    templates: impl IntoIterator<Item = &'a String>,
) -> Vec<String> {
    let mut all: BTreeSet<&str> = BTreeSet::new();
    for r in records {
        all.insert(&r.target_qid);
        all.extend(r.in_context_qids.iter().map(String::as_str));
    }
    for g in groups {
        all.extend(g.qids.iter().map(String::as_str));
    }
    for f in families {
        all.insert(&f.qid_a);
        all.insert(&f.qid_b);
    }
    all.extend(templates.into_iter().map(String::as_str));
    all.into_iter().map(str::to_string).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotaWeights {
    pub family: f64,
    pub disambig_page: f64,
    pub in_context: f64,
    pub easy: f64,
}

impl Default for QuotaWeights {
    fn default() -> Self {
        QuotaWeights { family: 2.0, disambig_page: 2.0, in_context: 1.0, easy: 1.0 }
    }
}

/// Maximum number of pairs kept per kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quota(pub BTreeMap<PairKind, usize>);

impl Quota {
    pub fn uniform(n: usize) -> Self {
        Quota(PairKind::ALL.into_iter().map(|k| (k, n)).collect())
    }

    /// Splits `negatives` across the negative kinds in proportion to `w`
    /// (largest remainder, earlier kind first on ties).
    pub fn from_weights(positives: usize, negatives: usize, w: &QuotaWeights) -> Result<Self> {
        let kinds = [
            (PairKind::FamilyHard, w.family),
            (PairKind::DisambigPageHard, w.disambig_page),
            (PairKind::InContextHard, w.in_context),
            (PairKind::Easy, w.easy),
        ];
        let total: f64 = kinds.iter().map(|(_, x)| x).sum();
        if kinds.iter().any(|(_, x)| !x.is_finite() || *x < 0.0) || total <= 0.0 {
            return Err(Error::Config(format!("invalid quota weights {w:?}")));
        }
        let targets: Vec<f64> = kinds.iter().map(|(_, x)| x / total * negatives as f64).collect();
        let mut counts: Vec<usize> = targets.iter().map(|t| (t + 1e-9).floor() as usize).collect();
        let mut order: Vec<usize> = (0..kinds.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (targets[a] - counts[a] as f64, targets[b] - counts[b] as f64);
            if (ra - rb).abs() <= 1e-9 {
                a.cmp(&b)
            } else {
                rb.total_cmp(&ra)
            }
        });
        let short = negatives.saturating_sub(counts.iter().sum());
        for &i in order.iter().take(short) {
            counts[i] += 1;
        }
        let mut map: BTreeMap<PairKind, usize> = kinds.iter().map(|(k, _)| *k).zip(counts).collect();
        map.insert(PairKind::Positive, positives);
        Ok(Quota(map))
    }

    pub fn get(&self, kind: PairKind) -> usize {
        self.0.get(&kind).copied().unwrap_or(0)
    }
}

impl Default for Quota {
    fn default() -> Self {
        Quota::from_weights(10_000, 10_000, &QuotaWeights::default()).expect("default weights are valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MineConfig {
    pub seed: u64,
    pub quota: Quota,
    pub split_ratios: [f64; 3],
    pub positive_cap_per_entity: usize,
    pub markers: Markers,
    pub window_tokens: usize,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig {
            seed: 0,
            quota: Quota::default(),
            split_ratios: DEFAULT_SPLIT_RATIOS,
            positive_cap_per_entity: DEFAULT_POSITIVE_CAP,
            markers: Markers::default(),
            window_tokens: DEFAULT_WINDOW_TOKENS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineReport {
    /// Qualifying pairs per kind (after the per-entity positive cap).
    pub available: BTreeMap<PairKind, usize>,
    pub selected: BTreeMap<PairKind, usize>,
    /// Quota minus selected, for kinds that fell short.
    pub shortfall: BTreeMap<PairKind, usize>,
    /// Records dropped because their target has no template.
    pub skipped_records: usize,
}

fn ordered_pair<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

struct Relations<'a> {
    family: HashSet<(&'a str, &'a str)>,
    grouped: HashSet<(&'a str, &'a str)>,
}

impl<'a> Relations<'a> {
    fn new(groups: &'a [DisambigGroup], families: &'a [FamilyRelation]) -> Result<Self> {
        let mut rel = Relations { family: HashSet::new(), grouped: HashSet::new() };
        for f in families {
            f.validate()?;
            rel.family.insert(ordered_pair(&f.qid_a, &f.qid_b));
        }
        for g in groups {
            g.validate()?;
            for (i, a) in g.qids.iter().enumerate() {
                for b in &g.qids[i + 1..] {
                    if a != b {
                        rel.grouped.insert(ordered_pair(a, b));
                    }
                }
            }
        }
        Ok(rel)
    }

    /// Negative kind of a pair of distinct entities. `in_context` tells
    /// whether either side's paragraph links the other entity.
    fn classify(&self, a: &str, b: &str, in_context: bool) -> PairKind {
        let key = ordered_pair(a, b);
        if self.family.contains(&key) {
            PairKind::FamilyHard
        } else if self.grouped.contains(&key) {
            PairKind::DisambigPageHard
        } else if in_context {
            PairKind::InContextHard
        } else {
            PairKind::Easy
        }
    }
}

/// Bounded max-heap keeping the `k` smallest entries.
struct BottomK<T: Ord> {
    k: usize,
    heap: BinaryHeap<T>,
    seen: usize,
}

impl<T: Ord> BottomK<T> {
    fn new(k: usize) -> Self {
        BottomK { k, heap: BinaryHeap::new(), seen: 0 }
    }

    fn push(&mut self, item: T) {
        self.seen += 1;
        if self.k == 0 {
            return;
        }
        if self.heap.len() < self.k {
            self.heap.push(item);
        } else if self.heap.peek().is_some_and(|top| item < *top) {
            self.heap.pop();
            self.heap.push(item);
        }
    }

    fn into_sorted(self) -> Vec<T> {
        self.heap.into_sorted_vec()
    }
}

struct Prepared<'a> {
    record: &'a LinkRecord,
    text: String,
    split: Split,
}

/// Validates records, marks their contexts and puts them in a canonical order.
fn prepare<'a>(records: &'a [LinkRecord], splits: &BTreeMap<String, Split>, cfg: &MineConfig) -> Result<Vec<Prepared<'a>>> {
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        r.validate()?;
        let split = *splits
            .get(&r.target_qid)
            .ok_or_else(|| Error::Precondition(format!("entity {} has no split", r.target_qid)))?;
        out.push(Prepared { record: r, text: r.marked_text(&cfg.markers, cfg.window_tokens)?, split });
    }
    out.sort_by(|x, y| {
        cmp_qid(&x.record.target_qid, &y.record.target_qid)
            .then_with(|| x.record.page_id.cmp(&y.record.page_id))
            .then_with(|| x.record.anchor_start.cmp(&y.record.anchor_start))
            .then_with(|| x.record.anchor_end.cmp(&y.record.anchor_end))
            .then_with(|| x.text.cmp(&y.text))
    });
    Ok(out)
}

fn pair_key(seed: u64, kind: PairKind, a: &str, b: &str, qa: &str, qb: &str) -> u64 {
    seeded_hash(seed, &[kind.as_str(), qa, qb, a, b])
}

fn finish(
    cfg: &MineConfig,
    heaps: BTreeMap<PairKind, BottomK<(u64, usize, usize)>>,
    available: BTreeMap<PairKind, usize>,
    skipped_records: usize,
    make: impl Fn(PairKind, usize, usize) -> PairExample,
) -> (Vec<PairExample>, MineReport) {
    let mut report = MineReport { available, skipped_records, ..Default::default() };
    let mut pairs = Vec::new();
    for (kind, heap) in heaps {
        let chosen = heap.into_sorted();
        report.selected.insert(kind, chosen.len());
        let want = cfg.quota.get(kind);
        if chosen.len() < want {
            report.shortfall.insert(kind, want - chosen.len());
        }
        pairs.extend(chosen.into_iter().map(|(_, i, j)| make(kind, i, j)));
    }
    (pairs, report)
}

fn new_heaps(cfg: &MineConfig) -> BTreeMap<PairKind, BottomK<(u64, usize, usize)>> {
    PairKind::ALL.into_iter().map(|k| (k, BottomK::new(cfg.quota.get(k)))).collect()
}

/// Mention-mention pairs for training the coreference encoder.
pub fn mine_coref_pairs(
    records: &[LinkRecord],
    groups: &[DisambigGroup],
    families: &[FamilyRelation],
    splits: &BTreeMap<String, Split>,
    cfg: &MineConfig,
) -> Result<(Vec<PairExample>, MineReport)> {
    if records.is_empty() {
        return Err(Error::Precondition("no link records to mine".into()));
    }
    let rel = Relations::new(groups, families)?;
    let recs = prepare(records, splits, cfg)?;
    let mut heaps = new_heaps(cfg);
    let mut available: BTreeMap<PairKind, usize> = PairKind::ALL.into_iter().map(|k| (k, 0)).collect();

    let mut start = 0;
    while start < recs.len() {
        let qid = &recs[start].record.target_qid;
        let end = start + recs[start..].iter().take_while(|p| &p.record.target_qid == qid).count();
        let mut entity = BottomK::new(cfg.positive_cap_per_entity);
        for i in start..end {
            for j in i + 1..end {
                entity.push((pair_key(cfg.seed, PairKind::Positive, &recs[i].text, &recs[j].text, qid, qid), i, j));
            }
        }
        let kept = entity.into_sorted();
        *available.get_mut(&PairKind::Positive).expect("all kinds") += kept.len();
        let positives = heaps.get_mut(&PairKind::Positive).expect("all kinds");
        for item in kept {
            positives.push(item);
        }
        start = end;
    }

    for i in 0..recs.len() {
        let (ri, ti) = (recs[i].record, &recs[i].text);
        for j in i + 1..recs.len() {
            let rj = recs[j].record;
            if rj.target_qid == ri.target_qid || recs[j].split != recs[i].split {
                continue;
            }
            let in_context = ri.in_context_qids.contains(&rj.target_qid) || rj.in_context_qids.contains(&ri.target_qid);
            let kind = rel.classify(&ri.target_qid, &rj.target_qid, in_context);
            *available.get_mut(&kind).expect("all kinds") += 1;
            let key = pair_key(cfg.seed, kind, ti, &recs[j].text, &ri.target_qid, &rj.target_qid);
            heaps.get_mut(&kind).expect("all kinds").push((key, i, j));
        }
    }

    let (pairs, report) = finish(cfg, heaps, available, 0, |kind, i, j| PairExample {
        text_a: recs[i].text.clone(),
        text_b: recs[j].text.clone(),
        label: kind.label(),
        kind,
        split: recs[i].split,
        qid_a: recs[i].record.target_qid.clone(),
        qid_b: recs[j].record.target_qid.clone(),
    });
    log_report("coref", &report);
    Ok((pairs, report))
}

/// Mention-template pairs for training the disambiguation encoder.
pub fn mine_disambig_pairs(
    records: &[LinkRecord],
    templates: &BTreeMap<String, EntityTemplate>,
    groups: &[DisambigGroup],
    families: &[FamilyRelation],
    splits: &BTreeMap<String, Split>,
    cfg: &MineConfig,
) -> Result<(Vec<PairExample>, MineReport)> {
    if records.is_empty() {
        return Err(Error::Precondition("no link records to mine".into()));
    }
    let rel = Relations::new(groups, families)?;
    let with_template: Vec<LinkRecord> = records.iter().filter(|r| templates.contains_key(&r.target_qid)).cloned().collect();
    let skipped = records.len() - with_template.len();
    let recs = prepare(&with_template, splits, cfg)?;

    let mut tqids: Vec<&String> = templates.keys().collect();
    tqids.sort_by(|a, b| cmp_qid(a, b));
    let mut tsplit = Vec::with_capacity(tqids.len());
    for q in &tqids {
        tsplit.push(*splits.get(*q).ok_or_else(|| Error::Precondition(format!("entity {q} has no split")))?);
    }

    let mut heaps = new_heaps(cfg);
    let mut available: BTreeMap<PairKind, usize> = PairKind::ALL.into_iter().map(|k| (k, 0)).collect();
    let mut positives_per_entity: BTreeMap<&str, BottomK<(u64, usize, usize)>> = BTreeMap::new();
    for (i, p) in recs.iter().enumerate() {
        let a = p.record.target_qid.as_str();
        for (j, b) in tqids.iter().enumerate() {
            if tsplit[j] != p.split {
                continue;
            }
            let text_b = &templates[*b].template_text;
            if a == b.as_str() {
                let key = pair_key(cfg.seed, PairKind::Positive, &p.text, text_b, a, b);
                positives_per_entity
                    .entry(a)
                    .or_insert_with(|| BottomK::new(cfg.positive_cap_per_entity))
                    .push((key, i, j));
                continue;
            }
            let kind = rel.classify(a, b, p.record.in_context_qids.contains(*b));
            *available.get_mut(&kind).expect("all kinds") += 1;
            let key = pair_key(cfg.seed, kind, &p.text, text_b, a, b);
            heaps.get_mut(&kind).expect("all kinds").push((key, i, j));
        }
    }
    for (_, entity) in positives_per_entity {
        let kept = entity.into_sorted();
        *available.get_mut(&PairKind::Positive).expect("all kinds") += kept.len();
        let positives = heaps.get_mut(&PairKind::Positive).expect("all kinds");
        for item in kept {
            positives.push(item);
        }
    }

    let (pairs, report) = finish(cfg, heaps, available, skipped, |kind, i, j| PairExample {
        text_a: recs[i].text.clone(),
        text_b: templates[tqids[j]].template_text.clone(),
        label: kind.label(),
        kind,
        split: recs[i].split,
        qid_a: recs[i].record.target_qid.clone(),
        qid_b: tqids[j].clone(),
    });
    log_report("disambig", &report);
    Ok((pairs, report))
}

fn log_report(which: &str, r: &MineReport) {
    for kind in PairKind::ALL {
        info!(
            set = which,
            kind = kind.as_str(),
            available = r.available.get(&kind).copied().unwrap_or(0),
            selected = r.selected.get(&kind).copied().unwrap_or(0),
            shortfall = r.shortfall.get(&kind).copied().unwrap_or(0),
            "mined pairs"
        );
    }
    if r.skipped_records > 0 {
        info!(set = which, skipped = r.skipped_records, "records without a template skipped");
    }
}

pub const PAIRS_HEADER: &str = "text_a\ttext_b\tlabel\tkind\tsplit";

fn tsv_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

pub fn write_pairs(path: &Path, pairs: &[PairExample]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{PAIRS_HEADER}")?;
        for p in pairs {
            writeln!(w, "{}\t{}\t{}\t{}\t{}", tsv_field(&p.text_a), tsv_field(&p.text_b), p.label, p.kind, p.split)?;
        }
        Ok(())
    })
}

/// Reads a pair file, e.g. hand-labelled pairs in the mined format. Entity
/// ids are not part of the file and come back empty.
pub fn read_pairs(path: &Path) -> Result<Vec<PairExample>> {
    let mut out = Vec::new();
    for (line_no, line) in open_lines(path)? {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() || (line_no == 1 && line == PAIRS_HEADER) {
            continue;
        }
        let bad = |message: String| Error::Parse { path: path.to_path_buf(), line: line_no, message };
        let f: Vec<&str> = line.split('\t').collect();
        let [a, b, label, kind, split] = f[..] else {
            return Err(bad(format!("expected 5 fields, got {}", f.len())));
        };
        let kind: PairKind = kind.parse().map_err(|e: Error| bad(e.to_string()))?;
        let label: u8 = label.parse().map_err(|_| bad(format!("bad label {label:?}")))?;
        if label != kind.label() {
            return Err(bad(format!("label {label} contradicts kind {kind}")));
        }
        out.push(PairExample {
            text_a: a.to_string(),
            text_b: b.to_string(),
            label,
            kind,
            split: split.parse().map_err(|e: Error| bad(e.to_string()))?,
            qid_a: String::new(),
            qid_b: String::new(),
        });
    }
    Ok(out)
}

/// Orders pairs by (kind, split, text_a, text_b); handy for comparing runs.
pub fn cmp_pairs(a: &PairExample, b: &PairExample) -> Ordering {
    (a.kind, a.split, &a.text_a, &a.text_b).cmp(&(b.kind, b.split, &b.text_a, &b.text_b))
}
