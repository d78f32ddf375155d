//! Knowledgebase pruning predicates.

use std::collections::HashSet;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use tracing::debug;

use super::levenshtein::normalized_levenshtein;
use super::template::{EntityCandidate, EntityTemplate};

pub const HUMAN: &str = "human";
pub const DEFAULT_MAX_NORM_EDIT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneConfig {
    /// Last date covered by the corpus; people born later are dropped.
    pub corpus_end: NaiveDate,
    pub birth_filter: bool,
    /// Label/title pairs with no shared token and a normalized edit distance
    /// above this are dropped.
    pub max_norm_edit: f64,
}

impl PruneConfig {
    pub fn new(corpus_end: NaiveDate) -> Self {
        PruneConfig {
            corpus_end,
            birth_filter: true,
            max_norm_edit: DEFAULT_MAX_NORM_EDIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneReason {
    NotHuman,
    NoLifeDates,
    BornAfterCorpus,
    TitleMismatch,
}

impl fmt::Display for PruneReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PruneReason::NotHuman => "not_human",
            PruneReason::NoLifeDates => "no_life_dates",
            PruneReason::BornAfterCorpus => "born_after_corpus",
            PruneReason::TitleMismatch => "title_mismatch",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct PruneOutcome {
    pub kept: Vec<EntityTemplate>,
    pub rejected: Vec<(String, PruneReason)>,
}

impl PruneOutcome {
    pub fn count(&self, reason: PruneReason) -> usize {
        self.rejected.iter().filter(|(_, r)| *r == reason).count()
    }
}

/// Lowercase alphanumeric tokens.
pub fn name_tokens(s: &str) -> HashSet<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// True when the page title looks like it belongs to a different entity.
pub fn title_mismatch(label: &str, page_title: &str, max_norm_edit: f64) -> bool {
    let shared = name_tokens(label).intersection(&name_tokens(page_title)).next().is_some();
    !shared && normalized_levenshtein(label, page_title) > max_norm_edit
}

/// First failing predicate, or `None` if the candidate is kept.
pub fn check_candidate(c: &EntityCandidate, cfg: &PruneConfig) -> Option<PruneReason> {
    if c.instance_type != HUMAN {
        return Some(PruneReason::NotHuman);
    }
    if c.birth_date.is_none() && c.death_date.is_none() {
        return Some(PruneReason::NoLifeDates);
    }
    if cfg.birth_filter && c.birth_date.is_some_and(|b| b > cfg.corpus_end) {
        return Some(PruneReason::BornAfterCorpus);
    }
    if let Some(title) = c.page_title.as_deref() {
        if title_mismatch(&c.label, title, cfg.max_norm_edit) {
            return Some(PruneReason::TitleMismatch);
        }
    }
    None
}

pub fn prune_kb(candidates: &[EntityCandidate], cfg: &PruneConfig) -> PruneOutcome {
    let mut out = PruneOutcome::default();
    for c in candidates {
        match check_candidate(c, cfg) {
            None => out.kept.push(EntityTemplate::from_candidate(c)),
            Some(reason) => {
                debug!(qid = %c.qid, %reason, "pruned");
                out.rejected.push((c.qid.clone(), reason));
            }
        }
    }
    out
}
