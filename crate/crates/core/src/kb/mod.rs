//! Person knowledgebase: templates, pruning, popularity and the flat index.

pub mod index;
pub mod levenshtein;
pub mod prune;
pub mod qrank;
pub mod template;

use std::cmp::Ordering;

pub use index::{build_index, KbIndex, Neighbor};
pub use levenshtein::{levenshtein, normalized_levenshtein};
pub use prune::{prune_kb, PruneConfig, PruneOutcome, PruneReason};
pub use qrank::{load_qrank, QrankTable};
pub use template::{render_template, EntityCandidate, EntityTemplate};

/// Orders qids numerically when both look like `Q<digits>`, else as strings.
pub fn cmp_qid(a: &str, b: &str) -> Ordering {
    let num = |s: &str| s.strip_prefix('Q').and_then(|d| d.parse::<u64>().ok());
    match (num(a), num(b)) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}
