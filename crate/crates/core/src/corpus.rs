//! Mention corpus ingestion, mention marking and date partitioning.
//!
//! A corpus file holds one JSON object per line:
//!
//! ```text
//! {"mention_id":"m1","doc_id":"d1","date":"1963-11-22","surface":"Kennedy",
//!  "context":"Kennedy spoke.","span_start":0,"span_end":7,"gold_qid":"Q9696"}
//! ```
//!
//! Span offsets count Unicode scalar values, not bytes.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_jsonl;

/// Gold label for mentions of people absent from the knowledgebase.
pub const NOT_IN_KB: &str = "NOT_IN_KB";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub mention_id: String,
    pub doc_id: String,
    #[serde(default)]
    pub date: Option<NaiveDate>,
    pub surface: String,
    pub context: String,
    pub span_start: usize,
    pub span_end: usize,
    /// Knowledgebase id or [`NOT_IN_KB`]; evaluation corpora only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_qid: Option<String>,
    /// Gold identity used for clustering metrics. Needed to tell apart
    /// different out-of-knowledgebase people, who share the `NOT_IN_KB` qid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_entity: Option<String>,
}

impl MentionRecord {
    /// Byte range of the mention inside `context`, if the character span is in bounds.
    pub fn byte_span(&self) -> Option<Range<usize>> {
        if self.span_start > self.span_end {
            return None;
        }
        let start = char_to_byte(&self.context, self.span_start)?;
        let end = char_to_byte(&self.context, self.span_end)?;
        Some(start..end)
    }

    pub fn validate(&self) -> Result<()> {
        let span = self.byte_span().ok_or_else(|| {
            Error::Validation(format!(
                "mention {}: span {}..{} outside context of {} chars",
                self.mention_id,
                self.span_start,
                self.span_end,
                self.context.chars().count()
            ))
        })?;
        if span.is_empty() {
            return Err(Error::Validation(format!("mention {}: empty span", self.mention_id)));
        }
        if self.context[span.clone()] != self.surface {
            return Err(Error::Validation(format!(
                "mention {}: span text {:?} does not match surface {:?}",
                self.mention_id,
                &self.context[span],
                self.surface
            )));
        }
        Ok(())
    }

    /// Label used when scoring clusters: the gold entity if given, else the gold qid.
    pub fn gold_identity(&self) -> Option<&str> {
        self.gold_entity.as_deref().or(self.gold_qid.as_deref())
    }
}

pub(crate) fn char_to_byte(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (byte, _) in s.char_indices() {
        if count == char_idx {
            return Some(byte);
        }
        count += 1;
    }
    (count == char_idx).then_some(s.len())
}

/// Loads and validates a mention corpus, preserving file order.
pub fn load_mentions(path: &Path) -> Result<Vec<MentionRecord>> {
    let records: Vec<MentionRecord> = read_jsonl(path)?;
    let mut seen = HashSet::with_capacity(records.len());
    for r in &records {
        r.validate()?;
        if !seen.insert(r.mention_id.as_str()) {
            return Err(Error::Validation(format!("duplicate mention_id {}", r.mention_id)));
        }
    }
    Ok(records)
}

/// The strings inserted around a mention before encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Markers {
    pub open: String,
    pub close: String,
}

impl Default for Markers {
    fn default() -> Self {
        Markers {
            open: "[M] ".to_string(),
            close: " [\\M]".to_string(),
        }
    }
}

impl Markers {
    fn word_count(&self) -> usize {
        word_count(&self.open) + word_count(&self.close)
    }
}

/// A context with the mention wrapped in markers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedContext {
    pub mention_id: String,
    pub text: String,
    /// Byte offset of the opening marker in `text`.
    pub marked_start: usize,
    /// Byte offset just past the closing marker.
    pub marked_end: usize,
    /// Set when the mention alone did not fit the token window and was cut.
    pub mention_truncated: bool,
}

impl MarkedContext {
    pub fn marked_span(&self) -> &str {
        &self.text[self.marked_start..self.marked_end]
    }

    pub fn token_count(&self) -> usize {
        word_count(&self.text)
    }
}

pub fn mark_mention(m: &MentionRecord, markers: &Markers) -> Result<MarkedContext> {
    m.validate()?;
    let span = m.byte_span().expect("validated span");
    Ok(mark_span(&m.mention_id, &m.context, span, markers))
}

/// Inserts markers around `span` (a byte range of `context`).
pub fn mark_span(id: &str, context: &str, span: Range<usize>, markers: &Markers) -> MarkedContext {
    let mut text = String::with_capacity(context.len() + markers.open.len() + markers.close.len());
    text.push_str(&context[..span.start]);
    let marked_start = text.len();
    text.push_str(&markers.open);
    text.push_str(&context[span.clone()]);
    text.push_str(&markers.close);
    let marked_end = text.len();
    text.push_str(&context[span.end..]);
    MarkedContext {
        mention_id: id.to_string(),
        text,
        marked_start,
        marked_end,
        mention_truncated: false,
    }
}

/// Removes the marker pair, recovering the (possibly truncated) context.
pub fn strip_markers(mc: &MarkedContext, markers: &Markers) -> String {
    let inner_start = mc.marked_start + markers.open.len();
    let inner_end = mc.marked_end - markers.close.len();
    let mut out = String::with_capacity(mc.text.len());
    out.push_str(&mc.text[..mc.marked_start]);
    out.push_str(&mc.text[inner_start..inner_end]);
    out.push_str(&mc.text[mc.marked_end..]);
    out
}

/// Whitespace-word token proxy.
pub fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

fn word_ranges(s: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(st)) => {
                out.push(st..i);
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push(st..s.len());
    }
    out
}

/// Cuts a marked context down to at most `max_tokens` whitespace words,
/// dropping words from both ends so the mention stays centred. Words freed on
/// a short side go to the other side.
pub fn truncate_to_window(mc: &MarkedContext, max_tokens: usize, markers: &Markers) -> Result<MarkedContext> {
    let marker_words = markers.word_count();
    if max_tokens < marker_words + 1 {
        return Err(Error::Precondition(format!(
            "window of {max_tokens} tokens cannot hold the markers and a mention"
        )));
    }
    if mc.token_count() <= max_tokens {
        return Ok(mc.clone());
    }

    let left = &mc.text[..mc.marked_start];
    let middle = &mc.text[mc.marked_start..mc.marked_end];
    let right = &mc.text[mc.marked_end..];
    let middle_words = word_count(middle);

    if middle_words > max_tokens {
        let inner = &middle[markers.open.len()..middle.len() - markers.close.len()];
        let keep = max_tokens - marker_words;
        let inner_words = word_ranges(inner);
        let cut = inner_words.get(keep.wrapping_sub(1)).map_or(0, |r| r.end);
        let mut text = String::new();
        text.push_str(&markers.open);
        text.push_str(&inner[..cut]);
        text.push_str(&markers.close);
        let marked_end = text.len();
        return Ok(MarkedContext {
            mention_id: mc.mention_id.clone(),
            text,
            marked_start: 0,
            marked_end,
            mention_truncated: true,
        });
    }

    let budget = max_tokens - middle_words;
    let left_words = word_ranges(left);
    let right_words = word_ranges(right);
    let (n_left, n_right) = (left_words.len(), right_words.len());
    let mut keep_left = n_left.min(budget / 2);
    let keep_right = n_right.min(budget - keep_left);
    keep_left = n_left.min(budget - keep_right);

    let left_kept = if keep_left == 0 {
        ""
    } else {
        &left[left_words[n_left - keep_left].start..]
    };
    let right_kept = if keep_right == 0 {
        ""
    } else {
        &right[..right_words[keep_right - 1].end]
    };

    let mut text = String::with_capacity(left_kept.len() + middle.len() + right_kept.len());
    text.push_str(left_kept);
    let marked_start = text.len();
    text.push_str(middle);
    let marked_end = text.len();
    text.push_str(right_kept);
    Ok(MarkedContext {
        mention_id: mc.mention_id.clone(),
        text,
        marked_start,
        marked_end,
        mention_truncated: mc.mention_truncated,
    })
}

/// Partition key: a calendar day (or the first day of a wider bucket), or
/// the bucket of mentions without a date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DateKey {
    Undated,
    Day(NaiveDate),
}

impl fmt::Display for DateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DateKey::Undated => f.write_str("undated"),
            DateKey::Day(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl std::str::FromStr for DateKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "undated" {
            return Ok(DateKey::Undated);
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map(DateKey::Day)
            .map_err(|e| Error::Validation(format!("bad date key {s:?}: {e}")))
    }
}

/// Groups mentions by calendar day, keeping input order within each day.
pub fn partition_by_date(ms: &[MentionRecord]) -> BTreeMap<DateKey, Vec<&MentionRecord>> {
    partition_by_window(ms, 1)
}

/// Like [`partition_by_date`] but with buckets of `days` consecutive days,
/// aligned to 0001-01-01. Each bucket is keyed by its first day.
pub fn partition_by_window(ms: &[MentionRecord], days: u32) -> BTreeMap<DateKey, Vec<&MentionRecord>> {
    let days = i64::from(days.max(1));
    let mut out: BTreeMap<DateKey, Vec<&MentionRecord>> = BTreeMap::new();
    for m in ms {
        out.entry(bucket_key(m.date, days)).or_default().push(m);
    }
    out
}

pub fn bucket_key(date: Option<NaiveDate>, days: i64) -> DateKey {
    match date {
        None => DateKey::Undated,
        Some(d) if days <= 1 => DateKey::Day(d),
        Some(d) => {
            let n = i64::from(d.num_days_from_ce());
            let start = (n - 1).div_euclid(days) * days + 1;
            DateKey::Day(NaiveDate::from_num_days_from_ce_opt(start as i32).unwrap_or(d))
        }
    }
}

/// Parses ISO-8601 calendar dates at day, month or year precision
/// ("1917-05-29", "1917-05", "1917"). Coarser dates map to their first day.
pub fn parse_loose_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(d);
    }
    let mut parts = s.splitn(2, '-');
    let (year, month) = if let Some(rest) = s.strip_prefix('-') {
        let mut p = rest.splitn(2, '-');
        (p.next()?.parse::<i32>().ok().map(|y| -y), p.next())
    } else {
        (parts.next()?.parse::<i32>().ok(), parts.next())
    };
    let month = match month {
        Some(m) => m.parse::<u32>().ok()?,
        None => 1,
    };
    NaiveDate::from_ymd_opt(year?, month, 1)
}
