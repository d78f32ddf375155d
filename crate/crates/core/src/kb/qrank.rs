//! Popularity ranks from the two-column `qid,count` table.

use std::collections::HashMap;
use std::path::Path;

use tracing::warn;

use crate::error::{Error, Result};
use crate::io::open_lines;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QrankTable {
    ranks: HashMap<String, u64>,
    /// Rows that could not be parsed.
    pub skipped: usize,
}

impl QrankTable {
    pub fn from_pairs<I: IntoIterator<Item = (String, u64)>>(pairs: I) -> Self {
        let mut t = QrankTable::default();
        for (q, r) in pairs {
            t.insert(q, r);
        }
        t
    }

    /// Duplicate qids keep the larger value.
    pub fn insert(&mut self, qid: String, rank: u64) {
        let e = self.ranks.entry(qid).or_insert(rank);
        *e = (*e).max(rank);
    }

    /// Rank of `qid`, 0 when unknown.
    pub fn rank(&self, qid: &str) -> u64 {
        self.ranks.get(qid).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

fn parse_row(line: &str) -> Option<(String, u64)> {
    let (qid, count) = line.split_once(',')?;
    let qid = qid.trim();
    let count = count.trim().parse::<u64>().ok()?;
    (!qid.is_empty() && !qid.contains(',')).then(|| (qid.to_string(), count))
}

/// Loads a qrank table. A leading header row (non-numeric second column)
/// is ignored; other malformed rows are skipped and counted.
pub fn load_qrank(path: &Path) -> Result<QrankTable> {
    let mut table = QrankTable::default();
    for (line_no, line) in open_lines(path)? {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match parse_row(line) {
            Some((q, r)) => table.insert(q, r),
            None if line_no == 1 => {}
            None => table.skipped += 1,
        }
    }
    if table.skipped > 0 {
        warn!(path = %path.display(), skipped = table.skipped, "malformed qrank rows skipped");
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> QrankTable {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("qrank.csv");
        std::fs::write(&p, text).unwrap();
        load_qrank(&p).unwrap()
    }

    #[test]
    fn parses_rows() {
        let t = load("Q9696,1000000\n");
        assert_eq!(t.rank("Q9696"), 1_000_000);
        assert_eq!(t.rank("Q1"), 0);
        assert!(load("").is_empty());
    }

    #[test]
    fn header_duplicates_and_garbage() {
        let t = load("Entity,QRank\nQ1,5\nQ1,9\nQ1,2\nbroken\nQ2,x\nQ3,7\n");
        assert_eq!(t.rank("Q1"), 9);
        assert_eq!(t.rank("Q3"), 7);
        assert_eq!(t.skipped, 2);
        assert_eq!(t.len(), 2);
    }
}
