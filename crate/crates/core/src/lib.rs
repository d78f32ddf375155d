//! Cross-document coreference and knowledgebase disambiguation of person
//! mentions, plus the contrastive pair mining and evaluation metrics used to
//! train and score the encoders.
//!
//! The pipeline: [`corpus`] loads tagged mentions and marks them, [`encode`]
//! turns marked contexts into vectors, [`coref`] clusters them per date,
//! [`kb`] builds the person knowledgebase and its flat inner-product index,
//! and [`disambig`] links cluster prototypes to knowledgebase entries.
//! [`mine`] builds training pairs from hyperlink records.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod disambig;
pub mod coref;
pub mod encode;
pub mod error;
mod hashing;
pub mod io;
pub mod kb;
pub mod mine;

pub use error::{Error, Result};
