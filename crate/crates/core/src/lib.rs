//! Weighted sequential pattern mining over uncertain sequence databases.
//!
//! The batch miner ([`miner::fuws`]) grows patterns over a preprocessed copy of
//! the database, pruning with tight weighted expected-support caps, then
//! verifies survivors exactly with a USeq-Trie pass. [`incremental`] keeps
//! frequent and semi-frequent patterns current as increments arrive.

pub mod error;
pub mod fixtures;
pub mod incremental;
pub mod io;
pub mod measures;
pub mod miner;
pub mod model;
pub mod oracle;
pub mod preprocess;
pub mod trie;

pub use error::{Error, Result};
pub use incremental::{IncrementReport, IncrementalState, LwesMode};
pub use miner::{fuws, fuws_with_thresholds, mine_with_threshold, Bound, MiningResult};
pub use model::{
    ClassifiedPattern, Event, Item, MiningParams, Pattern, PatternClass, Thresholds,
    UncertainDatabase, UncertainSequence, WeightTable,
};
pub use oracle::{completeness, oracle_mine, OracleParams};
pub use preprocess::{preprocess, PreprocessedDatabase};
pub use trie::USeqTrie;
