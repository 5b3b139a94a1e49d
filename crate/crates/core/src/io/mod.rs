//! File formats and the synthetic data generator.
//!
//! * USF: one uncertain sequence per line, `[id|](item:prob,...)(...)...`.
//! * Weights: `item weight` per line.
//! * SPMF: integer items, `-1` closes an itemset, `-2` closes a sequence.
//! * Pattern listings: TSV or JSON lines.

mod generate;
mod listing;
mod split;
mod spmf;
mod usf;
mod weights;

pub use generate::{generate, synthetic, GenConfig, Rng};
pub use listing::{parse_patterns, write_patterns, ListingFormat};
pub use split::{split_increments, SplitPart};
pub use spmf::{parse_spmf, parse_spmf_str, PreciseSequence};
pub use usf::{parse_usf, parse_usf_str, write_usf, write_usf_string};
pub use weights::{parse_weights, parse_weights_str, write_weights, write_weights_string};

/// Strips a `#` comment and surrounding whitespace.
fn content(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}
