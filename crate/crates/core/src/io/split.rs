use crate::error::{Error, Result};
use crate::model::UncertainDatabase;

/// Size of one part of a split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitPart {
    Count(usize),
    /// Fraction of the whole database, rounded down.
    Fraction(f64),
}

/// Cuts `db` into an initial part and increments, in order. Whatever the parts
/// leave over is added to the last one.
pub fn split_increments(
    db: &UncertainDatabase,
    parts: &[SplitPart],
) -> Result<(UncertainDatabase, Vec<UncertainDatabase>)> {
    if parts.is_empty() {
        return Err(Error::InvalidSplit("no parts given".into()));
    }
    let n = db.len();
    let mut sizes = Vec::with_capacity(parts.len());
    for part in parts {
        sizes.push(match *part {
            SplitPart::Count(c) => c,
            SplitPart::Fraction(f) if (0.0..=1.0).contains(&f) => {
                (f * n as f64 + 1e-9).floor() as usize
            }
            SplitPart::Fraction(f) => {
                return Err(Error::InvalidSplit(format!("fraction {f} outside [0,1]")))
            }
        });
    }
    let total: usize = sizes.iter().sum();
    if total > n {
        return Err(Error::InvalidSplit(format!(
            "parts cover {total} sequences but the database has {n}"
        )));
    }
    *sizes.last_mut().unwrap() += n - total;
    let mut start = 0;
    let mut pieces = sizes.into_iter().map(|size| {
        let piece = UncertainDatabase::new(db.sequences()[start..start + size].to_vec());
        start += size;
        piece
    });
    let initial = pieces.next().unwrap();
    Ok((initial, pieces.collect()))
}
