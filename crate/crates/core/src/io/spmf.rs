use std::io::BufRead;

use crate::error::{Error, Result};
use crate::model::Item;

/// A certain sequence: itemsets without probabilities, items sorted.
pub type PreciseSequence = Vec<Vec<Item>>;

/// Parses SPMF sequence data. Lines starting with `#`, `%` or `@` are
/// metadata and skipped; empty itemsets are dropped.
pub fn parse_spmf(reader: impl BufRead) -> Result<Vec<PreciseSequence>> {
    let mut out = Vec::new();
    let mut seq: PreciseSequence = Vec::new();
    let mut itemset: Vec<Item> = Vec::new();
    let mut open_line = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with(['#', '%', '@']) {
            continue;
        }
        for token in body.split_whitespace() {
            open_line = lineno;
            match token {
                "-1" => {
                    if !itemset.is_empty() {
                        itemset.sort();
                        itemset.dedup();
                        seq.push(std::mem::take(&mut itemset));
                    }
                }
                "-2" => {
                    if !itemset.is_empty() {
                        return Err(Error::parse(lineno, "itemset not closed by -1 before -2"));
                    }
                    if !seq.is_empty() {
                        out.push(std::mem::take(&mut seq));
                    }
                    open_line = 0;
                }
                _ => {
                    let id: u64 = token
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("invalid item {token:?}")))?;
                    itemset.push(Item::new(&id.to_string())?);
                }
            }
        }
    }
    if open_line != 0 {
        return Err(Error::parse(open_line, "sequence not terminated by -2"));
    }
    Ok(out)
}

pub fn parse_spmf_str(text: &str) -> Result<Vec<PreciseSequence>> {
    parse_spmf(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_util::item;

    #[test]
    fn one_sequence() {
        let seqs = parse_spmf_str("1 3 -1 2 -1 -2").unwrap();
        assert_eq!(
            seqs,
            vec![vec![vec![item("1"), item("3")], vec![item("2")]]]
        );
    }

    #[test]
    fn empty_and_metadata() {
        assert!(parse_spmf_str("").unwrap().is_empty());
        assert_eq!(
            parse_spmf_str("@CONVERTED\n# x\n5 -1 -2\n4 -1 -2\n")
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn missing_terminator() {
        assert!(matches!(
            parse_spmf_str("1 -1 -2\n1 3 -1 2 -1"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_spmf_str("1 x -1 -2").is_err());
        assert!(parse_spmf_str("1 -2").is_err());
    }
}
