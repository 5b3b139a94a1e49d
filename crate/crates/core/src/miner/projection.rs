use std::collections::{BTreeMap, HashMap};

use once_cell::sync::OnceCell;

use crate::error::Result;
use crate::model::{ExtKind, Extension, Item, WeightTable};
use crate::preprocess::PreprocessedDatabase;

/// A projection point: the sequence and the event where the earliest match of
/// the current prefix ends. `None` marks the empty prefix (whole sequence).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjEntry {
    pub seq: usize,
    pub end: Option<usize>,
}

/// Aggregates for one extension over a projection.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExtStat {
    /// Sum over projected sequences of the best admissible probability.
    pub pr_sum: f64,
    /// Best admissible probability over the whole projection.
    pub pr_max: f64,
    /// Number of projected sequences where the extension is admissible.
    pub support: usize,
}

/// Pseudo-projection of a preprocessed database on a prefix.
///
/// Positions admissible for an s-extension are the events strictly after the
/// recorded end. Positions admissible for an i-extension are the end event and
/// any later event that contains the prefix's whole last itemset; only items
/// sorting after that itemset's last item qualify there.
#[derive(Debug)]
pub struct Projection<'a> {
    db: &'a PreprocessedDatabase,
    last_itemset: Vec<Item>,
    entries: Vec<ProjEntry>,
    stats: OnceCell<BTreeMap<Extension, ExtStat>>,
}

impl<'a> Projection<'a> {
    pub fn root(db: &'a PreprocessedDatabase) -> Self {
        Projection {
            db,
            last_itemset: Vec::new(),
            entries: (0..db.len())
                .map(|seq| ProjEntry { seq, end: None })
                .collect(),
            stats: OnceCell::new(),
        }
    }

    pub fn entries(&self) -> &[ProjEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_itemset(&self) -> &[Item] {
        &self.last_itemset
    }

    /// Visits every admissible (extension, probability) pair of one entry.
    fn scan_entry(&self, entry: ProjEntry, mut visit: impl FnMut(Extension, f64)) {
        let events = self.db.sequences()[entry.seq].events();
        let Some(end) = entry.end else {
            for event in events {
                for (item, p) in event.iter() {
                    visit(Extension::s(item), p);
                }
            }
            return;
        };
        let last = *self.last_itemset.last().expect("non-root projection");
        for (k, event) in events.iter().enumerate().skip(end) {
            if k > end {
                for (item, p) in event.iter() {
                    visit(Extension::s(item), p);
                }
            }
            if k == end || event.contains_all(&self.last_itemset) {
                for (item, p) in event.iter().filter(|(i, _)| *i > last) {
                    visit(Extension::i(item), p);
                }
            }
        }
    }

    /// Per-extension aggregates, computed once per projection.
    pub fn stats(&self) -> &BTreeMap<Extension, ExtStat> {
        self.stats.get_or_init(|| {
            let mut stats: BTreeMap<Extension, ExtStat> = BTreeMap::new();
            let mut local: HashMap<Extension, f64> = HashMap::new();
            for &entry in &self.entries {
                local.clear();
                self.scan_entry(entry, |ext, p| {
                    let best = local.entry(ext).or_insert(p);
                    if p > *best {
                        *best = p;
                    }
                });
                for (&ext, &p) in &local {
                    let s = stats.entry(ext).or_default();
                    s.pr_sum += p;
                    s.pr_max = s.pr_max.max(p);
                    s.support += 1;
                }
            }
            stats
        })
    }

    pub fn extension(&self, ext: Extension) -> Option<ExtStat> {
        self.stats().get(&ext).copied()
    }

    /// Largest weight over every item admissible for some extension.
    pub fn max_item_weight(&self, weights: &WeightTable) -> Result<f64> {
        let mut best = 0.0f64;
        let mut last: Option<Item> = None;
        for ext in self.stats().keys() {
            if last == Some(ext.item) {
                continue;
            }
            last = Some(ext.item);
            best = best.max(weights.get(ext.item)?);
        }
        Ok(best)
    }

    /// Projection on the prefix grown by `ext`: per sequence, the earliest
    /// event where the grown prefix can end.
    pub fn project(&self, ext: Extension) -> Projection<'a> {
        let mut last_itemset = match ext.kind {
            ExtKind::S => Vec::with_capacity(1),
            ExtKind::I => self.last_itemset.clone(),
        };
        last_itemset.push(ext.item);
        let entries = self
            .entries
            .iter()
            .filter_map(|entry| {
                let events = self.db.sequences()[entry.seq].events();
                let found = match (ext.kind, entry.end) {
                    (ExtKind::S, None) => events.iter().position(|e| e.contains(ext.item)),
                    (ExtKind::S, Some(end)) => events
                        .iter()
                        .skip(end + 1)
                        .position(|e| e.contains(ext.item))
                        .map(|k| k + end + 1),
                    (ExtKind::I, None) => None,
                    (ExtKind::I, Some(end)) => events
                        .iter()
                        .skip(end)
                        .position(|e| e.contains_all(&last_itemset))
                        .map(|k| k + end),
                };
                found.map(|k| ProjEntry {
                    seq: entry.seq,
                    end: Some(k),
                })
            })
            .collect();
        Projection {
            db: self.db,
            last_itemset,
            entries,
            stats: OnceCell::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::test_util::item;
    use crate::preprocess::preprocess;

    #[test]
    fn root_stats_sum_per_sequence_maxima() {
        let pdb = preprocess(&fixtures::initial_db());
        let root = Projection::root(&pdb);
        let a = root.extension(Extension::s(item("a"))).unwrap();
        assert!((a.pr_sum - 2.8).abs() < 1e-12);
        assert_eq!(a.support, 6);
        assert_eq!(a.pr_max, 0.9);
        assert!(root.extension(Extension::i(item("a"))).is_none());
    }

    #[test]
    fn projection_on_a_records_first_occurrence() {
        let pdb = preprocess(&fixtures::initial_db());
        let proj = Projection::root(&pdb).project(Extension::s(item("a")));
        let ends: Vec<_> = proj
            .entries()
            .iter()
            .map(|e| (e.seq, e.end.unwrap()))
            .collect();
        assert_eq!(ends, vec![(0, 0), (1, 0), (2, 0), (3, 0), (4, 1), (5, 2)]);
        let aa = proj.extension(Extension::s(item("a"))).unwrap();
        assert!((aa.pr_sum - 2.5).abs() < 1e-12);
        // (a c) in seq 5 only co-occurs in a later event than the first a.
        let ac = proj.extension(Extension::i(item("c"))).unwrap();
        assert!((ac.pr_sum - 2.0).abs() < 1e-12);
        assert_eq!(ac.support, 4);
    }

    #[test]
    fn i_projection_may_move_past_first_match() {
        let pdb = preprocess(&fixtures::initial_db());
        let proj = Projection::root(&pdb)
            .project(Extension::s(item("a")))
            .project(Extension::i(item("c")));
        let ends: Vec<_> = proj
            .entries()
            .iter()
            .map(|e| (e.seq, e.end.unwrap()))
            .collect();
        assert_eq!(ends, vec![(0, 0), (1, 0), (3, 0), (4, 3)]);
        assert_eq!(proj.last_itemset(), &[item("a"), item("c")]);
    }

    #[test]
    fn max_item_weight_of_empty_projection_is_zero() {
        let pdb = preprocess(&fixtures::initial_db());
        let g = Projection::root(&pdb).project(Extension::s(item("g")));
        assert_eq!(g.len(), 1);
        assert_eq!(g.max_item_weight(&fixtures::weights()).unwrap(), 0.0);
    }
}
