//! Database preparation for bound-driven candidate generation, plus the
//! database statistics (item frequencies, WAM, thresholds).

use std::collections::{BTreeMap, HashMap};
use std::ops::Deref;

use crate::error::Result;
use crate::model::{
    Event, Item, MiningParams, Thresholds, UncertainDatabase, UncertainSequence, WeightTable,
};

/// A database whose probabilities were replaced by per-item suffix maxima.
#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessedDatabase(UncertainDatabase);

impl PreprocessedDatabase {
    pub fn into_inner(self) -> UncertainDatabase {
        self.0
    }
}

impl Deref for PreprocessedDatabase {
    type Target = UncertainDatabase;

    fn deref(&self) -> &UncertainDatabase {
        &self.0
    }
}

/// Replaces the probability of every item occurrence with the maximum of its
/// probabilities at that occurrence and all later occurrences in the same
/// sequence. Event structure is unchanged.
pub fn preprocess(db: &UncertainDatabase) -> PreprocessedDatabase {
    let sequences = db.iter().map(preprocess_sequence).collect();
    PreprocessedDatabase(UncertainDatabase::new(sequences))
}

fn preprocess_sequence(seq: &UncertainSequence) -> UncertainSequence {
    let mut running: HashMap<Item, f64> = HashMap::new();
    let mut events: Vec<Event> = Vec::with_capacity(seq.len());
    for event in seq.events().iter().rev() {
        let entries = event
            .iter()
            .map(|(item, p)| {
                let best = running.entry(item).or_insert(p);
                *best = best.max(p);
                (item, *best)
            })
            .collect();
        events.push(Event::from_sorted_unchecked(entries));
    }
    events.reverse();
    UncertainSequence::new(seq.sid, events).expect("source sequence is non-empty")
}

/// Occurrence counts per item, over every (event, item) incidence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrequencyTable {
    counts: BTreeMap<Item, u64>,
}

impl FrequencyTable {
    pub fn get(&self, item: Item) -> u64 {
        self.counts.get(&item).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Item, u64)> + '_ {
        self.counts.iter().map(|(i, c)| (*i, *c))
    }

    pub fn merge(&mut self, other: &FrequencyTable) {
        for (item, c) in other.iter() {
            *self.counts.entry(item).or_insert(0) += c;
        }
    }
}

pub fn frequencies(db: &UncertainDatabase) -> FrequencyTable {
    let mut counts = BTreeMap::new();
    for item in db.iter().flat_map(|s| s.items()) {
        *counts.entry(item).or_insert(0) += 1;
    }
    FrequencyTable { counts }
}

/// Frequency-weighted arithmetic mean of item weights. An empty table yields
/// 0, which drives every derived threshold to 0.
pub fn wam(freq: &FrequencyTable, weights: &WeightTable) -> Result<f64> {
    let mut weighted = 0.0;
    let mut total = 0u64;
    for (item, count) in freq.iter() {
        weighted += weights.get(item)? * count as f64;
        total += count;
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(weighted / total as f64)
}

pub fn thresholds(params: &MiningParams, db_size: usize, wam: f64) -> Thresholds {
    let min_wes = params.min_sup * db_size as f64 * wam * params.wgt_fct;
    Thresholds {
        wam,
        min_wes,
        min_wes_semi: min_wes * params.mu,
        lwes: None,
    }
}
