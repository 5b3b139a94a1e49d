//! Exhaustive reference miner. It shares no code with the bound machinery:
//! the only pruning is that expected support never grows when a pattern is
//! extended, so a branch whose expected support times the heaviest weight
//! misses the threshold is dropped.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Item, Pattern, UncertainDatabase, UncertainSequence, WeightTable};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleParams {
    /// Longest pattern enumerated, counting items.
    pub max_len: usize,
    pub threshold: f64,
    /// Enumeration stops with an error past this many visited patterns.
    pub node_cap: u64,
}

impl OracleParams {
    pub fn new(threshold: f64) -> Self {
        OracleParams {
            max_len: 6,
            threshold,
            node_cap: 10_000_000,
        }
    }

    pub fn with_max_len(self, max_len: usize) -> Self {
        OracleParams { max_len, ..self }
    }
}

/// Best embedding probability by memoised recursion over (itemset, first
/// admissible event).
fn best_embedding(itemsets: &[Vec<Item>], seq: &UncertainSequence) -> f64 {
    let events = seq.events();
    let n = events.len();
    let m = itemsets.len();
    // memo[j][k]: best for itemsets j.. using events k..
    let mut memo = vec![vec![0.0f64; n + 1]; m + 1];
    memo[m].iter_mut().for_each(|v| *v = 1.0);
    for j in (0..m).rev() {
        for k in (0..n).rev() {
            let here = itemsets[j]
                .iter()
                .map(|&i| events[k].prob(i))
                .try_fold(1.0, |acc, p| p.map(|p| acc * p))
                .map_or(0.0, |p| p * memo[j + 1][k + 1]);
            memo[j][k] = memo[j][k + 1].max(here);
        }
    }
    memo[0][0]
}

fn expected_support(itemsets: &[Vec<Item>], db: &UncertainDatabase) -> f64 {
    db.iter().map(|s| best_embedding(itemsets, s)).sum()
}

struct Search<'a> {
    db: &'a UncertainDatabase,
    weights: &'a WeightTable,
    alphabet: Vec<Item>,
    max_weight: f64,
    params: OracleParams,
    visited: &'a AtomicU64,
}

impl Search<'_> {
    fn visit(
        &self,
        itemsets: &mut Vec<Vec<Item>>,
        weight_sum: f64,
        len: usize,
        out: &mut Vec<(Pattern, f64)>,
    ) -> Result<()> {
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.params.node_cap {
            return Err(Error::OracleCapExceeded(self.params.node_cap));
        }
        let exp_sup = expected_support(itemsets, self.db);
        if exp_sup * self.max_weight < self.params.threshold - crate::measures::TOLERANCE {
            return Ok(());
        }
        let wes = exp_sup * weight_sum / len as f64;
        if wes >= self.params.threshold - crate::measures::TOLERANCE {
            let pattern = crate::model::canonicalize(itemsets.clone())?;
            out.push((pattern, wes));
        }
        if len == self.params.max_len {
            return Ok(());
        }
        for &item in &self.alphabet {
            let w = self.weights.get(item)?;
            if itemsets
                .last()
                .and_then(|s| s.last())
                .is_some_and(|&last| item > last)
            {
                itemsets.last_mut().unwrap().push(item);
                self.visit(itemsets, weight_sum + w, len + 1, out)?;
                itemsets.last_mut().unwrap().pop();
            }
            itemsets.push(vec![item]);
            self.visit(itemsets, weight_sum + w, len + 1, out)?;
            itemsets.pop();
        }
        Ok(())
    }
}

/// Every pattern of at most `max_len` items whose weighted expected support
/// reaches the threshold, sorted by pattern.
pub fn oracle_mine(
    db: &UncertainDatabase,
    weights: &WeightTable,
    params: &OracleParams,
) -> Result<Vec<(Pattern, f64)>> {
    if params.max_len == 0 {
        return Err(Error::InvalidParams("max_len must be at least 1".into()));
    }
    weights.check_covers(db.alphabet())?;
    let alphabet: Vec<Item> = db.alphabet().iter().copied().collect();
    let mut max_weight = 0.0f64;
    for &item in &alphabet {
        max_weight = max_weight.max(weights.get(item)?);
    }
    let visited = AtomicU64::new(0);
    let search = Search {
        db,
        weights,
        alphabet,
        max_weight,
        params: *params,
        visited: &visited,
    };
    let parts: Vec<Result<Vec<(Pattern, f64)>>> = search
        .alphabet
        .par_iter()
        .map(|&item| {
            let mut out = Vec::new();
            search.visit(&mut vec![vec![item]], weights.get(item)?, 1, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for part in parts {
        all.extend(part?);
    }
    all.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(all)
}

/// Share of `truth` present in `reported`; 1 when `truth` is empty.
pub fn completeness(reported: &BTreeSet<Pattern>, truth: &BTreeSet<Pattern>) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    truth.intersection(reported).count() as f64 / truth.len() as f64
}
