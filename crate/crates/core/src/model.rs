//! Core domain types: items, uncertain events and sequences, weight tables,
//! patterns and mining parameters.
//!
//! Items are interned process-wide. Each [`Item`] carries a dense integer id
//! for hashing and equality plus a `'static` view of its name, which defines
//! the total order used for canonical itemsets.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use once_cell::sync::Lazy;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static INTERNER: Lazy<RwLock<HashMap<&'static str, u32>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// An interned item token.
///
/// Equality and hashing use the id; ordering uses the string form.
#[derive(Clone, Copy)]
pub struct Item {
    id: u32,
    name: &'static str,
}

impl Item {
    pub fn new(name: &str) -> Result<Item> {
        if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(Error::InvalidItem(name.to_string()));
        }
        if let Some(item) = Self::lookup(name) {
            return Ok(item);
        }
        let mut table = INTERNER.write();
        if let Some((&name, &id)) = table.get_key_value(name) {
            return Ok(Item { id, name });
        }
        let id = table.len() as u32;
        let leaked: &'static str = Box::leak(name.to_string().into_boxed_str());
        table.insert(leaked, id);
        Ok(Item { id, name: leaked })
    }

    fn lookup(name: &str) -> Option<Item> {
        INTERNER
            .read()
            .get_key_value(name)
            .map(|(&name, &id)| Item { id, name })
    }

    pub fn id(self) -> u32 {
        self.id
    }

    pub fn as_str(self) -> &'static str {
        self.name
    }
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Item {}

impl Hash for Item {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.id == other.id {
            Ordering::Equal
        } else {
            self.name.cmp(other.name)
        }
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

impl FromStr for Item {
    type Err = Error;

    fn from_str(s: &str) -> Result<Item> {
        Item::new(s)
    }
}

impl Serialize for Item {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name)
    }
}

impl<'de> Deserialize<'de> for Item {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Item::new(&s).map_err(serde::de::Error::custom)
    }
}

fn valid_probability(p: f64) -> bool {
    p > 0.0 && p <= 1.0
}

/// One event of an uncertain sequence: items with existential probabilities,
/// kept sorted by item.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    entries: Vec<(Item, f64)>,
}

impl Event {
    pub fn new(entries: impl IntoIterator<Item = (Item, f64)>) -> Result<Event> {
        let mut entries: Vec<(Item, f64)> = entries.into_iter().collect();
        if entries.is_empty() {
            return Err(Error::InvalidEvent("event has no items".into()));
        }
        entries.sort_by_key(|e| e.0);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::InvalidEvent(format!(
                    "duplicate item {} in event",
                    pair[0].0
                )));
            }
        }
        if let Some((item, p)) = entries.iter().find(|(_, p)| !valid_probability(*p)) {
            return Err(Error::InvalidEvent(format!(
                "probability {p} for item {item} outside (0,1]"
            )));
        }
        Ok(Event { entries })
    }

    /// Builds an event from entries already known to be sorted, unique and in
    /// range (e.g. derived from another valid event).
    pub(crate) fn from_sorted_unchecked(entries: Vec<(Item, f64)>) -> Event {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        Event { entries }
    }

    pub fn prob(&self, item: Item) -> Option<f64> {
        self.entries
            .binary_search_by(|(i, _)| i.cmp(&item))
            .ok()
            .map(|idx| self.entries[idx].1)
    }

    pub fn contains(&self, item: Item) -> bool {
        self.prob(item).is_some()
    }

    /// True when every item of `itemset` occurs in this event.
    pub fn contains_all(&self, itemset: &[Item]) -> bool {
        itemset.iter().all(|&i| self.contains(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Item, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.entries.iter().map(|(i, _)| *i)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncertainSequence {
    pub sid: u64,
    events: Vec<Event>,
}

impl UncertainSequence {
    pub fn new(sid: u64, events: Vec<Event>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InvalidSequence {
                sid,
                reason: "sequence has no events".into(),
            });
        }
        Ok(UncertainSequence { sid, events })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.events.iter().flat_map(|e| e.items())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct UncertainDatabase {
    sequences: Vec<UncertainSequence>,
    alphabet: BTreeSet<Item>,
}

impl UncertainDatabase {
    pub fn new(sequences: Vec<UncertainSequence>) -> Self {
        let alphabet = sequences.iter().flat_map(|s| s.items()).collect();
        UncertainDatabase {
            sequences,
            alphabet,
        }
    }

    pub fn sequences(&self) -> &[UncertainSequence] {
        &self.sequences
    }

    pub fn alphabet(&self) -> &BTreeSet<Item> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, UncertainSequence> {
        self.sequences.iter()
    }

    /// Appends the sequences of `other`, keeping their ids.
    pub fn extend(&mut self, other: &UncertainDatabase) {
        self.sequences.extend(other.sequences.iter().cloned());
        self.alphabet.extend(other.alphabet.iter().copied());
    }

    /// Copy of this database with sequence ids reassigned from `first_sid`.
    pub fn renumbered(&self, first_sid: u64) -> UncertainDatabase {
        let sequences = self
            .sequences
            .iter()
            .enumerate()
            .map(|(i, s)| UncertainSequence {
                sid: first_sid + i as u64,
                events: s.events.clone(),
            })
            .collect();
        UncertainDatabase {
            sequences,
            alphabet: self.alphabet.clone(),
        }
    }

    pub fn max_sid(&self) -> u64 {
        self.sequences.iter().map(|s| s.sid).max().unwrap_or(0)
    }
}

impl<'a> IntoIterator for &'a UncertainDatabase {
    type Item = &'a UncertainSequence;
    type IntoIter = std::slice::Iter<'a, UncertainSequence>;

    fn into_iter(self) -> Self::IntoIter {
        self.sequences.iter()
    }
}

/// Per-item importance weights in (0,1]. Looking up an unknown item is an error.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightTable {
    weights: BTreeMap<Item, f64>,
}

impl WeightTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Item, f64)>) -> Result<Self> {
        let mut table = WeightTable::new();
        for (item, w) in pairs {
            table.insert(item, w)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, item: Item, weight: f64) -> Result<()> {
        if !valid_probability(weight) {
            return Err(Error::InvalidWeight { item, weight });
        }
        self.weights.insert(item, weight);
        Ok(())
    }

    pub fn get(&self, item: Item) -> Result<f64> {
        self.weights
            .get(&item)
            .copied()
            .ok_or(Error::MissingWeight(item))
    }

    pub fn contains(&self, item: Item) -> bool {
        self.weights.contains_key(&item)
    }

    /// Fails with the first item of `items` that has no weight.
    pub fn check_covers<'a>(&self, items: impl IntoIterator<Item = &'a Item>) -> Result<()> {
        match items.into_iter().find(|i| !self.contains(**i)) {
            Some(&missing) => Err(Error::MissingWeight(missing)),
            None => Ok(()),
        }
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.values().copied().fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Item, f64)> + '_ {
        self.weights.iter().map(|(i, w)| (*i, *w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// A sequential pattern: a non-empty list of non-empty itemsets, each sorted.
///
/// The derived ordering compares itemsets lexicographically, which is the
/// order used for all listings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    itemsets: Vec<Vec<Item>>,
}

/// Sorts every itemset and rejects empty itemsets or duplicate items.
pub fn canonicalize(raw: Vec<Vec<Item>>) -> Result<Pattern> {
    if raw.is_empty() {
        return Err(Error::MalformedPattern("pattern has no itemsets".into()));
    }
    let mut itemsets = raw;
    for set in itemsets.iter_mut() {
        if set.is_empty() {
            return Err(Error::MalformedPattern("empty itemset".into()));
        }
        set.sort();
        if let Some(w) = set.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::MalformedPattern(format!(
                "duplicate item {} within an itemset",
                w[0]
            )));
        }
    }
    Ok(Pattern { itemsets })
}

impl Pattern {
    pub fn single(item: Item) -> Pattern {
        Pattern {
            itemsets: vec![vec![item]],
        }
    }

    pub fn itemsets(&self) -> &[Vec<Item>] {
        &self.itemsets
    }

    /// Total item count across itemsets.
    pub fn len(&self) -> usize {
        self.itemsets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.itemsets.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.itemsets.iter().flatten().copied()
    }

    pub fn last_itemset(&self) -> &[Item] {
        self.itemsets.last().expect("pattern is never empty")
    }

    pub fn last_item(&self) -> Item {
        *self
            .last_itemset()
            .last()
            .expect("itemsets are never empty")
    }

    /// Appends `item` as a new itemset.
    pub fn s_extend(&self, item: Item) -> Pattern {
        let mut itemsets = self.itemsets.clone();
        itemsets.push(vec![item]);
        Pattern { itemsets }
    }

    /// Appends `item` to the last itemset; `None` unless `item` sorts after
    /// the current last item.
    pub fn i_extend(&self, item: Item) -> Option<Pattern> {
        if item <= self.last_item() {
            return None;
        }
        let mut itemsets = self.itemsets.clone();
        itemsets.last_mut().unwrap().push(item);
        Some(Pattern { itemsets })
    }

    /// Drops the last item; `None` for a single-item pattern.
    pub fn prefix_contraction(&self) -> Option<Pattern> {
        if self.len() <= 1 {
            return None;
        }
        let mut itemsets = self.itemsets.clone();
        let last = itemsets.last_mut().unwrap();
        last.pop();
        if last.is_empty() {
            itemsets.pop();
        }
        Some(Pattern { itemsets })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for set in &self.itemsets {
            f.write_str("(")?;
            for (i, item) in set.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(item.as_str())?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Parses the listing form `(a)(a c)`; item order inside parens is free.
impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Pattern> {
        let s = s.trim();
        let malformed = || Error::MalformedPattern(format!("cannot parse {s:?}"));
        let mut raw = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(malformed)?;
            let close = body.find(')').ok_or_else(malformed)?;
            let set = body[..close]
                .split([' ', ','])
                .filter(|t| !t.is_empty())
                .map(Item::new)
                .collect::<Result<Vec<_>>>()?;
            raw.push(set);
            rest = body[close + 1..].trim_start();
        }
        canonicalize(raw)
    }
}

/// How a pattern grows by one item: appended to the last itemset (`I`) or as
/// a new itemset (`S`). `I` sorts first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtKind {
    I,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Extension {
    pub kind: ExtKind,
    pub item: Item,
}

impl Extension {
    pub fn s(item: Item) -> Self {
        Extension {
            kind: ExtKind::S,
            item,
        }
    }

    pub fn i(item: Item) -> Self {
        Extension {
            kind: ExtKind::I,
            item,
        }
    }

    /// Applies the extension; `None` for an i-extension that would break
    /// canonical order.
    pub fn apply(self, pattern: &Pattern) -> Option<Pattern> {
        match self.kind {
            ExtKind::S => Some(pattern.s_extend(self.item)),
            ExtKind::I => pattern.i_extend(self.item),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiningParams {
    pub min_sup: f64,
    /// Buffer ratio for semi-frequent patterns.
    pub mu: f64,
    pub wgt_fct: f64,
    /// Local threshold factor used by incremental mining.
    pub gamma: f64,
}

impl MiningParams {
    pub fn new(min_sup: f64, mu: f64, wgt_fct: f64) -> Result<Self> {
        let p = MiningParams {
            min_sup,
            mu,
            wgt_fct,
            gamma: 2.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        if !in_unit(self.min_sup) {
            return Err(Error::InvalidParams(format!(
                "min_sup {} must be in (0,1]",
                self.min_sup
            )));
        }
        if !in_unit(self.mu) {
            return Err(Error::InvalidParams(format!(
                "mu {} must be in (0,1]",
                self.mu
            )));
        }
        if !(self.wgt_fct > 0.0 && self.wgt_fct.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "wgt_fct {} must be positive",
                self.wgt_fct
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "gamma {} must be positive",
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub wam: f64,
    pub min_wes: f64,
    /// `min_wes * mu`
    pub min_wes_semi: f64,
    /// Local threshold; only defined while processing an increment.
    pub lwes: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternClass {
    #[serde(rename = "FS")]
    Fs,
    #[serde(rename = "SFS")]
    Sfs,
    #[serde(rename = "PFS")]
    Pfs,
    #[serde(rename = "LFS")]
    Lfs,
}

impl PatternClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternClass::Fs => "FS",
            PatternClass::Sfs => "SFS",
            PatternClass::Pfs => "PFS",
            PatternClass::Lfs => "LFS",
        }
    }
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PatternClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FS" => Ok(PatternClass::Fs),
            "SFS" => Ok(PatternClass::Sfs),
            "PFS" => Ok(PatternClass::Pfs),
            "LFS" => Ok(PatternClass::Lfs),
            other => Err(Error::MalformedPattern(format!("unknown class {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifiedPattern {
    pub pattern: Pattern,
    pub wes: f64,
    pub class: PatternClass,
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    pub fn item(name: &str) -> Item {
        Item::new(name).unwrap()
    }

    pub fn pat(s: &str) -> Pattern {
        s.parse().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;
    use proptest::prelude::*;

    fn raw(sets: &[&[&str]]) -> Vec<Vec<Item>> {
        sets.iter()
            .map(|s| s.iter().map(|n| item(n)).collect())
            .collect()
    }

    #[test]
    fn canonicalize_sorts_itemsets() {
        assert_eq!(canonicalize(raw(&[&["c", "a"]])).unwrap(), pat("(a c)"));
        assert_eq!(canonicalize(raw(&[&["a"], &["b"]])).unwrap(), pat("(a)(b)"));
        assert_eq!(
            canonicalize(raw(&[&["b", "a"], &["d", "c"]])).unwrap(),
            pat("(a b)(c d)")
        );
    }

    #[test]
    fn canonicalize_rejects_duplicates_and_empty_sets() {
        assert!(matches!(
            canonicalize(raw(&[&["a", "a"]])),
            Err(Error::MalformedPattern(_))
        ));
        assert!(canonicalize(vec![vec![]]).is_err());
        assert!(canonicalize(vec![]).is_err());
    }

    #[test]
    fn item_order_is_lexicographic_not_intern_order() {
        let z = item("zz_order");
        let a = item("aa_order");
        assert!(a < z);
        assert!(item("B") < item("a"));
        assert!(item("a1") < item("a_"));
    }

    #[test]
    fn item_names_are_validated() {
        assert!(Item::new("").is_err());
        assert!(Item::new("a-b").is_err());
        assert!(Item::new("x y").is_err());
        assert!(Item::new("Ab_9").is_ok());
    }

    #[test]
    fn event_rejects_bad_probabilities() {
        assert!(Event::new([(item("a"), 0.0)]).is_err());
        assert!(Event::new([(item("a"), 1.2)]).is_err());
        assert!(Event::new([(item("a"), 0.5), (item("a"), 0.4)]).is_err());
        let e = Event::new([(item("c"), 0.6), (item("a"), 0.9)]).unwrap();
        assert_eq!(e.items().collect::<Vec<_>>(), vec![item("a"), item("c")]);
        assert_eq!(e.prob(item("c")), Some(0.6));
    }

    #[test]
    fn pattern_extensions() {
        let p = pat("(a)");
        assert_eq!(p.s_extend(item("a")), pat("(a)(a)"));
        assert_eq!(p.i_extend(item("c")).unwrap(), pat("(a c)"));
        assert!(p.i_extend(item("a")).is_none());
        assert_eq!(pat("(a)(b c)").len(), 3);
        assert_eq!(pat("(a)(b c)").prefix_contraction().unwrap(), pat("(a)(b)"));
        assert_eq!(pat("(a)(b)").prefix_contraction().unwrap(), pat("(a)"));
        assert!(pat("(a)").prefix_contraction().is_none());
    }

    #[test]
    fn pattern_display_round_trips() {
        let p = pat("(b a)(c)");
        assert_eq!(p.to_string(), "(a b)(c)");
        assert_eq!(p.to_string().parse::<Pattern>().unwrap(), p);
        assert!("(a".parse::<Pattern>().is_err());
        assert!("a".parse::<Pattern>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(MiningParams::new(0.2, 0.7, 1.0).is_ok());
        assert!(MiningParams::new(0.0, 0.7, 1.0).is_err());
        assert!(MiningParams::new(1.1, 0.7, 1.0).is_err());
        assert!(MiningParams::new(0.2, 0.0, 1.0).is_err());
        assert!(MiningParams::new(0.2, 0.7, -1.0).is_err());
        assert!(MiningParams::new(0.2, 0.7, 1.0)
            .unwrap()
            .with_gamma(0.0)
            .is_err());
    }

    #[test]
    fn weight_table_lookup_of_unknown_item_is_error() {
        let w = WeightTable::from_pairs([(item("a"), 0.8)]).unwrap();
        assert!(matches!(
            w.get(item("q_unknown")),
            Err(Error::MissingWeight(_))
        ));
        assert!(WeightTable::from_pairs([(item("a"), 0.0)]).is_err());
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(sets in prop::collection::vec(
            prop::collection::btree_set(0u8..8, 1..4), 1..5)) {
            let raw: Vec<Vec<Item>> = sets.iter()
                .map(|s| s.iter().rev().map(|i| item(&format!("p{i}"))).collect())
                .collect();
            let once = canonicalize(raw).unwrap();
            let twice = canonicalize(once.itemsets().to_vec()).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(once.to_string().parse::<Pattern>().unwrap(), once);
        }
    }
}
