//! Keeping frequent patterns current as increments arrive.
//!
//! `uwsinc` only refreshes the values of tracked frequent and semi-frequent
//! patterns. `uwsinc_plus` additionally mines each increment locally and keeps
//! a third tier of promising patterns that may become frequent later.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::meets;
use crate::miner::{fuws, mine_with_threshold, Bound};
use crate::model::{
    ClassifiedPattern, MiningParams, Pattern, PatternClass, Thresholds, UncertainDatabase,
    WeightTable,
};
use crate::preprocess::{frequencies, thresholds, wam, FrequencyTable};
use crate::trie::USeqTrie;

/// Which WAM enters the local threshold of an increment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum LwesMode {
    /// WAM of the increment alone.
    #[default]
    DeltaWam,
    /// WAM of everything seen so far, increment included.
    CumulativeWam,
    /// A fixed local threshold.
    Explicit(f64),
}

impl std::str::FromStr for LwesMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" => Ok(LwesMode::DeltaWam),
            "cumulative" => Ok(LwesMode::CumulativeWam),
            other => match other.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(LwesMode::Explicit(v)),
                _ => Err(Error::InvalidParams(format!(
                    "LWES mode {other:?} is not delta, cumulative or a positive number"
                ))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    #[serde(rename = "uwsinc")]
    UwsInc,
    #[serde(rename = "uwsinc+")]
    UwsIncPlus,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uwsinc" => Ok(Algorithm::UwsInc),
            "uwsinc+" => Ok(Algorithm::UwsIncPlus),
            other => Err(Error::InvalidParams(format!(
                "unknown algorithm {other:?} (expected uwsinc or uwsinc+)"
            ))),
        }
    }
}

/// State after one increment (index 0 is the initial mining).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IncrementReport {
    pub index: usize,
    pub db_size: usize,
    pub thresholds: Thresholds,
    /// WAM of the increment alone, when one was processed.
    pub wam_delta: Option<f64>,
    #[serde(skip)]
    pub fs: Vec<ClassifiedPattern>,
    #[serde(skip)]
    pub sfs: Vec<ClassifiedPattern>,
    #[serde(skip)]
    pub pfs: Vec<ClassifiedPattern>,
    #[serde(skip)]
    pub lfs: Vec<ClassifiedPattern>,
    pub promotions: usize,
    pub demotions: usize,
    pub deletions: usize,
    pub insertions: usize,
}

impl IncrementReport {
    /// FS, SFS, PFS and LFS together.
    pub fn listing(&self) -> Vec<ClassifiedPattern> {
        [&self.fs, &self.sfs, &self.pfs, &self.lfs]
            .into_iter()
            .flatten()
            .cloned()
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct IncrementalState {
    params: MiningParams,
    weights: WeightTable,
    lwes_mode: LwesMode,
    db_size: usize,
    freq: FrequencyTable,
    thresholds: Thresholds,
    seq_trie: USeqTrie,
    pfs_trie: USeqTrie,
    increments: usize,
}

fn classified(pattern: Pattern, wes: f64, class: PatternClass) -> ClassifiedPattern {
    ClassifiedPattern {
        pattern,
        wes,
        class,
    }
}

/// Mines `db` and starts tracking its frequent and semi-frequent patterns.
pub fn initial_mining(
    db: &UncertainDatabase,
    weights: &WeightTable,
    params: &MiningParams,
) -> Result<IncrementalState> {
    let mined = fuws(db, weights, params, Bound::Cap)?;
    let mut seq_trie = USeqTrie::new();
    for c in mined.fs.iter().chain(&mined.sfs) {
        seq_trie.insert(&c.pattern, c.wes);
    }
    Ok(IncrementalState {
        params: *params,
        weights: weights.clone(),
        lwes_mode: LwesMode::default(),
        db_size: db.len(),
        freq: frequencies(db),
        thresholds: mined.thresholds,
        seq_trie,
        pfs_trie: USeqTrie::new(),
        increments: 0,
    })
}

impl IncrementalState {
    pub fn with_lwes_mode(mut self, mode: LwesMode) -> Self {
        self.lwes_mode = mode;
        self
    }

    pub fn params(&self) -> &MiningParams {
        &self.params
    }

    pub fn db_size(&self) -> usize {
        self.db_size
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    /// Tracked frequent and semi-frequent patterns with their values.
    pub fn seq_patterns(&self) -> Vec<(Pattern, f64)> {
        self.seq_trie.enumerate()
    }

    pub fn pfs_patterns(&self) -> Vec<(Pattern, f64)> {
        self.pfs_trie.enumerate()
    }

    /// Tracked value of `pattern` in either tier.
    pub fn tracked_wes(&self, pattern: &Pattern) -> Option<f64> {
        self.seq_trie
            .get(pattern)
            .or_else(|| self.pfs_trie.get(pattern))
    }

    fn class_of(&self, wes: f64) -> PatternClass {
        if meets(wes, self.thresholds.min_wes) {
            PatternClass::Fs
        } else {
            PatternClass::Sfs
        }
    }

    fn snapshot(&self) -> BTreeMap<Pattern, PatternClass> {
        let mut classes: BTreeMap<_, _> = self
            .seq_trie
            .enumerate()
            .into_iter()
            .map(|(p, w)| (p, self.class_of(w)))
            .collect();
        classes.extend(
            self.pfs_trie
                .enumerate()
                .into_iter()
                .map(|(p, _)| (p, PatternClass::Pfs)),
        );
        classes
    }

    /// Report of the current state, without local patterns.
    pub fn report(&self) -> IncrementReport {
        let mut report = IncrementReport {
            index: self.increments,
            db_size: self.db_size,
            thresholds: self.thresholds,
            wam_delta: None,
            fs: Vec::new(),
            sfs: Vec::new(),
            pfs: Vec::new(),
            lfs: Vec::new(),
            promotions: 0,
            demotions: 0,
            deletions: 0,
            insertions: 0,
        };
        for (p, w) in self.seq_trie.enumerate() {
            match self.class_of(w) {
                PatternClass::Fs => report.fs.push(classified(p, w, PatternClass::Fs)),
                _ => report.sfs.push(classified(p, w, PatternClass::Sfs)),
            }
        }
        report.pfs = self
            .pfs_trie
            .enumerate()
            .into_iter()
            .map(|(p, w)| classified(p, w, PatternClass::Pfs))
            .collect();
        for list in [&mut report.fs, &mut report.sfs, &mut report.pfs] {
            list.sort_by(|a, b| a.pattern.cmp(&b.pattern));
        }
        report
    }

    fn finish(
        &self,
        before: BTreeMap<Pattern, PatternClass>,
        wam_delta: Option<f64>,
        lfs: Vec<ClassifiedPattern>,
    ) -> IncrementReport {
        let after = self.snapshot();
        let mut report = self.report();
        report.wam_delta = wam_delta;
        report.lfs = lfs;
        for (pattern, old) in &before {
            match after.get(pattern) {
                None => report.deletions += 1,
                Some(new) if new < old => report.promotions += 1,
                Some(new) if new > old => report.demotions += 1,
                Some(_) => {}
            }
        }
        report.insertions = after.keys().filter(|p| !before.contains_key(*p)).count();
        report
    }

    /// Folds the increment into the cumulative statistics; returns the
    /// increment's own frequency table.
    fn absorb(&mut self, delta: &UncertainDatabase) -> Result<FrequencyTable> {
        self.weights.check_covers(delta.alphabet())?;
        let delta_freq = frequencies(delta);
        self.db_size += delta.len();
        self.freq.merge(&delta_freq);
        let wam = wam(&self.freq, &self.weights)?;
        self.thresholds = thresholds(&self.params, self.db_size, wam);
        self.increments += 1;
        Ok(delta_freq)
    }

    /// Refreshes tracked patterns only; nothing new is ever discovered.
    pub fn uwsinc(&mut self, delta: &UncertainDatabase) -> Result<IncrementReport> {
        let before = self.snapshot();
        self.absorb(delta)?;
        self.seq_trie.sup_calc(delta.sequences(), &self.weights)?;
        for (pattern, wes) in self.seq_trie.enumerate() {
            if !meets(wes, self.thresholds.min_wes_semi) {
                self.seq_trie.remove(&pattern);
            }
        }
        Ok(self.finish(before, None, Vec::new()))
    }

    fn local_threshold(&self, delta_len: usize, wam_delta: f64) -> f64 {
        let p = &self.params;
        let wam = match self.lwes_mode {
            LwesMode::DeltaWam => wam_delta,
            LwesMode::CumulativeWam => self.thresholds.wam,
            LwesMode::Explicit(v) => return v,
        };
        p.gamma * p.min_sup * p.mu * delta_len as f64 * wam * p.wgt_fct
    }

    /// Refreshes tracked patterns, mines the increment locally and maintains
    /// the promising tier.
    pub fn uwsinc_plus(&mut self, delta: &UncertainDatabase) -> Result<IncrementReport> {
        let before = self.snapshot();
        let delta_freq = self.absorb(delta)?;
        let wam_delta = wam(&delta_freq, &self.weights)?;
        let lwes = self.local_threshold(delta.len(), wam_delta);
        self.thresholds.lwes = Some(lwes);
        let semi = self.thresholds.min_wes_semi;

        let weights = &self.weights;
        let seq_trie = &mut self.seq_trie;
        let pfs_trie = &mut self.pfs_trie;
        let (lfs, (seq_ok, pfs_ok)) = rayon::join(
            || mine_with_threshold(delta, weights, lwes),
            || {
                rayon::join(
                    || seq_trie.sup_calc(delta.sequences(), weights),
                    || pfs_trie.sup_calc(delta.sequences(), weights),
                )
            },
        );
        let lfs = lfs?;
        seq_ok?;
        pfs_ok?;

        for (pattern, wes) in self.seq_trie.enumerate() {
            if !meets(wes, semi) {
                self.seq_trie.remove(&pattern);
                if meets(wes, lwes) {
                    self.pfs_trie.insert(&pattern, wes);
                }
            }
        }
        for (pattern, wes) in self.pfs_trie.enumerate() {
            if meets(wes, semi) {
                self.pfs_trie.remove(&pattern);
                self.seq_trie.insert(&pattern, wes);
            } else if !meets(wes, lwes) {
                self.pfs_trie.remove(&pattern);
            }
        }
        for (pattern, wes) in &lfs {
            if self.tracked_wes(pattern).is_some() {
                continue;
            }
            if meets(*wes, semi) {
                self.seq_trie.insert(pattern, *wes);
            } else if meets(*wes, lwes) {
                self.pfs_trie.insert(pattern, *wes);
            }
        }

        let lfs = lfs
            .into_iter()
            .map(|(p, w)| classified(p, w, PatternClass::Lfs))
            .collect();
        Ok(self.finish(before, Some(wam_delta), lfs))
    }

    pub fn apply(
        &mut self,
        algorithm: Algorithm,
        delta: &UncertainDatabase,
    ) -> Result<IncrementReport> {
        match algorithm {
            Algorithm::UwsInc => self.uwsinc(delta),
            Algorithm::UwsIncPlus => self.uwsinc_plus(delta),
        }
    }
}

/// Mines `initial`, then applies every delta in order. Returns the initial
/// report followed by one report per delta. Deltas are renumbered so sequence
/// ids stay unique across the replay.
pub fn replay(
    initial: &UncertainDatabase,
    deltas: &[UncertainDatabase],
    weights: &WeightTable,
    params: &MiningParams,
    algorithm: Algorithm,
    lwes_mode: LwesMode,
) -> Result<Vec<IncrementReport>> {
    let mut state = initial_mining(initial, weights, params)?.with_lwes_mode(lwes_mode);
    let mut reports = vec![state.report()];
    let mut next_sid = initial.max_sid() + 1;
    for delta in deltas {
        let delta = delta.renumbered(next_sid);
        next_sid += delta.len() as u64;
        reports.push(state.apply(algorithm, &delta)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn params() -> MiningParams {
        MiningParams::new(0.2, 0.7, 1.0).unwrap()
    }

    fn rows(list: &[ClassifiedPattern]) -> Vec<(String, f64)> {
        list.iter()
            .map(|c| (c.pattern.to_string(), c.wes))
            .collect()
    }

    fn check(list: &[ClassifiedPattern], want: &[(&str, f64)]) {
        let mut got = rows(list);
        got.sort_by(|a, b| a.0.cmp(&b.0));
        let mut want: Vec<_> = want.iter().map(|(p, w)| (p.to_string(), *w)).collect();
        want.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for ((gp, gw), (wp, ww)) in got.iter().zip(&want) {
            assert_eq!(gp, wp);
            assert!((gw - ww).abs() <= 0.01, "{gp}: {gw} vs {ww}");
        }
    }

    #[test]
    fn initial_state() {
        let state =
            initial_mining(&fixtures::initial_db(), &fixtures::weights(), &params()).unwrap();
        let r = state.report();
        check(&r.fs, &[("(a)", 2.24), ("(b)", 1.40), ("(c)", 1.80)]);
        check(&r.sfs, &[("(a)(a)", 1.03), ("(a c)", 1.02)]);
        assert!(r.pfs.is_empty());
    }

    #[test]
    fn mu_one_tracks_frequent_only() {
        let p = MiningParams::new(0.2, 1.0, 1.0).unwrap();
        let state = initial_mining(&fixtures::initial_db(), &fixtures::weights(), &p).unwrap();
        assert_eq!(state.seq_patterns().len(), 3);
    }

    #[test]
    fn empty_database() {
        let state = initial_mining(
            &UncertainDatabase::default(),
            &fixtures::weights(),
            &params(),
        )
        .unwrap();
        assert_eq!(state.db_size(), 0);
        assert!(state.seq_patterns().is_empty());
    }

    #[test]
    fn uwsinc_replay() {
        let mut state =
            initial_mining(&fixtures::initial_db(), &fixtures::weights(), &params()).unwrap();
        let r1 = state.uwsinc(&fixtures::delta1()).unwrap();
        assert!((r1.thresholds.min_wes - 1.74).abs() <= 0.01);
        check(
            &r1.fs,
            &[
                ("(a)", 4.56),
                ("(a)(a)", 1.90),
                ("(a c)", 1.99),
                ("(c)", 4.50),
            ],
        );
        check(&r1.sfs, &[("(b)", 1.40)]);
        let r2 = state.uwsinc(&fixtures::delta2()).unwrap();
        check(&r2.fs, &[("(a)", 6.16), ("(a)(a)", 2.26), ("(c)", 5.76)]);
        check(&r2.sfs, &[("(a c)", 2.05), ("(b)", 2.20)]);
    }

    #[test]
    fn uwsinc_empty_delta_changes_nothing() {
        let mut state =
            initial_mining(&fixtures::initial_db(), &fixtures::weights(), &params()).unwrap();
        let before = state.report();
        let after = state.uwsinc(&UncertainDatabase::default()).unwrap();
        assert_eq!(before.thresholds, after.thresholds);
        assert_eq!(before.fs, after.fs);
        assert_eq!(before.sfs, after.sfs);
    }

    #[test]
    fn uwsinc_plus_replay() {
        let mut state =
            initial_mining(&fixtures::initial_db(), &fixtures::weights(), &params()).unwrap();
        let r1 = state.uwsinc_plus(&fixtures::delta1()).unwrap();
        assert!((r1.thresholds.lwes.unwrap() - 0.96).abs() <= 0.01);
        check(
            &r1.fs,
            &[
                ("(a)", 4.56),
                ("(a)(a)", 1.90),
                ("(a c)", 1.99),
                ("(c)", 4.50),
                ("(c)(a)", 1.83),
                ("(f)", 1.98),
            ],
        );
        check(
            &r1.sfs,
            &[
                ("(b)", 1.40),
                ("(c)(d)", 1.23),
                ("(c)(f)", 1.25),
                ("(d)", 1.53),
            ],
        );
        check(&r1.pfs, &[("(a)(f)", 0.99), ("(f)(c)", 0.96)]);
        let r2 = state.uwsinc_plus(&fixtures::delta2()).unwrap();
        check(
            &r2.fs,
            &[
                ("(a)", 6.16),
                ("(a)(a)", 2.26),
                ("(c)", 5.76),
                ("(c)(a)", 2.82),
                ("(d)", 2.88),
                ("(f)", 2.61),
            ],
        );
        check(&r2.sfs, &[("(a c)", 2.05), ("(b)", 2.20), ("(c)(d)", 2.12)]);
        check(
            &r2.pfs,
            &[
                ("(a)(d)", 1.15),
                ("(c)(f)", 1.41),
                ("(a)(f)", 1.22),
                ("(e)", 0.77),
                ("(f)(c)", 1.03),
                ("(c)(a)(d)", 0.77),
            ],
        );
    }

    #[test]
    fn lwes_modes() {
        let run = |mode| {
            let mut state =
                initial_mining(&fixtures::initial_db(), &fixtures::weights(), &params())
                    .unwrap()
                    .with_lwes_mode(mode);
            state
                .uwsinc_plus(&fixtures::delta1())
                .unwrap()
                .thresholds
                .lwes
                .unwrap()
        };
        assert!((run(LwesMode::DeltaWam) - 0.9613).abs() < 1e-3);
        assert!((run(LwesMode::CumulativeWam) - 0.973).abs() < 1e-3);
        assert_eq!(run(LwesMode::Explicit(0.5)), 0.5);
        assert!("0".parse::<LwesMode>().is_err());
    }

    #[test]
    fn tiers_stay_disjoint() {
        let reports = replay(
            &fixtures::initial_db(),
            &[fixtures::delta1(), fixtures::delta2()],
            &fixtures::weights(),
            &params(),
            Algorithm::UwsIncPlus,
            LwesMode::DeltaWam,
        )
        .unwrap();
        for r in &reports {
            for p in &r.pfs {
                assert!(!r.fs.iter().chain(&r.sfs).any(|q| q.pattern == p.pattern));
            }
        }
        assert_eq!(reports.len(), 3);
    }
}
