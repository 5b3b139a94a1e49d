//! FUWS: pattern growth over pseudo-projections of the preprocessed database,
//! pruned by an upper bound on weighted expected support, followed by an
//! exact verification pass over the original database.

mod projection;

pub use projection::{ExtStat, ProjEntry, Projection};

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::measures::{exp_sup_cap, exp_support_top, meets, wgt_cap, BoundContext};
use crate::model::{
    ClassifiedPattern, Extension, MiningParams, Pattern, PatternClass, Thresholds,
    UncertainDatabase, WeightTable,
};
use crate::preprocess::{frequencies, preprocess, thresholds, wam, PreprocessedDatabase};
use crate::trie::USeqTrie;

/// Sequences per block in the parallel verification pass.
const VERIFY_BLOCK: usize = 1024;

/// Upper bound used to decide whether an extension is explored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Projected expected-support cap times the weight cap.
    #[default]
    Cap,
    /// Prefix probability times item probability times item support, times
    /// the weight cap.
    Top,
}

impl std::str::FromStr for Bound {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cap" => Ok(Bound::Cap),
            "top" => Ok(Bound::Top),
            other => Err(crate::error::Error::InvalidParams(format!(
                "unknown bound {other:?} (expected cap or top)"
            ))),
        }
    }
}

/// A pattern accepted during growth, with the bound values seen at the point
/// where it was generated.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub pattern: Pattern,
    pub exp_sup_cap: f64,
    pub exp_support_top: f64,
    pub wgt_cap: f64,
    /// The value compared against the threshold under the active bound.
    pub bound_value: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MiningStats {
    pub candidate_nodes: usize,
    pub generation: Duration,
    pub verification: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiningResult {
    pub thresholds: Thresholds,
    pub fs: Vec<ClassifiedPattern>,
    pub sfs: Vec<ClassifiedPattern>,
    pub candidate_count: usize,
    /// Candidates in generation order.
    pub candidates: Vec<Candidate>,
    pub stats: MiningStats,
}

/// Grows every pattern whose bound reaches `threshold`. Top-level items are
/// explored in parallel; the output order is the sequential depth-first order
/// (extensions in I-before-S, item order).
pub fn generate_candidates(
    pdb: &PreprocessedDatabase,
    weights: &WeightTable,
    threshold: f64,
    bound: Bound,
) -> Result<Vec<Candidate>> {
    let root = Projection::root(pdb);
    let exts: Vec<Extension> = root.stats().keys().copied().collect();
    let per_item: Vec<Result<Vec<Candidate>>> = exts
        .par_iter()
        .map(|&ext| {
            let mut out = Vec::new();
            grow_one(
                None,
                &BoundContext::root(),
                &root,
                ext,
                weights,
                threshold,
                bound,
                &mut out,
            )?;
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for part in per_item {
        all.extend(part?);
    }
    Ok(all)
}

#[allow(clippy::too_many_arguments)]
fn grow_one(
    prefix: Option<&Pattern>,
    ctx: &BoundContext,
    projected: &Projection<'_>,
    ext: Extension,
    weights: &WeightTable,
    threshold: f64,
    bound: Bound,
    out: &mut Vec<Candidate>,
) -> Result<()> {
    let Some(stat) = projected.extension(ext) else {
        return Ok(());
    };
    let pattern = match prefix {
        Some(p) => match ext.apply(p) {
            Some(grown) => grown,
            None => return Ok(()),
        },
        None => Pattern::single(ext.item),
    };
    let child_ctx = ctx.extend(stat.pr_max, weights.get(ext.item)?);
    let child = projected.project(ext);
    let cap = exp_sup_cap(ctx, ext, projected);
    let top = exp_support_top(ctx.prefix_max_pr, stat.pr_max, stat.support);
    let wcap = wgt_cap(&child_ctx, &child, weights)?;
    let bound_value = match bound {
        Bound::Cap => cap * wcap,
        Bound::Top => top * wcap,
    };
    if !meets(bound_value, threshold) {
        return Ok(());
    }
    out.push(Candidate {
        pattern: pattern.clone(),
        exp_sup_cap: cap,
        exp_support_top: top,
        wgt_cap: wcap,
        bound_value,
    });
    let next: Vec<Extension> = child.stats().keys().copied().collect();
    for ext in next {
        grow_one(
            Some(&pattern),
            &child_ctx,
            &child,
            ext,
            weights,
            threshold,
            bound,
            out,
        )?;
    }
    Ok(())
}

/// Exact values of `candidates` over `db`, in candidate trie order.
fn verify(
    candidates: &[Candidate],
    db: &UncertainDatabase,
    weights: &WeightTable,
) -> Result<(Vec<(Pattern, f64)>, usize)> {
    let mut trie = USeqTrie::new();
    for c in candidates {
        trie.insert(&c.pattern, 0.0);
    }
    trie.reset_wes();
    trie.sup_calc_blocked(db.sequences(), weights, VERIFY_BLOCK)?;
    Ok((trie.enumerate(), trie.node_count()))
}

fn sorted(mut patterns: Vec<ClassifiedPattern>) -> Vec<ClassifiedPattern> {
    patterns.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    patterns
}

/// Mines frequent (and, when `mu < 1`, semi-frequent) patterns.
pub fn fuws(
    db: &UncertainDatabase,
    weights: &WeightTable,
    params: &MiningParams,
    bound: Bound,
) -> Result<MiningResult> {
    params.validate()?;
    weights.check_covers(db.alphabet())?;
    let wam = wam(&frequencies(db), weights)?;
    fuws_with_thresholds(db, weights, thresholds(params, db.len(), wam), bound)
}

/// [`fuws`] with thresholds fixed by the caller instead of derived from the
/// database.
pub fn fuws_with_thresholds(
    db: &UncertainDatabase,
    weights: &WeightTable,
    thresholds: Thresholds,
    bound: Bound,
) -> Result<MiningResult> {
    weights.check_covers(db.alphabet())?;
    let started = Instant::now();
    let pdb = preprocess(db);
    let candidates = generate_candidates(&pdb, weights, thresholds.min_wes_semi, bound)?;
    let generation = started.elapsed();

    let started = Instant::now();
    let (exact, candidate_nodes) = verify(&candidates, db, weights)?;
    let verification = started.elapsed();

    let mut fs = Vec::new();
    let mut sfs = Vec::new();
    for (pattern, wes) in exact {
        if meets(wes, thresholds.min_wes) {
            fs.push(ClassifiedPattern {
                pattern,
                wes,
                class: PatternClass::Fs,
            });
        } else if meets(wes, thresholds.min_wes_semi) {
            sfs.push(ClassifiedPattern {
                pattern,
                wes,
                class: PatternClass::Sfs,
            });
        }
    }
    Ok(MiningResult {
        thresholds,
        fs: sorted(fs),
        sfs: sorted(sfs),
        candidate_count: candidates.len(),
        candidates,
        stats: MiningStats {
            candidate_nodes,
            generation,
            verification,
        },
    })
}

/// Every pattern of `db` whose exact weighted expected support reaches an
/// absolute `threshold`, sorted by pattern.
pub fn mine_with_threshold(
    db: &UncertainDatabase,
    weights: &WeightTable,
    threshold: f64,
) -> Result<Vec<(Pattern, f64)>> {
    weights.check_covers(db.alphabet())?;
    let pdb = preprocess(db);
    let candidates = generate_candidates(&pdb, weights, threshold, Bound::Cap)?;
    let (exact, _) = verify(&candidates, db, weights)?;
    let mut kept: Vec<_> = exact
        .into_iter()
        .filter(|(_, wes)| meets(*wes, threshold))
        .collect();
    kept.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(kept)
}
