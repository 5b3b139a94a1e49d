//! Exact pattern measures (expected support, sequence weight, weighted expected
//! support) and the upper bounds used to prune pattern growth.

use crate::error::Result;
use crate::miner::Projection;
use crate::model::{Extension, Pattern, UncertainDatabase, UncertainSequence, WeightTable};

/// Absolute slack for threshold comparisons.
pub const TOLERANCE: f64 = 1e-9;

/// `value >= threshold`, up to [`TOLERANCE`].
pub fn meets(value: f64, threshold: f64) -> bool {
    value >= threshold - TOLERANCE
}

/// Best embedding probability of `pattern` in one sequence, 0 if absent.
///
/// Itemsets map to strictly increasing events; an embedding's probability is
/// the product of every matched item's probability.
pub fn max_pr_s(pattern: &Pattern, seq: &UncertainSequence) -> f64 {
    let events = seq.events();
    // best[k]: best probability of the itemsets so far ending at event k
    let mut best: Vec<f64> = vec![0.0; events.len()];
    for (j, itemset) in pattern.itemsets().iter().enumerate() {
        let mut before = if j == 0 { 1.0 } else { 0.0 };
        for (k, event) in events.iter().enumerate() {
            let prev = best[k];
            best[k] = itemset
                .iter()
                .try_fold(before, |acc, &item| event.prob(item).map(|p| acc * p))
                .unwrap_or(0.0);
            if j > 0 {
                before = before.max(prev);
            }
        }
    }
    best.into_iter().fold(0.0, f64::max)
}

pub fn exp_sup(pattern: &Pattern, db: &UncertainDatabase) -> f64 {
    db.iter().map(|s| max_pr_s(pattern, s)).sum()
}

/// Mean item weight, items counted with multiplicity.
pub fn s_weight(pattern: &Pattern, weights: &WeightTable) -> Result<f64> {
    let mut sum = 0.0;
    for item in pattern.items() {
        sum += weights.get(item)?;
    }
    Ok(sum / pattern.len() as f64)
}

pub fn wes(pattern: &Pattern, db: &UncertainDatabase, weights: &WeightTable) -> Result<f64> {
    Ok(exp_sup(pattern, db) * s_weight(pattern, weights)?)
}

/// Running state of a prefix during pattern growth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundContext {
    /// Product of the best projected probability of each prefix item.
    pub prefix_max_pr: f64,
    pub prefix_weight_sum: f64,
    pub prefix_len: usize,
    /// Largest item weight inside the prefix.
    pub prefix_mxw: f64,
}

impl BoundContext {
    /// Context of the empty prefix.
    pub fn root() -> Self {
        BoundContext {
            prefix_max_pr: 1.0,
            prefix_weight_sum: 0.0,
            prefix_len: 0,
            prefix_mxw: 0.0,
        }
    }

    /// Context after appending an item whose best probability in the current
    /// projection is `item_max_pr`.
    pub fn extend(&self, item_max_pr: f64, weight: f64) -> Self {
        BoundContext {
            prefix_max_pr: self.prefix_max_pr * item_max_pr,
            prefix_weight_sum: self.prefix_weight_sum + weight,
            prefix_len: self.prefix_len + 1,
            prefix_mxw: self.prefix_mxw.max(weight),
        }
    }
}

/// Expected-support cap of the prefix grown by `ext`. `projected` is the
/// prefix's projection over the preprocessed database.
pub fn exp_sup_cap(ctx: &BoundContext, ext: Extension, projected: &Projection<'_>) -> f64 {
    projected
        .extension(ext)
        .map_or(0.0, |s| ctx.prefix_max_pr * s.pr_sum)
}

/// Weight cap of a pattern given its own context and projection: the larger of
/// its heaviest item and the heaviest item anywhere in its projection.
pub fn wgt_cap(
    ctx: &BoundContext,
    projected: &Projection<'_>,
    weights: &WeightTable,
) -> Result<f64> {
    Ok(ctx.prefix_mxw.max(projected.max_item_weight(weights)?))
}

/// Weighted expected-support cap of the prefix grown by `ext`.
pub fn w_exp_sup_cap(
    ctx: &BoundContext,
    ext: Extension,
    projected: &Projection<'_>,
    weights: &WeightTable,
) -> Result<f64> {
    let Some(stat) = projected.extension(ext) else {
        return Ok(0.0);
    };
    let child_ctx = ctx.extend(stat.pr_max, weights.get(ext.item)?);
    let child = projected.project(ext);
    Ok(exp_sup_cap(ctx, ext, projected) * wgt_cap(&child_ctx, &child, weights)?)
}

/// The looser prior bound: prefix probability times the item's best projected
/// probability times its projected sequence support.
pub fn exp_support_top(prefix_max_pr: f64, item_max_pr: f64, item_support: usize) -> f64 {
    prefix_max_pr * item_max_pr * item_support as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::test_util::{item, pat};
    use crate::model::ExtKind;
    use crate::preprocess::preprocess;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// All embeddings by brute force: list of (end event, probability).
    fn embeddings(pattern: &Pattern, seq: &UncertainSequence) -> Vec<(usize, f64)> {
        fn go(
            sets: &[Vec<crate::model::Item>],
            seq: &UncertainSequence,
            start: usize,
            acc: f64,
            last: Option<usize>,
            out: &mut Vec<(usize, f64)>,
        ) {
            let Some((first, rest)) = sets.split_first() else {
                out.push((last.unwrap(), acc));
                return;
            };
            for k in start..seq.len() {
                let e = &seq.events()[k];
                if e.contains_all(first) {
                    let p = first.iter().map(|&i| e.prob(i).unwrap()).product::<f64>();
                    go(rest, seq, k + 1, acc * p, Some(k), out);
                }
            }
        }
        let mut out = Vec::new();
        go(pattern.itemsets(), seq, 0, 1.0, None, &mut out);
        out
    }

    fn brute_max_pr(pattern: &Pattern, seq: &UncertainSequence) -> f64 {
        embeddings(pattern, seq)
            .into_iter()
            .map(|(_, p)| p)
            .fold(0.0, f64::max)
    }

    /// Reference for the cap's sum term: per sequence, best preprocessed
    /// probability of `ext` at a position where it extends some embedding of
    /// the prefix (s: after the earliest end, i: at any end with the item
    /// sorting after the last prefix item).
    fn brute_pr_sum(prefix: &Pattern, ext: Extension, pdb: &UncertainDatabase) -> f64 {
        pdb.iter()
            .map(|seq| {
                let ends: Vec<usize> = embeddings(prefix, seq)
                    .into_iter()
                    .map(|(k, _)| k)
                    .collect();
                let Some(&first) = ends.iter().min() else {
                    return 0.0;
                };
                seq.events()
                    .iter()
                    .enumerate()
                    .filter(|(k, e)| match ext.kind {
                        ExtKind::S => *k > first && e.contains(ext.item),
                        ExtKind::I => {
                            ext.item > prefix.last_item()
                                && ends.contains(k)
                                && e.contains(ext.item)
                        }
                    })
                    .map(|(_, e)| e.prob(ext.item).unwrap())
                    .fold(0.0, f64::max)
            })
            .sum()
    }

    #[test]
    fn max_pr_s_examples() {
        let db = fixtures::initial_db();
        let s1 = &db.sequences()[0];
        assert!(close(max_pr_s(&pat("(a)(b)"), s1), 0.27, 1e-12));
        assert!(close(max_pr_s(&pat("(a c)"), s1), 0.54, 1e-12));
        assert_eq!(max_pr_s(&pat("(g)"), s1), 0.0);
        assert_eq!(max_pr_s(&pat("(a)(g)"), s1), 0.0);
        for seq in db.iter() {
            for p in ["(a)(a)", "(a c)(a)", "(a)(a b)", "(b)(a)(a)", "(d)(a c)"] {
                let p = pat(p);
                assert!(close(max_pr_s(&p, seq), brute_max_pr(&p, seq), 1e-15));
            }
        }
    }

    #[test]
    fn exp_sup_examples() {
        let db = fixtures::initial_db();
        assert!(close(exp_sup(&pat("(a)(b)"), &db), 0.57, 1e-12));
        assert!(close(exp_sup(&pat("(a)"), &db), 2.8, 1e-12));
        assert_eq!(exp_sup(&pat("(a)"), &UncertainDatabase::default()), 0.0);
    }

    #[test]
    fn s_weight_and_wes_examples() {
        let db = fixtures::initial_db();
        let w = fixtures::weights();
        assert!(close(s_weight(&pat("(a)(b)"), &w).unwrap(), 0.9, 1e-12));
        assert!(close(s_weight(&pat("(a c)"), &w).unwrap(), 0.85, 1e-12));
        assert_eq!(s_weight(&pat("(e)"), &w).unwrap(), 0.7);
        assert!(close(wes(&pat("(a)(b)"), &db, &w).unwrap(), 0.513, 1e-12));
        assert!(close(wes(&pat("(a)(a)"), &db, &w).unwrap(), 1.03, 0.01));
        assert!(close(wes(&pat("(a c)"), &db, &w).unwrap(), 1.02, 1e-12));
        assert_eq!(wes(&pat("(e)(f)"), &db, &w).unwrap(), 0.0);
        assert!(s_weight(&pat("(zz_unweighted)"), &w).is_err());
    }

    #[test]
    fn caps_at_root_and_after_a() {
        let db = fixtures::initial_db();
        let pdb = preprocess(&db);
        let w = fixtures::weights();
        let root = Projection::root(&pdb);
        let ctx = BoundContext::root();
        let b = Extension::s(item("b"));
        assert!(close(exp_sup_cap(&ctx, b, &root), 1.4, 1e-12));
        assert!(close(
            w_exp_sup_cap(&ctx, b, &root, &w).unwrap(),
            1.40,
            1e-12
        ));

        let a = Extension::s(item("a"));
        let a_stat = root.extension(a).unwrap();
        let a_ctx = ctx.extend(a_stat.pr_max, 0.8);
        let a_proj = root.project(a);
        assert_eq!(a_ctx.prefix_max_pr, 0.9);
        let cases = [
            (Extension::s(item("a")), 2.25),
            (Extension::s(item("b")), 1.08),
            // heaviest projected item of (a)(c) is c itself
            (Extension::s(item("c")), 0.81),
            (Extension::i(item("c")), 1.8),
            (Extension::i(item("b")), 0.81),
        ];
        for (ext, expected) in cases {
            let sum = brute_pr_sum(&pat("(a)"), ext, &pdb);
            assert!(close(exp_sup_cap(&a_ctx, ext, &a_proj), 0.9 * sum, 1e-12));
            let got = w_exp_sup_cap(&a_ctx, ext, &a_proj, &w).unwrap();
            assert!(close(got, expected, 1e-12), "{ext:?}: {got}");
        }
        assert_eq!(exp_sup_cap(&a_ctx, Extension::s(item("f")), &a_proj), 0.0);
        assert_eq!(
            w_exp_sup_cap(&a_ctx, Extension::s(item("f")), &a_proj, &w).unwrap(),
            0.0
        );
    }

    #[test]
    fn wgt_cap_examples() {
        let db = fixtures::initial_db();
        let pdb = preprocess(&db);
        let w = fixtures::weights();
        let root = Projection::root(&pdb);
        let g = Extension::s(item("g"));
        let g_ctx = BoundContext::root().extend(0.5, 0.8);
        assert_eq!(wgt_cap(&g_ctx, &root.project(g), &w).unwrap(), 0.8);
        let b = Extension::s(item("b"));
        let b_ctx = BoundContext::root().extend(0.4, 1.0);
        assert_eq!(wgt_cap(&b_ctx, &root.project(b), &w).unwrap(), 1.0);
        for item in db.alphabet() {
            let ext = Extension::s(*item);
            let ctx = BoundContext::root().extend(1.0, w.get(*item).unwrap());
            assert!(wgt_cap(&ctx, &root.project(ext), &w).unwrap() <= w.max_weight());
        }
    }

    #[test]
    fn top_bound_examples() {
        assert!(close(exp_support_top(1.0, 0.9, 6), 5.4, 1e-12));
        assert_eq!(exp_support_top(0.7, 0.9, 0), 0.0);
        let pdb = preprocess(&fixtures::initial_db());
        let root = Projection::root(&pdb);
        for (ext, s) in root.stats() {
            let cap = exp_sup_cap(&BoundContext::root(), *ext, &root);
            assert!(cap <= exp_support_top(1.0, s.pr_max, s.support) + 1e-12);
        }
    }

    #[test]
    fn meets_uses_tolerance() {
        assert!(meets(0.96, 0.96));
        assert!(meets(0.96 - 5e-10, 0.96));
        assert!(!meets(0.96 - 1e-8, 0.96));
    }
}
