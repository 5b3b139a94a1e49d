//! USeq-Trie: a pattern index whose edges carry an item and an extension kind,
//! together with SupCalc, the array-based batch update of weighted expected
//! support.
//!
//! A root-to-node path spells a canonical pattern: an `S` edge opens a new
//! itemset and an `I` edge appends to the current one. Nodes live in an arena;
//! their accumulated WES values are kept in a parallel vector so a traversal
//! can read the structure while writing into any accumulator of node values.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{ExtKind, Extension, Item, Pattern, UncertainSequence, WeightTable};

type NodeId = usize;

const ROOT: NodeId = 0;

#[derive(Clone, Debug)]
struct Node {
    edge: Option<Extension>,
    parent: NodeId,
    /// Sorted by `Extension` order: I edges first, then S edges, each by item.
    children: Vec<NodeId>,
    present: bool,
    live: bool,
}

#[derive(Clone, Debug)]
pub struct USeqTrie {
    nodes: Vec<Node>,
    wes: Vec<f64>,
    free: Vec<NodeId>,
    stored: usize,
}

impl Default for USeqTrie {
    fn default() -> Self {
        Self::new()
    }
}

impl USeqTrie {
    pub fn new() -> Self {
        USeqTrie {
            nodes: vec![Node {
                edge: None,
                parent: ROOT,
                children: Vec::new(),
                present: false,
                live: true,
            }],
            wes: vec![0.0],
            free: Vec::new(),
            stored: 0,
        }
    }

    /// Number of non-root nodes, including tombstoned ancestors.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - self.free.len() - 1
    }

    /// Number of stored patterns.
    pub fn len(&self) -> usize {
        self.stored
    }

    pub fn is_empty(&self) -> bool {
        self.stored == 0
    }

    fn edge(&self, id: NodeId) -> Extension {
        self.nodes[id].edge.expect("non-root node")
    }

    fn find_child(&self, parent: NodeId, ext: Extension) -> std::result::Result<NodeId, usize> {
        let children = &self.nodes[parent].children;
        children
            .binary_search_by(|&c| self.edge(c).cmp(&ext))
            .map(|idx| children[idx])
    }

    fn child_or_insert(&mut self, parent: NodeId, ext: Extension) -> NodeId {
        match self.find_child(parent, ext) {
            Ok(id) => id,
            Err(pos) => {
                let node = Node {
                    edge: Some(ext),
                    parent,
                    children: Vec::new(),
                    present: false,
                    live: true,
                };
                let id = match self.free.pop() {
                    Some(id) => {
                        self.nodes[id] = node;
                        self.wes[id] = 0.0;
                        id
                    }
                    None => {
                        self.nodes.push(node);
                        self.wes.push(0.0);
                        self.nodes.len() - 1
                    }
                };
                self.nodes[parent].children.insert(pos, id);
                id
            }
        }
    }

    fn path(pattern: &Pattern) -> impl Iterator<Item = Extension> + '_ {
        pattern.itemsets().iter().flat_map(|set| {
            set.iter().enumerate().map(|(i, &item)| {
                if i == 0 {
                    Extension::s(item)
                } else {
                    Extension::i(item)
                }
            })
        })
    }

    fn locate(&self, pattern: &Pattern) -> Option<NodeId> {
        Self::path(pattern).try_fold(ROOT, |node, ext| self.find_child(node, ext).ok())
    }

    /// Stores `pattern` with the given value, overwriting any previous value.
    pub fn insert(&mut self, pattern: &Pattern, wes: f64) {
        let mut node = ROOT;
        for ext in Self::path(pattern) {
            node = self.child_or_insert(node, ext);
        }
        if !self.nodes[node].present {
            self.nodes[node].present = true;
            self.stored += 1;
        }
        self.wes[node] = wes;
    }

    /// Tombstones `pattern` and physically drops childless tombstone chains.
    /// Removing an absent pattern is a no-op.
    pub fn remove(&mut self, pattern: &Pattern) {
        let Some(mut node) = self.locate(pattern) else {
            return;
        };
        if !self.nodes[node].present {
            return;
        }
        self.nodes[node].present = false;
        self.wes[node] = 0.0;
        self.stored -= 1;
        while node != ROOT && !self.nodes[node].present && self.nodes[node].children.is_empty() {
            let parent = self.nodes[node].parent;
            self.nodes[parent].children.retain(|&c| c != node);
            self.nodes[node].live = false;
            self.free.push(node);
            node = parent;
        }
    }

    pub fn get(&self, pattern: &Pattern) -> Option<f64> {
        self.locate(pattern)
            .filter(|&n| self.nodes[n].present)
            .map(|n| self.wes[n])
    }

    pub fn contains(&self, pattern: &Pattern) -> bool {
        self.get(pattern).is_some()
    }

    /// Sets the value of a stored pattern; returns false if it is absent.
    pub fn set_wes(&mut self, pattern: &Pattern, wes: f64) -> bool {
        match self.locate(pattern).filter(|&n| self.nodes[n].present) {
            Some(n) => {
                self.wes[n] = wes;
                true
            }
            None => false,
        }
    }

    pub fn reset_wes(&mut self) {
        self.wes.iter_mut().for_each(|w| *w = 0.0);
    }

    /// Stored patterns with their values, in depth-first order of the sorted
    /// children (I edges before S edges, items ascending).
    pub fn enumerate(&self) -> Vec<(Pattern, f64)> {
        let mut out = Vec::with_capacity(self.stored);
        let mut itemsets: Vec<Vec<Item>> = Vec::new();
        self.collect(ROOT, &mut itemsets, &mut out);
        out
    }

    fn collect(&self, node: NodeId, itemsets: &mut Vec<Vec<Item>>, out: &mut Vec<(Pattern, f64)>) {
        for &child in &self.nodes[node].children {
            let ext = self.edge(child);
            match ext.kind {
                ExtKind::S => itemsets.push(vec![ext.item]),
                ExtKind::I => itemsets
                    .last_mut()
                    .expect("I edge below root")
                    .push(ext.item),
            }
            if self.nodes[child].present {
                let pattern =
                    crate::model::canonicalize(itemsets.clone()).expect("trie paths are canonical");
                out.push((pattern, self.wes[child]));
            }
            self.collect(child, itemsets, out);
            match ext.kind {
                ExtKind::S => {
                    itemsets.pop();
                }
                ExtKind::I => {
                    itemsets.last_mut().unwrap().pop();
                }
            }
        }
    }

    /// Indented text tree, one node per line: kind, item, value.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_into(ROOT, 0, &mut out);
        out
    }

    fn dump_into(&self, node: NodeId, depth: usize, out: &mut String) {
        for &child in &self.nodes[node].children {
            let ext = self.edge(child);
            let kind = match ext.kind {
                ExtKind::S => 'S',
                ExtKind::I => 'I',
            };
            let mark = if self.nodes[child].present { "" } else { " ~" };
            let _ = writeln!(
                out,
                "{:indent$}{kind} {} {:.6}{mark}",
                "",
                ext.item,
                self.wes[child],
                indent = depth * 2
            );
            self.dump_into(child, depth + 1, out);
        }
    }

    fn edge_weights(&self, weights: &WeightTable) -> Result<HashMap<Item, f64>> {
        let mut map = HashMap::new();
        for node in self.nodes.iter().filter(|n| n.live) {
            if let Some(ext) = node.edge {
                if let std::collections::hash_map::Entry::Vacant(e) = map.entry(ext.item) {
                    e.insert(weights.get(ext.item)?);
                }
            }
        }
        Ok(map)
    }

    /// Adds each sequence's weighted expected support to every stored pattern.
    ///
    /// Values are accumulated sequence by sequence in chunk order, so splitting
    /// a chunk into consecutive calls gives bit-identical results. On a missing
    /// weight nothing is updated.
    pub fn sup_calc(&mut self, chunk: &[UncertainSequence], weights: &WeightTable) -> Result<()> {
        let weights = self.edge_weights(weights)?;
        let mut acc = std::mem::take(&mut self.wes);
        let mut scratch = Scratch::default();
        for seq in chunk {
            self.accumulate(seq, &weights, &mut acc, &mut scratch);
        }
        self.wes = acc;
        Ok(())
    }

    /// Parallel SupCalc: the chunk is cut into fixed blocks of `block` sequences,
    /// each summed privately, then merged into the node values in block order.
    /// The result does not depend on the number of worker threads.
    pub fn sup_calc_blocked(
        &mut self,
        chunk: &[UncertainSequence],
        weights: &WeightTable,
        block: usize,
    ) -> Result<()> {
        let weights = self.edge_weights(weights)?;
        let this = &*self;
        let partials: Vec<Vec<f64>> = chunk
            .par_chunks(block.max(1))
            .map(|part| {
                let mut acc = vec![0.0; this.nodes.len()];
                let mut scratch = Scratch::default();
                for seq in part {
                    this.accumulate(seq, &weights, &mut acc, &mut scratch);
                }
                acc
            })
            .collect();
        for partial in partials {
            for (w, p) in self.wes.iter_mut().zip(partial) {
                *w += p;
            }
        }
        Ok(())
    }

    fn accumulate(
        &self,
        seq: &UncertainSequence,
        weights: &HashMap<Item, f64>,
        acc: &mut [f64],
        scratch: &mut Scratch,
    ) {
        scratch.prepare(seq.len());
        // Depth 0 is the root array: all ones, sentinel included.
        scratch.arrays[0].iter_mut().for_each(|v| *v = 1.0);
        let walk = Walk {
            seq,
            weights,
            itemset: &[],
            weight_sum: 0.0,
            item_count: 0,
        };
        self.traverse(ROOT, 0, walk, acc, scratch);
    }

    fn traverse(
        &self,
        node: NodeId,
        depth: usize,
        walk: Walk<'_>,
        acc: &mut [f64],
        scratch: &mut Scratch,
    ) {
        let events = walk.seq.events();
        let n = events.len();
        for &child in &self.nodes[node].children {
            let ext = self.edge(child);
            scratch.ensure_depth(depth + 1, n);
            let (parents, rest) = scratch.arrays.split_at_mut(depth + 1);
            let parent = &parents[depth];
            let cur = &mut rest[0];
            cur[0] = 0.0;
            let itemset: Vec<Item> = match ext.kind {
                ExtKind::S => vec![ext.item],
                ExtKind::I => walk.itemset.iter().copied().chain([ext.item]).collect(),
            };
            match ext.kind {
                ExtKind::S => {
                    let mut prefix_max = parent[0];
                    for k in 1..=n {
                        cur[k] = match events[k - 1].prob(ext.item) {
                            Some(p) => prefix_max * p,
                            None => 0.0,
                        };
                        prefix_max = prefix_max.max(parent[k]);
                    }
                }
                ExtKind::I => {
                    for k in 1..=n {
                        let event = &events[k - 1];
                        cur[k] = match event.prob(ext.item) {
                            Some(p) if event.contains_all(&itemset) => parent[k] * p,
                            _ => 0.0,
                        };
                    }
                }
            }
            let best = cur[1..=n].iter().copied().fold(0.0, f64::max);
            if best > 0.0 {
                let weight_sum = walk.weight_sum + walk.weights[&ext.item];
                let item_count = walk.item_count + 1;
                if self.nodes[child].present {
                    acc[child] += best * weight_sum / item_count as f64;
                }
                let next = Walk {
                    itemset: &itemset,
                    weight_sum,
                    item_count,
                    ..walk
                };
                self.traverse(child, depth + 1, next, acc, scratch);
            }
        }
    }
}

/// Per-sequence traversal state handed down one level.
#[derive(Clone, Copy)]
struct Walk<'a> {
    seq: &'a UncertainSequence,
    weights: &'a HashMap<Item, f64>,
    itemset: &'a [Item],
    weight_sum: f64,
    item_count: usize,
}

/// Reusable per-depth embedding arrays (length n + 1, index 0 is a sentinel).
#[derive(Default)]
struct Scratch {
    arrays: Vec<Vec<f64>>,
}

impl Scratch {
    fn prepare(&mut self, n: usize) {
        if self.arrays.is_empty() {
            self.arrays.push(Vec::new());
        }
        for a in &mut self.arrays {
            a.resize(n + 1, 0.0);
        }
    }

    fn ensure_depth(&mut self, depth: usize, n: usize) {
        while self.arrays.len() <= depth {
            self.arrays.push(vec![0.0; n + 1]);
        }
    }
}
