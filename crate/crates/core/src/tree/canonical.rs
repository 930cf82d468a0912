use std::collections::HashMap;

use super::{NodeId, RootedTree};

/// Assigns integer AHU labels to rooted subtrees. Two nodes, possibly in
/// different trees labelled through the same interner, get the same label
/// iff their subtrees are isomorphic.
#[derive(Debug, Default, Clone)]
pub struct AhuInterner {
    ids: HashMap<Vec<u32>, u32>,
}

impl AhuInterner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct subtree shapes seen so far.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn intern(&mut self, mut child_labels: Vec<u32>) -> u32 {
        child_labels.sort_unstable();
        let next = self.ids.len() as u32;
        *self.ids.entry(child_labels).or_insert(next)
    }

    /// Label of every node's subtree, indexed by node id.
    pub fn label_tree(&mut self, t: &RootedTree) -> Vec<u32> {
        let mut labels = vec![0u32; t.len()];
        for v in t.bfs_order().into_iter().rev() {
            let kids = t.children(v).iter().map(|c| labels[c.index()]).collect();
            labels[v.index()] = self.intern(kids);
        }
        labels
    }
}

pub(super) fn canonical_string(t: &RootedTree) -> String {
    // One string per distinct subtree shape keeps repeated shapes cheap.
    let mut interner = AhuInterner::new();
    let labels = interner.label_tree(t);
    let mut by_label: HashMap<u32, String> = HashMap::new();
    for v in t.bfs_order().into_iter().rev() {
        let label = labels[v.index()];
        if by_label.contains_key(&label) {
            continue;
        }
        let mut kids: Vec<&str> = t
            .children(v)
            .iter()
            .map(|c| by_label[&labels[c.index()]].as_str())
            .collect();
        kids.sort_unstable();
        let mut s = String::with_capacity(2 + kids.iter().map(|k| k.len()).sum::<usize>());
        s.push('(');
        for k in kids {
            s.push_str(k);
        }
        s.push(')');
        by_label.insert(label, s);
    }
    by_label
        .remove(&labels[t.root().index()])
        .expect("root labelled")
}

/// Subtree sizes indexed by node id.
pub(crate) fn subtree_sizes(t: &RootedTree) -> Vec<usize> {
    let mut size = vec![1usize; t.len()];
    for v in t.bfs_order().into_iter().rev() {
        if let Some(p) = t.parent(v) {
            size[p.index()] += size[v.index()];
        }
    }
    size
}

impl RootedTree {
    /// Number of nodes in `T(v)` for every `v`.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        subtree_sizes(self)
    }

    /// Children of `v` in canonical order.
    pub fn sorted_children(&self, v: NodeId) -> Vec<NodeId> {
        let mut kids = self.children(v).to_vec();
        kids.sort_by_cached_key(|&c| self.subtree(c).canonical_form());
        kids
    }
}
