use std::collections::BTreeMap;

use super::{NodeId, RootedTree};

/// Every rooted tree with exactly `nodes` nodes, one per isomorphism class,
/// in canonical-string order.
pub fn all_trees(nodes: usize) -> Vec<RootedTree> {
    if nodes == 0 {
        return Vec::new();
    }
    let mut level = vec![RootedTree::singleton()];
    for _ in 1..nodes {
        let mut next = BTreeMap::new();
        for t in &level {
            for v in t.nodes() {
                let grown = with_leaf(t, v);
                next.entry(grown.canonical_form()).or_insert(grown);
            }
        }
        level = next.into_values().collect();
    }
    level
}

/// Every rooted tree with `1..=max_nodes` nodes, smallest first.
pub fn all_trees_up_to(max_nodes: usize) -> Vec<RootedTree> {
    (1..=max_nodes).flat_map(all_trees).collect()
}

fn with_leaf(t: &RootedTree, at: NodeId) -> RootedTree {
    let mut parents: Vec<Option<usize>> =
        t.nodes().map(|v| t.parent(v).map(NodeId::index)).collect();
    parents.push(Some(at.index()));
    RootedTree::from_parents(&parents).expect("adding a leaf keeps a tree")
}
