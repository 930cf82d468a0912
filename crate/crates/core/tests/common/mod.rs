#![allow(dead_code)]

use gwfo::tree::{NodeId, RootedTree};
use proptest::prelude::*;

/// Random tree on `1..=max` nodes: node `i` picks a parent among `0..i`,
/// then ids are permuted so the root is not always node 0.
pub fn arb_tree(max: usize) -> impl Strategy<Value = RootedTree> {
    (1..=max)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            (parents, Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        })
        .prop_map(|(parents, perm)| {
            let n = perm.len();
            let mut relabeled = vec![None; n];
            for (i, p) in parents.iter().enumerate() {
                relabeled[perm[i + 1]] = Some(perm[*p]);
            }
            RootedTree::from_parents(&relabeled).unwrap()
        })
}

/// Rooted-tree isomorphism by backtracking over child matchings.
pub fn brute_isomorphic(a: &RootedTree, b: &RootedTree) -> bool {
    fn iso(a: &RootedTree, u: NodeId, b: &RootedTree, v: NodeId) -> bool {
        let (ca, cb) = (a.children(u), b.children(v));
        if ca.len() != cb.len() {
            return false;
        }
        let mut used = vec![false; cb.len()];
        match_children(a, ca, b, cb, &mut used)
    }
    fn match_children(
        a: &RootedTree,
        ca: &[NodeId],
        b: &RootedTree,
        cb: &[NodeId],
        used: &mut [bool],
    ) -> bool {
        let Some((&first, rest)) = ca.split_first() else {
            return true;
        };
        for j in 0..cb.len() {
            if !used[j] && iso(a, first, b, cb[j]) {
                used[j] = true;
                if match_children(a, rest, b, cb, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    a.len() == b.len() && iso(a, a.root(), b, b.root())
}

/// Subtree containment straight from the definition: some node `v` with
/// `T(v)` isomorphic to the pattern.
pub fn brute_contains(t: &RootedTree, pattern: &RootedTree) -> bool {
    t.nodes().any(|v| brute_isomorphic(&t.subtree(v), pattern))
}

/// Undirected distance by breadth-first search over parent and child links.
pub fn bfs_distance(t: &RootedTree, u: NodeId, v: NodeId) -> u32 {
    let mut dist = vec![u32::MAX; t.len()];
    dist[u.index()] = 0;
    let mut queue = std::collections::VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        let nbrs = t.children(x).iter().copied().chain(t.parent(x));
        for y in nbrs {
            if dist[y.index()] == u32::MAX {
                dist[y.index()] = dist[x.index()] + 1;
                queue.push_back(y);
            }
        }
    }
    dist[v.index()]
}
