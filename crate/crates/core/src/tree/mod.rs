//! Rooted trees: an immutable arena of nodes with a designated root.
//!
//! Child lists are stored in insertion order, but nothing in this crate
//! attaches meaning to that order. Identity up to isomorphism is given by
//! [`RootedTree::canonical_form`].

mod ball;
mod canonical;
mod enumerate;
mod text;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ball::Ball;
pub use canonical::AhuInterner;
pub use enumerate::{all_trees, all_trees_up_to};
pub use text::{
    format_ball, parse_ball, parse_tree, parse_trees, serialize_tree, BallParseError,
    TreeParseError,
};

/// Dense index of a node inside one [`RootedTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree must have at least one node")]
    Empty,
    #[error("expected exactly one parentless node, found {0}")]
    RootCount(usize),
    #[error("node {node} names parent {parent}, which is out of range")]
    ParentOutOfRange { node: usize, parent: usize },
    #[error("parent relation is not a tree: node {0} is unreachable from the root")]
    Unreachable(usize),
}

/// A finite rooted tree.
///
/// Invariants: exactly one node (the root) has no parent, parent and child
/// links agree, and every node is reachable from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<u32>,
    root: NodeId,
}

impl RootedTree {
    /// The one-node tree.
    pub fn singleton() -> Self {
        TreeBuilder::new().build()
    }

    /// A path with `nodes` nodes hanging down from the root.
    pub fn path(nodes: usize) -> Self {
        assert!(nodes >= 1, "a path needs at least one node");
        let mut b = TreeBuilder::new();
        let mut last = b.root();
        for _ in 1..nodes {
            last = b.add_child(last);
        }
        b.build()
    }

    /// Root with `leaves` leaf children.
    pub fn star(leaves: usize) -> Self {
        let mut b = TreeBuilder::new();
        let root = b.root();
        for _ in 0..leaves {
            b.add_child(root);
        }
        b.build()
    }

    /// Builds a tree from a parent array. Exactly one entry must be `None`.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self, TreeError> {
        let n = parents.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(TreeError::RootCount(roots.len()));
        }
        let mut children = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(TreeError::ParentOutOfRange { node: i, parent: p });
                }
                children[p].push(NodeId::from(i));
            }
        }
        let parent = parents.iter().map(|p| p.map(NodeId::from)).collect();
        let tree = Self::assemble(parent, children, NodeId::from(roots[0]));
        if let Some(bad) = tree.depth.iter().position(|&d| d == u32::MAX) {
            return Err(TreeError::Unreachable(bad));
        }
        Ok(tree)
    }

    fn assemble(parent: Vec<Option<NodeId>>, children: Vec<Vec<NodeId>>, root: NodeId) -> Self {
        let n = parent.len();
        let mut depth = vec![u32::MAX; n];
        depth[root.index()] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &c in &children[v.index()] {
                if depth[c.index()] == u32::MAX {
                    depth[c.index()] = depth[v.index()] + 1;
                    queue.push_back(c);
                }
            }
        }
        RootedTree {
            parent,
            children,
            depth,
            root,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    /// Always false: trees have at least a root.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        self.root
    }

    #[inline]
    pub fn contains_node(&self, v: NodeId) -> bool {
        v.index() < self.len()
    }

    #[inline]
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v.index()]
    }

    #[inline]
    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.index()]
    }

    /// Generation of `v`; the root is generation 0.
    #[inline]
    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v.index()]
    }

    /// `d(T)`: the largest generation present.
    pub fn height(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// `π(u, v)`: `u` is the parent of `v`.
    #[inline]
    pub fn is_parent(&self, u: NodeId, v: NodeId) -> bool {
        self.parent[v.index()] == Some(u)
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.len()).map(NodeId::from)
    }

    /// Nodes in breadth-first order from the root.
    pub fn bfs_order(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.len());
        order.push(self.root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            order.extend_from_slice(&self.children[v.index()]);
        }
        order
    }

    /// Nodes in pre-order (parent before children, children in stored order).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children[v.index()].iter().rev());
        }
        order
    }

    /// Undirected path length between `u` and `v`.
    pub fn distance(&self, u: NodeId, v: NodeId) -> u32 {
        let (mut a, mut b) = (u, v);
        let mut steps = 0;
        while self.depth(a) > self.depth(b) {
            a = self.parent[a.index()].expect("non-root has parent");
            steps += 1;
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent[b.index()].expect("non-root has parent");
            steps += 1;
        }
        while a != b {
            a = self.parent[a.index()].expect("non-root has parent");
            b = self.parent[b.index()].expect("non-root has parent");
            steps += 2;
        }
        steps
    }

    /// `true` if `a` is `v` or one of its ancestors.
    pub fn is_ancestor_or_self(&self, a: NodeId, v: NodeId) -> bool {
        let mut cur = v;
        loop {
            if cur == a {
                return true;
            }
            if self.depth(cur) <= self.depth(a) {
                return false;
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// `T(v)`: the subtree rooted at `v`, re-indexed in pre-order.
    pub fn subtree(&self, v: NodeId) -> RootedTree {
        self.extract(v, u32::MAX)
    }

    /// `T|_n`: the first `n` generations (the root is generation 0).
    pub fn truncate(&self, generations: u32) -> RootedTree {
        self.extract(self.root, generations)
    }

    /// Copy of the subtree at `top` keeping nodes at most `max_rel_depth`
    /// generations below it.
    fn extract(&self, top: NodeId, max_rel_depth: u32) -> RootedTree {
        let mut b = TreeBuilder::new();
        let base = self.depth(top);
        let mut stack = vec![(top, b.root())];
        while let Some((v, nv)) = stack.pop() {
            if self.depth(v) - base >= max_rel_depth {
                continue;
            }
            for &c in self.children(v).iter().rev() {
                let nc = b.add_child(nv);
                stack.push((c, nc));
            }
        }
        b.build_reordered()
    }

    /// AHU canonical string: balanced parentheses with children sorted
    /// lexicographically by their own canonical strings.
    pub fn canonical_form(&self) -> String {
        canonical::canonical_string(self)
    }

    pub fn is_isomorphic(&self, other: &RootedTree) -> bool {
        if self.len() != other.len() || self.height() != other.height() {
            return false;
        }
        let mut interner = AhuInterner::new();
        let a = interner.label_tree(self);
        let b = interner.label_tree(other);
        a[self.root.index()] == b[other.root.index()]
    }

    /// Some `v` with `T(v) ≅ pattern`, preferring the shallowest match.
    pub fn subtree_contains(&self, pattern: &RootedTree) -> Option<NodeId> {
        let mut interner = AhuInterner::new();
        let want = interner.label_tree(pattern)[pattern.root().index()];
        let labels = interner.label_tree(self);
        self.bfs_order()
            .into_iter()
            .find(|v| labels[v.index()] == want)
    }

    /// `B_T(v; r)`: nodes at undirected distance `< r` from `v`.
    pub fn ball(&self, center: NodeId, radius: u32) -> Ball {
        Ball::new(self, center, radius)
    }

    /// Serializes in stored child order; [`parse_tree`] maps it back with
    /// identical pre-order node ids.
    pub fn to_parens(&self) -> String {
        let mut out = String::with_capacity(2 * self.len());
        // (node, closing?) stack
        let mut stack = vec![(self.root, false)];
        while let Some((v, close)) = stack.pop() {
            if close {
                out.push(')');
                continue;
            }
            out.push('(');
            stack.push((v, true));
            for &c in self.children(v).iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_form())
    }
}

/// Incremental construction; the result always satisfies the tree
/// invariants.
#[derive(Debug, Clone)]
pub struct TreeBuilder {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
}

impl Default for TreeBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl TreeBuilder {
    /// A builder holding just the root (node 0).
    pub fn new() -> Self {
        TreeBuilder {
            parent: vec![None],
            children: vec![Vec::new()],
        }
    }

    /// A builder holding a copy of `t`, plus the id each node of `t`
    /// received. The copy's root is node 0.
    pub fn from_tree(t: &RootedTree) -> (Self, Vec<NodeId>) {
        let mut b = TreeBuilder::new();
        let mut map = vec![NodeId(0); t.len()];
        for v in t.preorder() {
            for &c in t.children(v) {
                map[c.index()] = b.add_child(map[v.index()]);
            }
        }
        (b, map)
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn add_child(&mut self, parent: NodeId) -> NodeId {
        let id = NodeId::from(self.parent.len());
        self.parent.push(Some(parent));
        self.children.push(Vec::new());
        self.children[parent.index()].push(id);
        id
    }

    /// Hangs a copy of `sub` below `parent`; returns the ids the copy's nodes
    /// received, indexed by their id in `sub`.
    pub fn attach(&mut self, parent: NodeId, sub: &RootedTree) -> Vec<NodeId> {
        let mut map = vec![NodeId(0); sub.len()];
        map[sub.root().index()] = self.add_child(parent);
        for v in sub.preorder() {
            for &c in sub.children(v) {
                map[c.index()] = self.add_child(map[v.index()]);
            }
        }
        map
    }

    pub fn build(self) -> RootedTree {
        RootedTree::assemble(self.parent, self.children, NodeId(0))
    }

    /// Builds with node ids renumbered in pre-order.
    fn build_reordered(self) -> RootedTree {
        let raw = self.build();
        let order = raw.preorder();
        if order.iter().enumerate().all(|(i, v)| v.index() == i) {
            return raw;
        }
        let mut new_id = vec![0usize; raw.len()];
        for (i, v) in order.iter().enumerate() {
            new_id[v.index()] = i;
        }
        let mut b = TreeBuilder::new();
        for &v in &order[1..] {
            let p = raw.parent(v).expect("non-root");
            let id = b.add_child(NodeId::from(new_id[p.index()]));
            debug_assert_eq!(id.index(), new_id[v.index()]);
        }
        b.build()
    }
}
