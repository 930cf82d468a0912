use std::collections::VecDeque;

use super::{NodeId, RootedTree, TreeBuilder};

/// `B_T(v; r)` with its induced parent structure.
///
/// The ball's tree is rooted at its top: the unique node of the ball with no
/// ancestor inside the ball. Because the ball is a connected subset of the
/// ambient tree, distances inside the ball tree equal ambient distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    tree: RootedTree,
    center: NodeId,
    radius: u32,
    source: Vec<NodeId>,
}

impl Ball {
    pub(super) fn new(t: &RootedTree, center: NodeId, radius: u32) -> Ball {
        assert!(t.contains_node(center), "center {center} not in tree");
        assert!(radius >= 1, "ball radius must be at least 1");
        let n = t.len();
        let mut dist = vec![u32::MAX; n];
        dist[center.index()] = 0;
        let mut members = vec![center];
        let mut queue = VecDeque::from([center]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v.index()];
            if d + 1 >= radius {
                continue;
            }
            let nbrs = t.children(v).iter().copied().chain(t.parent(v));
            for w in nbrs {
                if dist[w.index()] == u32::MAX {
                    dist[w.index()] = d + 1;
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        let top = *members
            .iter()
            .min_by_key(|v| t.depth(**v))
            .expect("center is a member");

        let mut local = vec![u32::MAX; n];
        let mut b = TreeBuilder::new();
        local[top.index()] = 0;
        let mut source = vec![top];
        let mut queue = VecDeque::from([top]);
        while let Some(v) = queue.pop_front() {
            for &c in t.children(v) {
                if dist[c.index()] != u32::MAX {
                    let id = b.add_child(NodeId(local[v.index()]));
                    local[c.index()] = id.0;
                    source.push(c);
                    queue.push_back(c);
                }
            }
        }
        debug_assert_eq!(source.len(), members.len());
        Ball {
            tree: b.build(),
            center: NodeId(local[center.index()]),
            radius,
            source,
        }
    }

    /// Wraps a tree that already is a ball around `center`; the tree's root
    /// is taken as the top.
    ///
    /// # Panics
    ///
    /// Under the same conditions in which [`Ball::try_from_parts`] fails.
    pub fn from_parts(tree: RootedTree, center: NodeId, radius: u32) -> Ball {
        Ball::try_from_parts(tree, center, radius)
            .expect("center in the tree, radius >= 1 and every node closer than the radius")
    }

    /// Like [`Ball::from_parts`], returning `None` when the center is not a
    /// node, the radius is zero, or some node lies at distance `>= radius`.
    pub fn try_from_parts(tree: RootedTree, center: NodeId, radius: u32) -> Option<Ball> {
        if !tree.contains_node(center) || radius == 0 {
            return None;
        }
        if tree.ball(center, radius).len() != tree.len() {
            return None;
        }
        Some(Ball {
            source: tree.nodes().collect(),
            tree,
            center,
            radius,
        })
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    /// Center, as an id in [`Ball::tree`].
    pub fn center(&self) -> NodeId {
        self.center
    }

    /// Top vertex, as an id in [`Ball::tree`] (always its root).
    pub fn top(&self) -> NodeId {
        self.tree.root()
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Ambient node id of each ball node, indexed by ball node id.
    pub fn source(&self) -> &[NodeId] {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distance from the center up to the top.
    pub fn top_distance(&self) -> u32 {
        self.tree.depth(self.center)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_one_is_the_center_alone() {
        let t = RootedTree::star(3);
        let b = t.ball(t.root(), 1);
        assert_eq!(b.len(), 1);
        assert_eq!(b.center(), b.top());
    }

    #[test]
    fn path_ball_top() {
        // a - b - c with a the root, center c, radius 2
        let t = RootedTree::path(3);
        let b = t.ball(NodeId(2), 2);
        assert_eq!(b.source(), &[NodeId(1), NodeId(2)]);
        assert_eq!(b.source()[b.top().index()], NodeId(1));
        assert_eq!(b.top_distance(), 1);
    }

    #[test]
    fn ball_near_root_tops_at_root() {
        let t = RootedTree::path(5);
        let b = t.ball(NodeId(1), 4);
        assert_eq!(b.source()[b.top().index()], t.root());
        assert_eq!(b.top_distance(), 1);
        assert_eq!(b.len(), 5);
    }

    #[test]
    fn from_parts_keeps_ids() {
        let t = RootedTree::path(3);
        let b = Ball::from_parts(t.clone(), NodeId(2), 3);
        assert_eq!(b.tree(), &t);
        assert_eq!(b.center(), NodeId(2));
    }
}
