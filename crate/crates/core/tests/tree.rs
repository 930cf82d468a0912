mod common;

use common::{arb_tree, bfs_distance, brute_contains, brute_isomorphic};
use gwfo::tree::{all_trees_up_to, parse_tree, parse_trees, serialize_tree, NodeId, RootedTree};
use proptest::prelude::*;

#[test]
fn canonical_form_decides_isomorphism_exhaustively() {
    let trees = all_trees_up_to(8);
    let forms: Vec<String> = trees.iter().map(RootedTree::canonical_form).collect();
    for i in 0..trees.len() {
        // compare against everything of the same size; other sizes differ trivially
        for j in 0..trees.len() {
            if trees[i].len() != trees[j].len() {
                assert_ne!(forms[i], forms[j]);
                continue;
            }
            assert_eq!(forms[i] == forms[j], brute_isomorphic(&trees[i], &trees[j]));
        }
    }
}

#[test]
fn containment_example() {
    let t = parse_tree("(()(()))").unwrap();
    let path2 = RootedTree::path(2);
    let v = t.subtree_contains(&path2).unwrap();
    assert!(t.subtree(v).is_isomorphic(&path2));
    assert!(t.subtree_contains(&RootedTree::star(2)).is_none());
    assert_eq!(t.subtree_contains(&t), Some(t.root()));
}

#[test]
fn ball_examples() {
    let path = RootedTree::path(3);
    let b = path.ball(NodeId(2), 2);
    assert_eq!(b.len(), 2);
    assert_eq!(b.source()[b.top().index()], NodeId(1));
    assert_eq!(path.ball(path.root(), 1).len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn relabeling_preserves_canonical_form(t in arb_tree(12)) {
        let reparsed = parse_tree(&t.to_parens()).unwrap();
        prop_assert_eq!(reparsed.canonical_form(), t.canonical_form());
        let canon = parse_tree(&serialize_tree(&t)).unwrap();
        prop_assert!(brute_isomorphic(&canon, &t));
        prop_assert_eq!(serialize_tree(&canon), serialize_tree(&t));
    }

    #[test]
    fn canonical_agrees_with_brute_force(a in arb_tree(8), b in arb_tree(8)) {
        prop_assert_eq!(a.canonical_form() == b.canonical_form(), brute_isomorphic(&a, &b));
    }

    #[test]
    fn containment_agrees_with_definition(t in arb_tree(14), p in arb_tree(4)) {
        let found = t.subtree_contains(&p);
        prop_assert_eq!(found.is_some(), brute_contains(&t, &p));
        if let Some(v) = found {
            prop_assert!(brute_isomorphic(&t.subtree(v), &p));
        }
    }

    #[test]
    fn distance_matches_bfs(t in arb_tree(20), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let u = NodeId::from(i.index(t.len()));
        let v = NodeId::from(j.index(t.len()));
        prop_assert_eq!(t.distance(u, v), bfs_distance(&t, u, v));
    }

    #[test]
    fn balls_are_exactly_the_strict_neighbourhood(t in arb_tree(25), i in any::<prop::sample::Index>(), r in 1u32..6) {
        let c = NodeId::from(i.index(t.len()));
        let b = t.ball(c, r);
        let mut members: Vec<NodeId> = b.source().to_vec();
        members.sort();
        let expected: Vec<NodeId> = t.nodes().filter(|&u| bfs_distance(&t, u, c) < r).collect();
        prop_assert_eq!(members, expected);
        // inherited structure and a top with no ancestor inside
        let top = b.source()[b.top().index()];
        prop_assert!(b.source().iter().all(|&u| t.is_ancestor_or_self(top, u)));
        for v in b.tree().nodes() {
            if let Some(p) = b.tree().parent(v) {
                prop_assert!(t.is_parent(b.source()[p.index()], b.source()[v.index()]));
            }
        }
        prop_assert_eq!(b.source()[b.center().index()], c);
    }

    #[test]
    fn truncation_composes(t in arb_tree(30), n in 0u32..6, m in 0u32..6) {
        let twice = t.truncate(n).truncate(m);
        prop_assert!(twice.is_isomorphic(&t.truncate(n.min(m))));
        prop_assert!(t.truncate(n).height() <= n);
        if t.height() <= n {
            prop_assert!(t.truncate(n).is_isomorphic(&t));
        }
    }

    #[test]
    fn multi_tree_files(ts in prop::collection::vec(arb_tree(10), 1..6)) {
        let text: String = ts.iter().map(|t| format!("{}\n\n", t.to_parens())).collect();
        let parsed = parse_trees(&text).unwrap();
        prop_assert_eq!(parsed.len(), ts.len());
        for (a, b) in parsed.iter().zip(&ts) {
            prop_assert!(a.is_isomorphic(b));
        }
    }
}
