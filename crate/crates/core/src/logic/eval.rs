//! Brute-force model checking: quantifiers range over every node.

use super::{Formula, Term};
use crate::tree::{NodeId, RootedTree};

#[derive(Debug, Clone, Copy)]
enum Slot {
    Root,
    Bound(usize),
}

enum Compiled {
    Eq(Slot, Slot),
    Parent(Slot, Slot),
    Dist(Slot, Slot, u32),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Exists(Box<Compiled>),
    Forall(Box<Compiled>),
}

fn compile(f: &Formula, scope: &mut Vec<String>) -> Compiled {
    let slot = |t: &Term, scope: &Vec<String>| match t {
        Term::Root => Slot::Root,
        Term::Var(v) => Slot::Bound(
            scope
                .iter()
                .rposition(|s| s == v)
                .unwrap_or_else(|| panic!("evaluate needs a sentence; `{v}` is free")),
        ),
    };
    let bin = |a: &Formula, b: &Formula, scope: &mut Vec<String>| {
        (Box::new(compile(a, scope)), Box::new(compile(b, scope)))
    };
    match f {
        Formula::Eq(a, b) => Compiled::Eq(slot(a, scope), slot(b, scope)),
        Formula::Parent(a, b) => Compiled::Parent(slot(a, scope), slot(b, scope)),
        Formula::Dist(a, b, s) => Compiled::Dist(slot(a, scope), slot(b, scope), *s),
        Formula::Not(g) => Compiled::Not(Box::new(compile(g, scope))),
        Formula::And(a, b) => {
            let (a, b) = bin(a, b, scope);
            Compiled::And(a, b)
        }
        Formula::Or(a, b) => {
            let (a, b) = bin(a, b, scope);
            Compiled::Or(a, b)
        }
        Formula::Implies(a, b) => {
            let (a, b) = bin(a, b, scope);
            Compiled::Implies(a, b)
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            scope.push(v.clone());
            let body = Box::new(compile(g, scope));
            scope.pop();
            if matches!(f, Formula::Exists(..)) {
                Compiled::Exists(body)
            } else {
                Compiled::Forall(body)
            }
        }
    }
}

struct Model<'a> {
    t: &'a RootedTree,
    r: NodeId,
}

impl Model<'_> {
    fn get(&self, s: Slot, env: &[NodeId]) -> NodeId {
        match s {
            Slot::Root => self.r,
            Slot::Bound(i) => env[i],
        }
    }

    fn holds(&self, f: &Compiled, env: &mut Vec<NodeId>) -> bool {
        match f {
            Compiled::Eq(a, b) => self.get(*a, env) == self.get(*b, env),
            Compiled::Parent(a, b) => self.t.is_parent(self.get(*a, env), self.get(*b, env)),
            Compiled::Dist(a, b, s) => self.t.distance(self.get(*a, env), self.get(*b, env)) == *s,
            Compiled::Not(g) => !self.holds(g, env),
            Compiled::And(a, b) => self.holds(a, env) && self.holds(b, env),
            Compiled::Or(a, b) => self.holds(a, env) || self.holds(b, env),
            Compiled::Implies(a, b) => !self.holds(a, env) || self.holds(b, env),
            Compiled::Exists(g) => self.t.nodes().any(|v| self.with(v, g, env)),
            Compiled::Forall(g) => self.t.nodes().all(|v| self.with(v, g, env)),
        }
    }

    fn with(&self, v: NodeId, g: &Compiled, env: &mut Vec<NodeId>) -> bool {
        env.push(v);
        let out = self.holds(g, env);
        env.pop();
        out
    }
}

/// Evaluates a sentence on a finite tree. `R` denotes `designated` when
/// given (the center of a ball) and the tree's root otherwise.
///
/// # Panics
///
/// If `f` has free variables or `designated` is not a node of `t`.
pub fn evaluate(f: &Formula, t: &RootedTree, designated: Option<NodeId>) -> bool {
    let r = designated.unwrap_or(t.root());
    assert!(t.contains_node(r), "designated node {r} is not in the tree");
    let compiled = compile(f, &mut Vec::new());
    Model { t, r }.holds(&compiled, &mut Vec::new())
}
