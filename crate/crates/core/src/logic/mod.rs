//! First-order language of rooted trees.
//!
//! Atoms are equality, `parent(x, y)` (x is the parent of y) and, in the ball
//! dialect, bounded distance atoms `d(x, y) = s`. The constant `R` names the
//! root, or the designated center when evaluating on a ball.

mod eval;
mod parser;
mod random;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::RootedTree;

pub use eval::evaluate;
pub use parser::parse_formula;
pub use random::{random_sentence, RandomSentenceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "dialect", rename_all = "snake_case")]
pub enum Dialect {
    Standard,
    /// Adds `d(x, y) = s` for `1 <= s <= m`.
    Ball {
        m: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Root,
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Eq(Term, Term),
    Parent(Term, Term),
    Dist(Term, Term, u32),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound variable `{name}` at byte {offset}")]
    Unbound { name: String, offset: usize },
    #[error("distance atom at byte {offset} needs the ball dialect")]
    DistanceInStandard { offset: usize },
    #[error("distance {s} at byte {offset} is outside 1..={m}")]
    DistanceBound { s: u64, m: u32, offset: usize },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn parent(a: Term, b: Term) -> Formula {
        Formula::Parent(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(body))
    }

    /// Left-nested conjunction; `None` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::or)
    }

    /// Maximum nesting of quantifiers.
    pub fn quantifier_depth(&self) -> u32 {
        match self {
            Formula::Eq(..) | Formula::Parent(..) | Formula::Dist(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// Largest distance bound used, or `None` when the formula has no
    /// distance atoms.
    pub fn max_distance(&self) -> Option<u32> {
        match self {
            Formula::Eq(..) | Formula::Parent(..) => None,
            Formula::Dist(_, _, s) => Some(*s),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.max_distance(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.max_distance().max(b.max_distance())
            }
        }
    }

    /// Variables occurring free, in order of first occurrence.
    pub fn free_variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }
}

fn collect_free<'a>(f: &'a Formula, bound: &mut Vec<&'a str>, out: &mut Vec<String>) {
    let mut term = |t: &'a Term, bound: &Vec<&'a str>| {
        if let Term::Var(v) = t {
            if !bound.contains(&v.as_str()) && !out.contains(v) {
                out.push(v.clone());
            }
        }
    };
    match f {
        Formula::Eq(a, b) | Formula::Parent(a, b) | Formula::Dist(a, b, _) => {
            term(a, bound);
            term(b, bound);
        }
        Formula::Not(g) => collect_free(g, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            bound.push(v);
            collect_free(g, bound, out);
            bound.pop();
        }
    }
}

/// Sentence true on `t` iff some node's subtree is isomorphic to `pattern`:
/// distinct `v_1, …, v_s` with the pattern's parent relations, and no
/// `v_i` has a child outside the pattern. Quantifier depth is `s + 1`.
pub fn containment_sentence(pattern: &RootedTree) -> Formula {
    let order = pattern.preorder();
    let name = |v: crate::tree::NodeId| {
        let i = order.iter().position(|u| *u == v).expect("pattern node");
        format!("v{}", i + 1)
    };
    let var = |v| Term::Var(name(v));
    let mut parts = Vec::new();
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            parts.push(Formula::not(Formula::eq(var(a), var(b))));
        }
    }
    for &v in &order {
        for &c in pattern.children(v) {
            parts.push(Formula::parent(var(v), var(c)));
        }
    }
    let w = || Term::var("w");
    for &v in &order {
        let closed = match Formula::disjunction(
            pattern
                .children(v)
                .iter()
                .map(|&c| Formula::eq(w(), var(c))),
        ) {
            Some(allowed) => Formula::implies(Formula::parent(var(v), w()), allowed),
            None => Formula::not(Formula::parent(var(v), w())),
        };
        parts.push(Formula::forall("w", closed));
    }
    let body = Formula::conjunction(parts).expect("at least one closure clause");
    order
        .iter()
        .rev()
        .fold(body, |acc, &v| Formula::exists(name(v), acc))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Root => f.write_str("R"),
            Term::Var(v) => f.write_str(v),
        }
    }
}

// Binding strength used for printing: higher binds tighter.
const PREC_QUANT: u8 = 0;
const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_UNARY: u8 = 4;

fn write_prec(f: &Formula, ctx: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = match f {
        Formula::Exists(..) | Formula::Forall(..) => PREC_QUANT,
        Formula::Implies(..) => PREC_IMPLIES,
        Formula::Or(..) => PREC_OR,
        Formula::And(..) => PREC_AND,
        _ => PREC_UNARY,
    };
    // a quantifier body extends right, so it is bracketed anywhere but the top
    let paren = own < ctx || (own == PREC_QUANT && ctx > PREC_QUANT);
    if paren {
        out.write_str("(")?;
    }
    match f {
        Formula::Eq(a, b) => write!(out, "{a} = {b}")?,
        Formula::Parent(a, b) => write!(out, "parent({a}, {b})")?,
        Formula::Dist(a, b, s) => write!(out, "d({a}, {b}) = {s}")?,
        Formula::Not(g) => {
            out.write_str("!")?;
            write_prec(g, PREC_UNARY, out)?;
        }
        Formula::And(a, b) => {
            write_prec(a, PREC_AND, out)?;
            out.write_str(" & ")?;
            write_prec(b, PREC_UNARY, out)?;
        }
        Formula::Or(a, b) => {
            write_prec(a, PREC_OR, out)?;
            out.write_str(" | ")?;
            write_prec(b, PREC_AND, out)?;
        }
        Formula::Implies(a, b) => {
            write_prec(a, PREC_OR, out)?;
            out.write_str(" -> ")?;
            write_prec(b, PREC_IMPLIES, out)?;
        }
        Formula::Exists(v, g) => {
            write!(out, "exists {v}. ")?;
            write_prec(g, PREC_QUANT, out)?;
        }
        Formula::Forall(v, g) => {
            write!(out, "forall {v}. ")?;
            write_prec(g, PREC_QUANT, out)?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}

/// Prints in the concrete grammar accepted by [`parse_formula`].
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, PREC_QUANT, f)
    }
}
