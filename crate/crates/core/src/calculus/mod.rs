//! Exact class probabilities for Poisson(λ) trees.
//!
//! For a class `σ` of depth `i >= 1`,
//!
//! ```text
//! P_σ(x) = exp(-x (1 - Σ_{τ ∈ supp σ} P_τ(x))) · Π_{τ ∈ supp σ} P_{σ(τ)}(x P_τ(x))
//! ```
//!
//! where the exponential accounts for every class with count zero at once.
//! `Pr[σ] = P_σ(λ)`; the finite and infinite conditionings are built from
//! the same function.

mod expr;
mod survival;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::classes::{
    enumerate_classes, representative, representative_with, CapCount, ClassError, ClassEvent,
    GammaClass, DEFAULT_ENUMERATION_CAP,
};
use crate::logic::{evaluate, Formula};
use crate::tree::{RootedTree, TreeBuilder};

pub use expr::NiceExpr;
pub use survival::{solve_survival, SurvivalSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("λ must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("conditioning event has probability zero (λ = {0} <= 1)")]
    ZeroProbabilityConditioning(f64),
    #[error("conditioning on finiteness is trivial for λ = {0} <= 1; request the unconditioned value explicitly")]
    TrivialConditioning(f64),
    #[error(transparent)]
    Class(#[from] ClassError),
}

/// Anything that denotes a union of classes.
pub trait ClassSet {
    fn members(&self) -> Vec<&GammaClass>;
}

impl ClassSet for GammaClass {
    fn members(&self) -> Vec<&GammaClass> {
        vec![self]
    }
}

impl ClassSet for ClassEvent {
    fn members(&self) -> Vec<&GammaClass> {
        self.iter().collect()
    }
}

impl ClassSet for [GammaClass] {
    fn members(&self) -> Vec<&GammaClass> {
        self.iter().collect()
    }
}

impl ClassSet for Vec<GammaClass> {
    fn members(&self) -> Vec<&GammaClass> {
        self.iter().collect()
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `Pr[Po(x) = n]` for `Exactly(n)` and `Pr[Po(x) >= k]` for `ω`.
pub fn poisson_pmf_capped(u: CapCount, k: u32, x: f64) -> f64 {
    match u {
        CapCount::Exactly(n) => (-x).exp() * x.powi(n as i32) / factorial(n),
        CapCount::Omega => {
            1.0 - (0..k)
                .map(|n| poisson_pmf_capped(CapCount::Exactly(n), k, x))
                .sum::<f64>()
        }
    }
}

fn pmf_expr(u: CapCount, k: u32, y: &NiceExpr) -> NiceExpr {
    match u {
        CapCount::Exactly(n) => {
            let e = NiceExpr::exp(NiceExpr::mul(NiceExpr::int(-1), y.clone()));
            let power = NiceExpr::product((0..n).map(|_| y.clone()));
            let fact: i64 = (1..=i64::from(n)).product();
            NiceExpr::mul(NiceExpr::mul(e, power), NiceExpr::ratio(1, fact))
        }
        CapCount::Omega => NiceExpr::sub(
            NiceExpr::int(1),
            NiceExpr::sum((0..k).map(|n| pmf_expr(CapCount::Exactly(n), k, y))),
        ),
    }
}

/// Symbolic `P_σ(x)`.
pub fn class_probability_expr(c: &GammaClass) -> NiceExpr {
    let mut memo = HashMap::new();
    expr_memo(c, &mut memo)
}

/// Symbolic `Σ_σ P_σ(x)` over a class set, in canonical order.
pub fn event_probability_expr<S: ClassSet + ?Sized>(s: &S) -> NiceExpr {
    let mut memo = HashMap::new();
    NiceExpr::sum(s.members().into_iter().map(|c| expr_memo(c, &mut memo)))
}

fn expr_memo(c: &GammaClass, memo: &mut HashMap<GammaClass, NiceExpr>) -> NiceExpr {
    if c.depth() == 0 {
        return NiceExpr::int(1);
    }
    if let Some(e) = memo.get(c) {
        return e.clone();
    }
    let x = NiceExpr::x();
    let keys: Vec<NiceExpr> = c
        .support()
        .iter()
        .map(|(t, _)| expr_memo(t, memo))
        .collect();
    let missing = NiceExpr::sub(NiceExpr::int(1), NiceExpr::sum(keys.iter().cloned()));
    let mut out = NiceExpr::exp(NiceExpr::mul(
        NiceExpr::mul(NiceExpr::int(-1), x.clone()),
        missing,
    ));
    for ((_, count), pt) in c.support().iter().zip(keys) {
        let y = NiceExpr::mul(x.clone(), pt);
        out = NiceExpr::mul(out, pmf_expr(*count, c.k(), &y));
    }
    memo.insert(c.clone(), out.clone());
    out
}

/// Numeric `P_σ(x)` with memoization shared across lookups at one `x`.
#[derive(Debug, Clone)]
pub struct ClassProbabilities {
    x: f64,
    memo: HashMap<GammaClass, f64>,
}

impl ClassProbabilities {
    pub fn new(x: f64) -> ClassProbabilities {
        ClassProbabilities {
            x,
            memo: HashMap::new(),
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn get(&mut self, c: &GammaClass) -> f64 {
        if c.depth() == 0 {
            return 1.0;
        }
        if let Some(&v) = self.memo.get(c) {
            return v;
        }
        let keys: Vec<f64> = c.support().iter().map(|(t, _)| self.get(t)).collect();
        let mut out = (-self.x * (1.0 - keys.iter().sum::<f64>())).exp();
        for ((_, count), pt) in c.support().iter().zip(keys) {
            out *= poisson_pmf_capped(*count, c.k(), self.x * pt);
        }
        self.memo.insert(c.clone(), out);
        out
    }

    /// Sum over a class set in canonical order.
    pub fn total<S: ClassSet + ?Sized>(&mut self, s: &S) -> f64 {
        s.members().into_iter().map(|c| self.get(c)).sum()
    }
}

/// `Σ_{σ ∈ s} P_σ(x)`; for a single class this is `Pr[σ]` at `x = λ`.
pub fn class_probability<S: ClassSet + ?Sized>(s: &S, x: f64) -> f64 {
    ClassProbabilities::new(x).total(s)
}

/// What to do when `λ <= 1` makes conditioning on finiteness vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Subcritical {
    #[default]
    Reject,
    /// Return the unconditioned value.
    Unconditioned,
}

/// `Pr[s | T finite] = f(qλ)`.
pub fn finite_conditioned_probability<S: ClassSet + ?Sized>(
    s: &S,
    lambda: f64,
    subcritical: Subcritical,
) -> Result<f64, CalculusError> {
    let sol = solve_survival(lambda)?;
    if lambda <= 1.0 {
        return match subcritical {
            Subcritical::Reject => Err(CalculusError::TrivialConditioning(lambda)),
            Subcritical::Unconditioned => Ok(class_probability(s, lambda)),
        };
    }
    Ok(class_probability(s, sol.q * lambda))
}

/// `Pr*[s] = (f(λ) - q f(qλ)) / p` with `f` the summed class function.
/// Round-off in `[-1e-10, 0)` is clamped to zero.
pub fn infinite_conditioned_probability<S: ClassSet + ?Sized>(
    s: &S,
    lambda: f64,
) -> Result<f64, CalculusError> {
    let sol = solve_survival(lambda)?;
    if lambda <= 1.0 {
        return Err(CalculusError::ZeroProbabilityConditioning(lambda));
    }
    let f = class_probability(s, lambda);
    let f_fin = class_probability(s, sol.q * lambda);
    let v = (f - sol.q * f_fin) / sol.p;
    Ok(if (-1e-10..0.0).contains(&v) { 0.0 } else { v })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    #[default]
    Unconditioned,
    Infinite,
    Finite,
}

impl Conditioning {
    pub fn probability<S: ClassSet + ?Sized>(
        self,
        s: &S,
        lambda: f64,
    ) -> Result<f64, CalculusError> {
        match self {
            Conditioning::Unconditioned => {
                solve_survival(lambda)?;
                Ok(class_probability(s, lambda))
            }
            Conditioning::Infinite => infinite_conditioned_probability(s, lambda),
            Conditioning::Finite => finite_conditioned_probability(s, lambda, Subcritical::Reject),
        }
    }
}

/// Signs that a sentence is not determined by the class representatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "class", rename_all = "snake_case")]
pub enum SentenceWarning {
    /// Truth changes when `ω` is realized with `k + 1` copies.
    OmegaSensitive(String),
    /// Truth changes when leaves are added below the last generation.
    DepthSensitive(String),
}

impl fmt::Display for SentenceWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SentenceWarning::OmegaSensitive(c) => {
                write!(f, "truth on class {c} depends on how ω is realized")
            }
            SentenceWarning::DepthSensitive(c) => {
                write!(
                    f,
                    "truth on class {c} depends on generations beyond the locality depth"
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SentenceProbability {
    pub value: f64,
    pub k: u32,
    pub depth: u32,
    pub conditioning: Conditioning,
    /// Classes whose representative satisfies the sentence.
    pub event: ClassEvent,
    pub warnings: Vec<SentenceWarning>,
}

fn with_leaf_generation(t: &RootedTree, depth: u32) -> RootedTree {
    let mut b = TreeBuilder::new();
    let mut ids = vec![b.root(); t.len()];
    for v in t.bfs_order() {
        if let Some(p) = t.parent(v) {
            ids[v.index()] = b.add_child(ids[p.index()]);
        }
        if t.depth(v) == depth {
            b.add_child(ids[v.index()]);
        }
    }
    b.build()
}

/// Probability of a sentence through its locality depth `i`.
///
/// The cap is `k = max(1, quantifier depth)`. Every class of `Γ_i` is
/// tested on its representative; classes where the verdict moves when `ω`
/// gets an extra copy or the last generation gets children are reported
/// in `warnings`.
pub fn sentence_probability(
    a: &Formula,
    lambda: f64,
    depth: u32,
    conditioning: Conditioning,
) -> Result<SentenceProbability, CalculusError> {
    solve_survival(lambda)?;
    let k = a.quantifier_depth().max(1);
    let classes = enumerate_classes(k, depth, DEFAULT_ENUMERATION_CAP)?;
    let mut event = ClassEvent::empty(k, depth);
    let mut warnings = Vec::new();
    for c in classes {
        let rep = representative(&c);
        let holds = evaluate(a, &rep, None);
        if evaluate(a, &representative_with(&c, k + 1), None) != holds {
            warnings.push(SentenceWarning::OmegaSensitive(c.canonical().to_string()));
        }
        if evaluate(a, &with_leaf_generation(&rep, depth), None) != holds {
            warnings.push(SentenceWarning::DepthSensitive(c.canonical().to_string()));
        }
        if holds {
            event.insert(c)?;
        }
    }
    let value = conditioning.probability(&event, lambda)?;
    Ok(SentenceProbability {
        value,
        k,
        depth,
        conditioning,
        event,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{classify, parse_class};
    use crate::logic::{parse_formula, Dialect};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pmf_values() {
        assert!(close(
            poisson_pmf_capped(CapCount::Exactly(0), 2, 2.0),
            0.1353352832,
            1e-10
        ));
        assert!(close(
            poisson_pmf_capped(CapCount::Exactly(1), 2, 2.0),
            0.2706705665,
            1e-10
        ));
        assert!(close(
            poisson_pmf_capped(CapCount::Omega, 2, 2.0),
            0.5939941503,
            1e-10
        ));
    }

    #[test]
    fn unit_class_has_probability_one() {
        let u = GammaClass::unit(3);
        assert_eq!(class_probability_expr(&u), NiceExpr::int(1));
        assert_eq!(class_probability(&u, 2.0), 1.0);
        assert_eq!(
            finite_conditioned_probability(&u, 2.0, Subcritical::Reject),
            Ok(1.0)
        );
        assert!(close(
            infinite_conditioned_probability(&u, 2.0).unwrap(),
            1.0,
            1e-12
        ));
    }

    #[test]
    fn leaf_class_expression() {
        let leaf = classify(&RootedTree::singleton(), 1, 1);
        assert_eq!(class_probability_expr(&leaf).to_string(), "exp(-1*x)");
        let one = classify(&RootedTree::star(1), 1, 1);
        assert_eq!(class_probability_expr(&one).to_string(), "1-exp(-1*x)");
    }

    #[test]
    fn conditioning_examples() {
        let s = solve_survival(2.0).unwrap();
        assert!(close(s.p, 0.7968121300, 1e-9));
        assert!(close(s.q * (-s.q * 2.0).exp(), (-2.0f64).exp(), 1e-12));

        let none = classify(&RootedTree::singleton(), 1, 1);
        let omega = classify(&RootedTree::star(1), 1, 1);
        let fin = finite_conditioned_probability(&none, 2.0, Subcritical::Reject).unwrap();
        assert!(close(fin, (-0.4063757400f64).exp(), 1e-9));
        assert_eq!(infinite_conditioned_probability(&none, 2.0), Ok(0.0));
        assert!(close(
            infinite_conditioned_probability(&omega, 2.0).unwrap(),
            1.0,
            1e-12
        ));

        let one = classify(&RootedTree::star(1), 2, 1);
        let lambda = 2.0f64;
        assert!(close(
            infinite_conditioned_probability(&one, lambda).unwrap(),
            lambda * (-lambda).exp(),
            1e-12
        ));
    }

    #[test]
    fn subcritical_conditioning() {
        let c = classify(&RootedTree::singleton(), 1, 1);
        assert_eq!(
            infinite_conditioned_probability(&c, 1.0),
            Err(CalculusError::ZeroProbabilityConditioning(1.0))
        );
        assert_eq!(
            finite_conditioned_probability(&c, 0.5, Subcritical::Reject),
            Err(CalculusError::TrivialConditioning(0.5))
        );
        let v = finite_conditioned_probability(&c, 0.5, Subcritical::Unconditioned).unwrap();
        assert_eq!(v, (-0.5f64).exp());
    }

    #[test]
    fn five_factor_product() {
        let c = parse_class("{w:{1:*},3:{2:*},1:{w:*},2:{}}", Some(4), Some(2)).unwrap();
        let lambda = 2.0f64;
        let x = |n: CapCount| poisson_pmf_capped(n, 4, lambda);
        let (x0, x1, x2, x3, xw) = (
            x(CapCount::Exactly(0)),
            x(CapCount::Exactly(1)),
            x(CapCount::Exactly(2)),
            x(CapCount::Exactly(3)),
            x(CapCount::Omega),
        );
        let y = |p: f64| p * lambda;
        let expected = (-y(x3)).exp()
            * (-y(xw)).exp()
            * y(xw)
            * (1.0 - (-y(x1)).exp() * (1.0 + y(x1) + y(x1).powi(2) / 2.0 + y(x1).powi(3) / 6.0))
            * (-y(x0)).exp()
            * y(x0).powi(2)
            / 2.0
            * (-y(x2)).exp()
            * y(x2).powi(3)
            / 6.0;
        assert!(close(class_probability(&c, lambda), expected, 1e-12));
        assert!(close(
            class_probability_expr(&c).eval(lambda),
            expected,
            1e-12
        ));
    }

    #[test]
    fn sentence_examples() {
        let a = parse_formula("exists u. parent(R,u)", Dialect::Standard).unwrap();
        let r = sentence_probability(&a, 2.0, 1, Conditioning::Infinite).unwrap();
        assert!(close(r.value, 1.0, 1e-12));
        assert!(r.warnings.is_empty());

        let b = parse_formula("forall u. !parent(R,u)", Dialect::Standard).unwrap();
        let r = sentence_probability(&b, 2.0, 1, Conditioning::Unconditioned).unwrap();
        assert!(close(r.value, (-2.0f64).exp(), 1e-15));
        assert_eq!(r.event.len(), 1);
    }

    #[test]
    fn depth_sensitivity_is_reported() {
        // needs a grandchild but the locality depth is 1
        let a = parse_formula(
            "exists u. exists v. parent(R,u) & parent(u,v)",
            Dialect::Standard,
        )
        .unwrap();
        let r = sentence_probability(&a, 2.0, 1, Conditioning::Unconditioned).unwrap();
        assert!(r
            .warnings
            .iter()
            .any(|w| matches!(w, SentenceWarning::DepthSensitive(_))));
        // three children, counted with k = 2
        let b = parse_formula(
            "exists u. exists v. parent(R,u) & parent(R,v) & !(u = v)",
            Dialect::Standard,
        )
        .unwrap();
        assert!(
            sentence_probability(&b, 2.0, 1, Conditioning::Unconditioned)
                .unwrap()
                .warnings
                .is_empty()
        );
    }
}
