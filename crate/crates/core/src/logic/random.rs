use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Dialect, Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSentenceConfig {
    /// Upper bound on quantifier depth.
    pub max_depth: u32,
    /// Upper bound on the number of connectives and quantifiers.
    pub max_size: u32,
    pub dialect: Dialect,
}

impl RandomSentenceConfig {
    pub fn standard(max_depth: u32) -> Self {
        RandomSentenceConfig {
            max_depth,
            max_size: 8,
            dialect: Dialect::Standard,
        }
    }
}

/// Draws a random sentence. Bound variables are named `x1, x2, …` by
/// nesting level.
pub fn random_sentence<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomSentenceConfig) -> Formula {
    let mut budget = cfg.max_size;
    grow(rng, cfg, cfg.max_depth, &mut Vec::new(), &mut budget)
}

fn grow<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &RandomSentenceConfig,
    depth_left: u32,
    vars: &mut Vec<String>,
    budget: &mut u32,
) -> Formula {
    if *budget == 0 || rng.random_bool(0.25) {
        return atom(rng, cfg, vars);
    }
    *budget -= 1;
    let quantify = depth_left > 0 && rng.random_bool(0.45);
    if quantify {
        let name = format!("x{}", vars.len() + 1);
        vars.push(name.clone());
        let body = grow(rng, cfg, depth_left - 1, vars, budget);
        vars.pop();
        return if rng.random_bool(0.5) {
            Formula::exists(name, body)
        } else {
            Formula::forall(name, body)
        };
    }
    match rng.random_range(0..4) {
        0 => Formula::not(grow(rng, cfg, depth_left, vars, budget)),
        op => {
            let a = grow(rng, cfg, depth_left, vars, budget);
            let b = grow(rng, cfg, depth_left, vars, budget);
            match op {
                1 => Formula::and(a, b),
                2 => Formula::or(a, b),
                _ => Formula::implies(a, b),
            }
        }
    }
}

fn atom<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomSentenceConfig, vars: &[String]) -> Formula {
    let term = |rng: &mut R| {
        if vars.is_empty() || rng.random_bool(0.2) {
            Term::Root
        } else {
            Term::Var(vars[rng.random_range(0..vars.len())].clone())
        }
    };
    let (a, b) = (term(rng), term(rng));
    let kinds = match cfg.dialect {
        Dialect::Standard => 2,
        Dialect::Ball { .. } => 3,
    };
    match rng.random_range(0..kinds) {
        0 => Formula::eq(a, b),
        1 => Formula::parent(a, b),
        _ => {
            let Dialect::Ball { m } = cfg.dialect else {
                unreachable!()
            };
            Formula::Dist(a, b, rng.random_range(1..=m.max(1)))
        }
    }
}
