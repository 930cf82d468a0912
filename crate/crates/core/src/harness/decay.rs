//! How fast "T contains the pattern or T is finite" is settled by the first
//! `s` offspring draws.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::HarnessError;
use crate::sampler::{growth_trace, OffspringDistribution, Seed};
use crate::tree::RootedTree;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    #[serde(serialize_with = "parens")]
    pub pattern: RootedTree,
    pub lambda: f64,
    pub trials: u64,
    pub budgets: Vec<usize>,
    /// Fraction of trials not yet determined after `s` draws.
    pub bad_rates: Vec<f64>,
    pub bad_stderr: Vec<f64>,
    /// Least-squares slope of `ln(bad_rate)` against `s` over the positive
    /// rates; absent with fewer than two of them.
    pub fitted_log_slope: Option<f64>,
    pub seed: Seed,
    #[serde(skip)]
    pub wall_time: Duration,
}

fn parens<S: Serializer>(t: &RootedTree, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_parens())
}

impl DecayReport {
    /// Whether each rate is at most the previous one plus `sigmas`
    /// combined standard errors.
    pub fn non_increasing_within(&self, sigmas: f64) -> bool {
        self.bad_rates
            .windows(2)
            .zip(self.bad_stderr.windows(2))
            .all(|(r, e)| r[1] <= r[0] + sigmas * (e[0] * e[0] + e[1] * e[1]).sqrt())
    }
}

/// The tree revealed by a prefix of the draw sequence. Node `j` is the
/// `j`-th explored node, so exactly the nodes `0..expanded` have all of
/// their children present; `expanded` is less than `draws.len()` only when
/// the tree terminated early.
pub fn partial_tree(draws: &[u32]) -> (RootedTree, usize) {
    let mut parents = vec![None];
    let mut j = 0;
    while j < draws.len() && j < parents.len() {
        for _ in 0..draws[j] {
            parents.push(Some(j));
        }
        j += 1;
    }
    let t = RootedTree::from_parents(&parents).expect("breadth-first parents form a tree");
    (t, j)
}

/// The least `s` such that the first `s` draws force the event: either the
/// tree has terminated, or some node's subtree is complete among the first
/// `s` explored nodes and isomorphic to `pattern`. `None` if `draws` does
/// not get that far.
pub fn determined_within(draws: &[u32], pattern: &RootedTree) -> Option<usize> {
    let (t, expanded) = partial_tree(draws);
    if expanded == t.len() {
        return Some(expanded);
    }
    let want = pattern.canonical_form();
    let n = t.len();
    // bottom-up over breadth-first ids: subtree size and largest id, or None
    // when some node of the subtree is unexplored
    let mut closed: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut best: Option<usize> = None;
    for v in (0..n).rev() {
        if v >= expanded {
            continue;
        }
        let node = crate::tree::NodeId::from(v);
        let mut size = 1;
        let mut last = v;
        let mut ok = true;
        for c in t.children(node) {
            match closed[c.index()] {
                Some((s, l)) => {
                    size += s;
                    last = last.max(l);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        closed[v] = Some((size, last));
        if size == pattern.len()
            && best.map_or(true, |b| last + 1 < b)
            && t.subtree(node).canonical_form() == want
        {
            best = Some(last + 1);
        }
    }
    best
}

fn validate(pattern: &RootedTree, budgets: &[usize], trials: u64) -> Result<(), HarnessError> {
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    if budgets.is_empty() {
        return Err(HarnessError::Budgets("no budgets given".into()));
    }
    if budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Budgets(
            "budgets must be strictly increasing".into(),
        ));
    }
    if budgets[0] < pattern.len() {
        return Err(HarnessError::Budgets(format!(
            "budget {} is smaller than the pattern ({} nodes)",
            budgets[0],
            pattern.len()
        )));
    }
    Ok(())
}

/// Estimates `Pr[bad(s)]` for each budget: the event is neither settled by
/// termination nor by a complete copy of `pattern` within `s` draws.
pub fn containment_decay(
    pattern: &RootedTree,
    lambda: f64,
    budgets: &[usize],
    trials: u64,
    seed: Seed,
) -> Result<DecayReport, HarnessError> {
    validate(pattern, budgets, trials)?;
    let d = OffspringDistribution::poisson(lambda)?;
    let start = Instant::now();
    let max = *budgets.last().expect("validated");
    let times: Vec<Option<usize>> = (0..trials)
        .into_par_iter()
        .map(|t| determined_within(&growth_trace(&d, seed.trial(t), max).draws, pattern))
        .collect();
    let n = trials as f64;
    let bad_rates: Vec<f64> = budgets
        .iter()
        .map(|&s| {
            times
                .iter()
                .filter(|&&tau| tau.map_or(true, |tau| tau > s))
                .count() as f64
                / n
        })
        .collect();
    let bad_stderr = bad_rates
        .iter()
        .map(|&r| (r * (1.0 - r) / n).sqrt())
        .collect();
    let fitted_log_slope = log_slope(budgets, &bad_rates);
    Ok(DecayReport {
        pattern: pattern.clone(),
        lambda,
        trials,
        budgets: budgets.to_vec(),
        bad_rates,
        bad_stderr,
        fitted_log_slope,
        seed,
        wall_time: start.elapsed(),
    })
}

fn log_slope(budgets: &[usize], rates: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = budgets
        .iter()
        .zip(rates)
        .filter(|(_, &r)| r > 0.0)
        .map(|(&s, &r)| (s as f64, r.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}
