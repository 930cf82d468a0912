//! Universal trees: Christmas-tree construction and the two sufficient
//! conditions, plus spot checks of the universality property by game play.
//!
//! Radii use the strict ball `B(v; r) = {u : d(u, v) < r}`. The top of such
//! a ball around a deep center is `r - 1` steps up, so a catalog ball hung
//! with its top one step below the end of a string reproduces itself
//! exactly: the string end sits at distance `r` from the center, just
//! outside the ball.

mod matcher;

use std::collections::VecDeque;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::games::{ehr_standard_until, GameError};
use crate::sampler::{sample_tree, OffspringDistribution, Seed};
use crate::tree::{AhuInterner, Ball, NodeId, RootedTree, TreeBuilder};

pub use matcher::{centered_form, BallMatcher};

/// `3^e`.
fn pow3(e: u32) -> u32 {
    3u32.checked_pow(e).expect("3^e fits in u32")
}

/// Catalog ball radius `3^{k+1}`.
pub fn ball_radius(k: u32) -> u32 {
    pow3(k + 1)
}

/// Distance bound `M_0 = 2·3^{k+1}`.
pub fn distance_bound(k: u32) -> u32 {
    2 * pow3(k + 1)
}

/// Separation `3^{k+2}` required between witnesses and from the root.
pub fn separation(k: u32) -> u32 {
    pow3(k + 2)
}

/// String length `3^{k+4}`.
pub fn string_length(k: u32) -> u32 {
    pow3(k + 4)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniversalError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("entry {entry} has radius {radius}, expected {expected}")]
    Radius {
        entry: usize,
        radius: u32,
        expected: u32,
    },
    #[error("entry {entry}: center is {top_distance} below the ball top, expected {expected}; hanging it would change its own ball")]
    Shallow {
        entry: usize,
        top_distance: u32,
        expected: u32,
    },
    #[error("entries {0} and {1} are equivalent")]
    Equivalent(usize, usize),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Representative balls, pairwise inequivalent under the `(M_0, k)` ball
/// game, each of radius `3^{k+1}` with its center `3^{k+1} - 1` below the
/// top.
#[derive(Debug, Clone)]
pub struct BallCatalog {
    k: u32,
    entries: Vec<Ball>,
}

impl BallCatalog {
    pub fn new(k: u32, entries: Vec<Ball>) -> Result<BallCatalog, UniversalError> {
        if k == 0 {
            return Err(UniversalError::ZeroK);
        }
        let mut matcher = BallMatcher::new(k);
        for (i, b) in entries.iter().enumerate() {
            eligible(k, i, b)?;
            if let Some(j) = matcher.find(b)? {
                return Err(UniversalError::Equivalent(j, i));
            }
            matcher.push(b.clone());
        }
        Ok(BallCatalog { k, entries })
    }

    /// Keeps eligible candidates that are inequivalent to everything kept so
    /// far, stopping at `max_entries`.
    pub fn collect(
        k: u32,
        candidates: impl IntoIterator<Item = Ball>,
        max_entries: usize,
    ) -> Result<BallCatalog, UniversalError> {
        if k == 0 {
            return Err(UniversalError::ZeroK);
        }
        let mut matcher = BallMatcher::new(k);
        for b in candidates {
            if matcher.len() == max_entries {
                break;
            }
            if eligible(k, matcher.len(), &b).is_ok() && matcher.find(&b)?.is_none() {
                matcher.push(b);
            }
        }
        Ok(BallCatalog {
            k,
            entries: matcher.into_entries(),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn entries(&self) -> &[Ball] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// A matcher preloaded with the entries.
    pub fn matcher(&self) -> BallMatcher {
        let mut m = BallMatcher::new(self.k);
        for b in &self.entries {
            m.push(b.clone());
        }
        m
    }
}

fn eligible(k: u32, entry: usize, b: &Ball) -> Result<(), UniversalError> {
    let r = ball_radius(k);
    if b.radius() != r {
        return Err(UniversalError::Radius {
            entry,
            radius: b.radius(),
            expected: r,
        });
    }
    if b.top_distance() != r - 1 {
        return Err(UniversalError::Shallow {
            entry,
            top_distance: b.top_distance(),
            expected: r - 1,
        });
    }
    Ok(())
}

/// Root plus, for every catalog entry, `copies` branches: a string of
/// `3^{k+4}` edges ending at `w`, with the ball's top as a child of `w`.
#[derive(Debug, Clone)]
pub struct ChristmasTree {
    pub k: u32,
    pub tree: RootedTree,
    /// `centers[entry][copy]`.
    pub centers: Vec<Vec<NodeId>>,
    /// String ends `w`, same shape as `centers`.
    pub tops: Vec<Vec<NodeId>>,
}

pub fn build_christmas_tree(catalog: &BallCatalog) -> ChristmasTree {
    build_christmas_tree_with_copies(catalog, catalog.k() as usize)
}

/// As [`build_christmas_tree`] with a chosen number of copies per entry.
pub fn build_christmas_tree_with_copies(catalog: &BallCatalog, copies: usize) -> ChristmasTree {
    let k = catalog.k();
    let mut b = TreeBuilder::new();
    let root = b.root();
    let mut centers = Vec::new();
    let mut tops = Vec::new();
    for ball in catalog.entries() {
        let (mut cs, mut ws) = (Vec::new(), Vec::new());
        for _ in 0..copies {
            let mut w = root;
            for _ in 0..string_length(k) {
                w = b.add_child(w);
            }
            let ids = b.attach(w, ball.tree());
            cs.push(ids[ball.center().index()]);
            ws.push(w);
        }
        centers.push(cs);
        tops.push(ws);
    }
    ChristmasTree {
        k,
        tree: b.build(),
        centers,
        tops,
    }
}

impl ChristmasTree {
    /// The free-branch argument: with `copies >= k` centers per entry, each
    /// in its own root branch at distance `3^{k+4} + 3^{k+1}` and with the
    /// entry's ball around it, any `k - 1` selections leave one branch of
    /// every entry untouched, and its center is a valid next selection.
    pub fn free_branch_certificate(&self, catalog: &BallCatalog) -> Point2Report {
        let k = self.k;
        let fail = |reason: String| Point2Report {
            passed: false,
            method: Point2Method::FreeBranch,
            failure: Some(reason),
            blocking_sets: 0,
        };
        let expected = string_length(k) + ball_radius(k);
        let mut branches = std::collections::HashSet::new();
        for (e, cs) in self.centers.iter().enumerate() {
            if cs.len() < k as usize {
                return fail(format!("entry {e} has {} copies, needs {k}", cs.len()));
            }
            let want = centered_form(&catalog.entries()[e]);
            for &c in cs {
                if self.tree.depth(c) != expected {
                    return fail(format!(
                        "center {c} of entry {e} is not at distance {expected}"
                    ));
                }
                if !branches.insert(branch_of(&self.tree, c)) {
                    return fail(format!("center {c} of entry {e} shares a branch"));
                }
                if centered_form(&self.tree.ball(c, ball_radius(k))) != want {
                    return fail(format!("ball around center {c} differs from entry {e}"));
                }
            }
        }
        Point2Report {
            passed: true,
            method: Point2Method::FreeBranch,
            failure: None,
            blocking_sets: 0,
        }
    }
}

fn branch_of(t: &RootedTree, mut v: NodeId) -> NodeId {
    while let Some(p) = t.parent(v) {
        if p == t.root() {
            return v;
        }
        v = p;
    }
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Point1Report {
    pub passed: bool,
    /// `witnesses[entry]`: chosen centers, as node ids of the checked tree.
    pub witnesses: Vec<Vec<u32>>,
    /// Candidate counts per entry before separation is enforced.
    pub candidates: Vec<usize>,
    pub failure: Option<String>,
}

/// Nodes deeper than `3^{k+2}` whose ball is equivalent to each entry.
fn candidates(t: &RootedTree, catalog: &BallCatalog) -> Result<Vec<Vec<NodeId>>, GameError> {
    let k = catalog.k();
    let mut matcher = catalog.matcher();
    let mut out = vec![Vec::new(); catalog.len()];
    for v in t.nodes() {
        if t.depth(v) <= separation(k) {
            continue;
        }
        if let Some(e) = matcher.find(&t.ball(v, ball_radius(k)))? {
            out[e].push(v);
        }
    }
    Ok(out)
}

/// Condition one: `k` witnesses per entry, deeper than `3^{k+2}`, pairwise
/// more than `3^{k+2}` apart, with equivalent balls.
pub fn check_point1(t: &RootedTree, catalog: &BallCatalog) -> Result<Point1Report, GameError> {
    let k = catalog.k() as usize;
    let sep = separation(catalog.k());
    let cands = candidates(t, catalog)?;
    let counts: Vec<usize> = cands.iter().map(Vec::len).collect();
    let report = |witnesses, failure: Option<String>| Point1Report {
        passed: failure.is_none(),
        witnesses,
        candidates: counts.clone(),
        failure,
    };
    if let Some(e) = counts.iter().position(|&n| n < k) {
        return Ok(report(
            Vec::new(),
            Some(format!(
                "entry {e}: {} of {k} witnesses available",
                counts[e]
            )),
        ));
    }
    // slots ordered so scarce entries are filled first
    let mut slots: Vec<usize> = (0..catalog.len())
        .flat_map(|e| std::iter::repeat(e).take(k))
        .collect();
    slots.sort_by_key(|&e| counts[e]);
    let mut chosen: Vec<NodeId> = Vec::new();
    let mut budget = 1_000_000usize;
    if !assign(t, &cands, &slots, sep, &mut chosen, &mut budget) {
        let why = if budget == 0 {
            "search budget exhausted"
        } else {
            "no assignment keeps witnesses separated"
        };
        return Ok(report(Vec::new(), Some(why.into())));
    }
    let mut witnesses = vec![Vec::new(); catalog.len()];
    for (&e, v) in slots.iter().zip(&chosen) {
        witnesses[e].push(v.0);
    }
    Ok(report(witnesses, None))
}

fn assign(
    t: &RootedTree,
    cands: &[Vec<NodeId>],
    slots: &[usize],
    sep: u32,
    chosen: &mut Vec<NodeId>,
    budget: &mut usize,
) -> bool {
    let Some(&e) = slots.get(chosen.len()) else {
        return true;
    };
    for &v in &cands[e] {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if chosen.iter().all(|&u| t.distance(u, v) > sep) {
            chosen.push(v);
            if assign(t, cands, slots, sep, chosen, budget) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Point2Method {
    Exhaustive,
    FreeBranch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Point2Report {
    pub passed: bool,
    pub method: Point2Method,
    pub failure: Option<String>,
    /// Distinct maximal sets of candidates a single selection can block.
    pub blocking_sets: usize,
}

/// Condition two by adversarial search: for every `i <= k`, every
/// `u_1..u_{i-1}` and every entry, some candidate lies more than `3^{k+2}`
/// from all of them.
///
/// Selections matter only through the candidates they block, so the search
/// runs over maximal blocked sets rather than nodes. The result is exact.
pub fn check_point2(
    t: &RootedTree,
    catalog: &BallCatalog,
    k: u32,
) -> Result<Point2Report, GameError> {
    let sep = separation(catalog.k());
    let cands = candidates(t, catalog)?;
    let flat: Vec<(usize, NodeId)> = cands
        .iter()
        .enumerate()
        .flat_map(|(e, vs)| vs.iter().map(move |&v| (e, v)))
        .collect();
    // blocked[u] = candidates within distance sep of u
    let mut blocked: Vec<Vec<usize>> = vec![Vec::new(); t.len()];
    for (ci, &(_, c)) in flat.iter().enumerate() {
        for u in within(t, c, sep) {
            blocked[u.index()].push(ci);
        }
    }
    let mut sets: Vec<(Vec<usize>, NodeId)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for u in t.nodes() {
        let s = &blocked[u.index()];
        if !s.is_empty() && seen.insert(s.clone()) {
            sets.push((s.clone(), u));
        }
    }
    let maximal: Vec<(Vec<usize>, NodeId)> = sets
        .iter()
        .filter(|(s, _)| {
            !sets
                .iter()
                .any(|(o, _)| o.len() > s.len() && s.iter().all(|x| o.binary_search(x).is_ok()))
        })
        .cloned()
        .collect();
    let report = |failure: Option<String>| Point2Report {
        passed: failure.is_none(),
        method: Point2Method::Exhaustive,
        failure,
        blocking_sets: maximal.len(),
    };
    let mut prefix = Vec::new();
    for i in 1..=k as usize {
        if let Some((entry, nodes)) = adversary(&maximal, &flat, cands.len(), i - 1, 0, &mut prefix)
        {
            let ids: Vec<String> = nodes.iter().map(|v| v.to_string()).collect();
            return Ok(report(Some(format!(
                "after selecting [{}], entry {entry} has no valid next node",
                ids.join(", ")
            ))));
        }
    }
    Ok(report(None))
}

/// Searches multisets of `left` more blocked sets (indices `>= from`) for
/// one that blocks every candidate of some entry.
fn adversary(
    maximal: &[(Vec<usize>, NodeId)],
    flat: &[(usize, NodeId)],
    entries: usize,
    left: usize,
    from: usize,
    prefix: &mut Vec<usize>,
) -> Option<(usize, Vec<NodeId>)> {
    if left == 0 {
        let mut free = vec![false; entries];
        for (ci, &(e, _)) in flat.iter().enumerate() {
            if !prefix
                .iter()
                .any(|&s| maximal[s].0.binary_search(&ci).is_ok())
            {
                free[e] = true;
            }
        }
        return free
            .iter()
            .position(|f| !f)
            .map(|e| (e, prefix.iter().map(|&s| maximal[s].1).collect()));
    }
    for s in from..maximal.len() {
        prefix.push(s);
        let found = adversary(maximal, flat, entries, left - 1, s, prefix);
        prefix.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Nodes at distance at most `r` from `c`.
fn within(t: &RootedTree, c: NodeId, r: u32) -> Vec<NodeId> {
    let mut dist = std::collections::HashMap::from([(c, 0u32)]);
    let mut queue = VecDeque::from([c]);
    let mut out = vec![c];
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d == r {
            continue;
        }
        for w in t.children(v).iter().copied().chain(t.parent(v)) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(d + 1);
                out.push(w);
                queue.push_back(w);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpotCheckReport {
    pub k: u32,
    /// Pairs that met the hypotheses and were played.
    pub checked: usize,
    pub duplicator_wins: usize,
    /// Indices of played pairs that Spoiler won.
    pub counterexamples: Vec<usize>,
    pub rejected: Vec<Rejection>,
    /// Indices whose game hit the deadline.
    pub timed_out: Vec<usize>,
}

impl SpotCheckReport {
    pub fn all_duplicator(&self) -> bool {
        self.counterexamples.is_empty() && self.timed_out.is_empty()
    }
}

/// Why a pair misses the universality hypotheses for `t_univ`: root balls
/// of radius `3^{k+1}` must be equivalent and both trees must contain a copy
/// of `t_univ` deeper than `3^{k+2}`. `None` when both hold.
pub fn hypothesis_failure(
    t_univ: &RootedTree,
    k: u32,
    t1: &RootedTree,
    t2: &RootedTree,
) -> Result<Option<String>, GameError> {
    let r = ball_radius(k);
    let mut m = BallMatcher::new(k);
    m.push(t1.ball(t1.root(), r));
    if m.find(&t2.ball(t2.root(), r))?.is_none() {
        return Ok(Some("root balls are not equivalent".into()));
    }
    let mut interner = AhuInterner::new();
    let target = interner.label_tree(t_univ)[t_univ.root().index()];
    for (j, t) in [t1, t2].into_iter().enumerate() {
        let labels = interner.label_tree(t);
        let deep = t
            .nodes()
            .any(|v| labels[v.index()] == target && t.depth(v) > separation(k));
        if !deep {
            return Ok(Some(format!(
                "tree {} has no copy of the universal tree deeper than {}",
                j + 1,
                separation(k)
            )));
        }
    }
    Ok(None)
}

/// Plays `EHR[T1, T2; k]` on every pair meeting the universality
/// hypotheses for `t_univ`; pairs that miss them are rejected with a reason.
pub fn universality_spot_check(
    t_univ: &RootedTree,
    k: u32,
    trials: &[(RootedTree, RootedTree)],
    deadline: Option<Instant>,
) -> Result<SpotCheckReport, GameError> {
    let mut report = SpotCheckReport {
        k,
        checked: 0,
        duplicator_wins: 0,
        counterexamples: Vec::new(),
        rejected: Vec::new(),
        timed_out: Vec::new(),
    };
    for (index, (t1, t2)) in trials.iter().enumerate() {
        if let Some(reason) = hypothesis_failure(t_univ, k, t1, t2)? {
            report.rejected.push(Rejection { index, reason });
            continue;
        }
        report.checked += 1;
        match ehr_standard_until(t1, t2, k, deadline) {
            Ok(v) if v.duplicator_wins() => report.duplicator_wins += 1,
            Ok(_) => report.counterexamples.push(index),
            Err(GameError::DeadlineExceeded { .. }) => report.timed_out.push(index),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

/// Random candidate pairs for [`universality_spot_check`]. Each tree is a
/// small Poisson(1) head with two strings leaving the root neighbourhood:
/// one ends in a copy of `t_univ`, the other in a stray Poisson(1) tree.
/// String lengths and stray trees vary freely. Three pairs in four share
/// the head; the rest draw heads independently and may fail the
/// hypotheses.
pub fn spot_check_pairs(
    t_univ: &RootedTree,
    k: u32,
    count: usize,
    seed: Seed,
) -> Vec<(RootedTree, RootedTree)> {
    let d = OffspringDistribution::poisson(1.0).expect("valid λ");
    let mut rng = seed.rng();
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count {
        let h1 = sample_tree(&d, Seed(rng.random()), 40).tree.truncate(3);
        let h2 = if i % 4 == 3 {
            sample_tree(&d, Seed(rng.random()), 40).tree.truncate(3)
        } else {
            h1.clone()
        };
        let t1 = dress(&h1, t_univ, k, &d, &mut rng);
        let t2 = dress(&h2, t_univ, k, &d, &mut rng);
        pairs.push((t1, t2));
    }
    pairs
}

fn dress(
    head: &RootedTree,
    t_univ: &RootedTree,
    k: u32,
    d: &OffspringDistribution,
    rng: &mut impl Rng,
) -> RootedTree {
    let (mut b, _) = TreeBuilder::from_tree(head);
    let mut end = b.root();
    for _ in 0..separation(k) + rng.random_range(1..20) {
        end = b.add_child(end);
    }
    b.attach(end, t_univ);
    let stray = sample_tree(d, Seed(rng.random()), 200).tree;
    let mut end = b.root();
    for _ in 0..ball_radius(k) + rng.random_range(0..10) {
        end = b.add_child(end);
    }
    b.attach(end, &stray);
    b.build()
}
