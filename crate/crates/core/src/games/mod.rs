//! Ehrenfeucht games decided by memoized exhaustive search.
//!
//! Both games reduce to one engine: a list of already-matched pairs and a
//! compatibility predicate on a new pair. In the standard game the roots are
//! matched before play, which enforces the root and child-of-root clauses.
//! In the ball game the centers are matched in round zero and distances
//! between picks must agree.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{AhuInterner, Ball, NodeId, RootedTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Duplicator,
    Spoiler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameVerdict {
    pub winner: Winner,
    /// Distinct positions evaluated; a rough measure of search effort.
    pub positions: usize,
}

impl GameVerdict {
    pub fn duplicator_wins(&self) -> bool {
        self.winner == Winner::Duplicator
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GameMode {
    Standard,
    DistancePreserving { m: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("game search exceeded its deadline after {positions} positions")]
    DeadlineExceeded { positions: usize },
    #[error("distance bound must be at least 1")]
    InvalidDistanceBound,
}

/// `EHR[T1, T2; k]`.
pub fn ehr_standard(t1: &RootedTree, t2: &RootedTree, k: u32) -> GameVerdict {
    ehr_standard_until(t1, t2, k, None).expect("no deadline")
}

/// [`ehr_standard`] with an optional wall-clock deadline.
pub fn ehr_standard_until(
    t1: &RootedTree,
    t2: &RootedTree,
    k: u32,
    deadline: Option<Instant>,
) -> Result<GameVerdict, GameError> {
    let mut arena = Arena::new([t1, t2], GameMode::Standard, deadline);
    arena.solve(vec![(t1.root().0, t2.root().0)], k)
}

/// `EHR_M[B1, B2; k]`: the centers are played in round zero, then `k` rounds
/// follow. Every distance between picks is compared exactly; in the
/// paper's uses `M` exceeds the ball diameter, so this matches the
/// `d(x, y) = s`, `s <= M` predicates.
pub fn ehr_ball(b1: &Ball, b2: &Ball, k: u32, m: u32) -> Result<GameVerdict, GameError> {
    ehr_ball_until(b1, b2, k, m, None)
}

pub fn ehr_ball_until(
    b1: &Ball,
    b2: &Ball,
    k: u32,
    m: u32,
    deadline: Option<Instant>,
) -> Result<GameVerdict, GameError> {
    if m == 0 {
        return Err(GameError::InvalidDistanceBound);
    }
    let mut arena = Arena::new(
        [b1.tree(), b2.tree()],
        GameMode::DistancePreserving { m },
        deadline,
    );
    arena.solve(vec![(b1.center().0, b2.center().0)], k)
}

/// Above this size distances are computed on demand instead of tabulated.
const DISTANCE_TABLE_MAX: usize = 1500;

struct Arena<'a> {
    t: [&'a RootedTree; 2],
    /// Nearest earlier sibling with the same subtree shape.
    twin_prev: [Vec<Option<u32>>; 2],
    dist: [Option<Vec<u32>>; 2],
    mode: GameMode,
    memo: HashMap<(Vec<(u32, u32)>, u32), bool>,
    deadline: Option<Instant>,
    expired: bool,
}

impl<'a> Arena<'a> {
    fn new(t: [&'a RootedTree; 2], mode: GameMode, deadline: Option<Instant>) -> Self {
        let twin_prev = t.map(twin_links);
        let dist = t.map(|tree| match mode {
            GameMode::DistancePreserving { .. } if tree.len() <= DISTANCE_TABLE_MAX => {
                Some(distance_table(tree))
            }
            _ => None,
        });
        Arena {
            t,
            twin_prev,
            dist,
            mode,
            memo: HashMap::new(),
            deadline,
            expired: false,
        }
    }

    fn solve(&mut self, start: Vec<(u32, u32)>, k: u32) -> Result<GameVerdict, GameError> {
        let wins = self.wins(start, k);
        if self.expired {
            return Err(GameError::DeadlineExceeded {
                positions: self.memo.len(),
            });
        }
        Ok(GameVerdict {
            winner: if wins {
                Winner::Duplicator
            } else {
                Winner::Spoiler
            },
            positions: self.memo.len(),
        })
    }

    fn distance(&self, side: usize, a: u32, b: u32) -> u32 {
        match &self.dist[side] {
            Some(table) => table[a as usize * self.t[side].len() + b as usize],
            None => self.t[side].distance(NodeId(a), NodeId(b)),
        }
    }

    /// Whether `x ↦ y` extends the partial map `picks` (pairs are
    /// `(node in T1, node in T2)`).
    fn compatible(&self, picks: &[(u32, u32)], x: u32, y: u32) -> bool {
        let (t1, t2) = (self.t[0], self.t[1]);
        picks.iter().all(|&(a, b)| {
            let (na, nb, nx, ny) = (NodeId(a), NodeId(b), NodeId(x), NodeId(y));
            let parents = t1.is_parent(na, nx) == t2.is_parent(nb, ny)
                && t1.is_parent(nx, na) == t2.is_parent(ny, nb);
            parents
                && match self.mode {
                    GameMode::Standard => (a == x) == (b == y),
                    GameMode::DistancePreserving { .. } => {
                        self.distance(0, a, x) == self.distance(1, b, y)
                    }
                }
        })
    }

    /// Nodes Spoiler or Duplicator need not consider on `side`: those inside
    /// a pick-free subtree that has an earlier pick-free twin sibling. Swapping
    /// the two subtrees is an automorphism fixing every pick.
    fn redundant(&self, side: usize, picked: impl Iterator<Item = u32>) -> Vec<bool> {
        let t = self.t[side];
        let mut holds_pick = vec![false; t.len()];
        for p in picked {
            let mut v = Some(NodeId(p));
            while let Some(u) = v {
                if holds_pick[u.index()] {
                    break;
                }
                holds_pick[u.index()] = true;
                v = t.parent(u);
            }
        }
        let mut skip = vec![false; t.len()];
        let prev = &self.twin_prev[side];
        for v in t.bfs_order() {
            if let Some(p) = t.parent(v) {
                if skip[p.index()] {
                    skip[v.index()] = true;
                    continue;
                }
            }
            if holds_pick[v.index()] {
                continue;
            }
            // walk back through earlier twins looking for a pick-free one
            let mut w = prev[v.index()];
            while let Some(u) = w {
                if !holds_pick[u as usize] {
                    skip[v.index()] = true;
                    break;
                }
                w = prev[u as usize];
            }
        }
        skip
    }

    fn wins(&mut self, mut picks: Vec<(u32, u32)>, rounds: u32) -> bool {
        if rounds == 0 || self.expired {
            return true;
        }
        picks.sort_unstable();
        picks.dedup();
        let key = (picks, rounds);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        if let Some(deadline) = self.deadline {
            if self.memo.len() % 1024 == 0 && Instant::now() >= deadline {
                self.expired = true;
                return true;
            }
        }
        let picks = key.0.clone();
        let skip = [
            self.redundant(0, picks.iter().map(|p| p.0)),
            self.redundant(1, picks.iter().map(|p| p.1)),
        ];
        let mut result = true;
        'spoiler: for side in 0..2 {
            let other = 1 - side;
            for v in 0..self.t[side].len() as u32 {
                if skip[side][v as usize] || picks.iter().any(|p| side_of(*p, side) == v) {
                    continue;
                }
                let mut answered = false;
                for w in 0..self.t[other].len() as u32 {
                    if skip[other][w as usize] {
                        continue;
                    }
                    let (x, y) = if side == 0 { (v, w) } else { (w, v) };
                    if !self.compatible(&picks, x, y) {
                        continue;
                    }
                    let mut next = picks.clone();
                    next.push((x, y));
                    if self.wins(next, rounds - 1) {
                        answered = true;
                        break;
                    }
                }
                if !answered {
                    result = false;
                    break 'spoiler;
                }
            }
        }
        self.memo.insert(key, result);
        result
    }
}

fn side_of(pair: (u32, u32), side: usize) -> u32 {
    if side == 0 {
        pair.0
    } else {
        pair.1
    }
}

/// For each node, the nearest earlier sibling with an isomorphic subtree.
fn twin_links(t: &RootedTree) -> Vec<Option<u32>> {
    let labels = AhuInterner::new().label_tree(t);
    let mut prev = vec![None; t.len()];
    for v in t.nodes() {
        let mut last: HashMap<u32, u32> = HashMap::new();
        for &c in t.children(v) {
            let l = labels[c.index()];
            prev[c.index()] = last.insert(l, c.0);
        }
    }
    prev
}

fn distance_table(t: &RootedTree) -> Vec<u32> {
    let n = t.len();
    let mut table = vec![0u32; n * n];
    for s in t.nodes() {
        let row = &mut table[s.index() * n..(s.index() + 1) * n];
        row.fill(u32::MAX);
        row[s.index()] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            let d = row[x.index()];
            for y in t.children(x).iter().copied().chain(t.parent(x)) {
                if row[y.index()] == u32::MAX {
                    row[y.index()] = d + 1;
                    queue.push_back(y);
                }
            }
        }
    }
    table
}
