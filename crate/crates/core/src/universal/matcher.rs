use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::games::{ehr_ball, GameError};
use crate::tree::{Ball, NodeId};

use super::distance_bound;

/// Canonical string of a ball with its center marked; equal strings mean
/// an isomorphism of the balls mapping center to center.
pub fn centered_form(b: &Ball) -> String {
    let t = b.tree();
    let mut form = vec![String::new(); t.len()];
    for v in t.bfs_order().into_iter().rev() {
        let mut kids: Vec<String> = t
            .children(v)
            .iter()
            .map(|c| std::mem::take(&mut form[c.index()]))
            .collect();
        kids.sort_unstable();
        let mark = if v == b.center() { "c" } else { "" };
        form[v.index()] = format!("{mark}({})", kids.concat());
    }
    std::mem::take(&mut form[t.root().index()])
}

/// What one round of the ball game sees: each node's distance to the center
/// and whether it is the center's parent or child.
fn one_round_profile(b: &Ball) -> BTreeSet<(u32, u8)> {
    let t = b.tree();
    let c = b.center();
    let mut dist = vec![u32::MAX; t.len()];
    dist[c.index()] = 0;
    let mut queue = VecDeque::from([c]);
    while let Some(v) = queue.pop_front() {
        for w in t.children(v).iter().copied().chain(t.parent(v)) {
            if dist[w.index()] == u32::MAX {
                dist[w.index()] = dist[v.index()] + 1;
                queue.push_back(w);
            }
        }
    }
    t.nodes()
        .map(|v: NodeId| {
            let rel = if t.is_parent(v, c) {
                1
            } else if t.is_parent(c, v) {
                2
            } else {
                0
            };
            (dist[v.index()], rel)
        })
        .collect()
}

/// Decides which of a growing list of pairwise inequivalent balls a given
/// ball is `(M_0, k)`-equivalent to. Results are cached by centered form;
/// balls whose one-round profiles differ are separated without search.
#[derive(Debug, Clone)]
pub struct BallMatcher {
    k: u32,
    entries: Vec<Ball>,
    forms: Vec<String>,
    profiles: Vec<BTreeSet<(u32, u8)>>,
    cache: HashMap<String, Option<usize>>,
    games: usize,
}

impl BallMatcher {
    pub fn new(k: u32) -> BallMatcher {
        BallMatcher {
            k,
            entries: Vec::new(),
            forms: Vec::new(),
            profiles: Vec::new(),
            cache: HashMap::new(),
            games: 0,
        }
    }

    pub fn push(&mut self, b: Ball) {
        self.forms.push(centered_form(&b));
        self.profiles.push(one_round_profile(&b));
        self.entries.push(b);
        self.cache.retain(|_, hit| hit.is_some());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Ball] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Ball> {
        self.entries
    }

    /// Games actually played so far.
    pub fn games_played(&self) -> usize {
        self.games
    }

    pub fn find(&mut self, b: &Ball) -> Result<Option<usize>, GameError> {
        let form = format!("{}:{}", b.radius(), centered_form(b));
        if let Some(&hit) = self.cache.get(&form) {
            return Ok(hit);
        }
        let bare = &form[form.find(':').expect("separator") + 1..];
        let profile = if self.k >= 1 {
            Some(one_round_profile(b))
        } else {
            None
        };
        let mut hit = None;
        for (i, e) in self.entries.iter().enumerate() {
            if e.radius() != b.radius() {
                continue;
            }
            if self.forms[i] == bare {
                hit = Some(i);
                break;
            }
            if profile.as_ref().is_some_and(|p| *p != self.profiles[i]) {
                continue;
            }
            self.games += 1;
            if ehr_ball(e, b, self.k, distance_bound(self.k))?.duplicator_wins() {
                hit = Some(i);
                break;
            }
        }
        self.cache.insert(form, hit);
        Ok(hit)
    }
}
