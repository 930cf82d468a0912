//! Survival proxy: rejection sampling of trees that reach a target depth.
//!
//! Each node's offspring count is an independent draw, so the order in which
//! nodes are expanded does not change the law of the tree. The explorer goes
//! depth-first until it reaches the target generation (or exhausts the tree),
//! then fills in the generations the caller wants complete.

use serde::{Deserialize, Serialize};

use super::{OffspringDistribution, OffspringSampler, SampleRng, SamplerError, Seed};
use crate::tree::RootedTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivalProxy {
    /// A sample is accepted once some node reaches this generation.
    pub depth: u32,
    /// Maximum expanded nodes per attempt; attempts over budget are rejected.
    pub budget: usize,
    /// Maximum number of attempts before giving up.
    pub max_attempts: usize,
    /// Generations `0..=complete_generations` are fully present in the
    /// returned tree.
    pub complete_generations: u32,
}

impl SurvivalProxy {
    pub fn new(depth: u32, complete_generations: u32) -> Self {
        SurvivalProxy {
            depth,
            budget: super::DEFAULT_BUDGET,
            max_attempts: 10_000,
            complete_generations,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurvivingSample {
    pub tree: RootedTree,
    /// Attempts used, including the accepted one.
    pub attempts: usize,
    /// `expanded[v]` is true when all of `v`'s children are in the tree.
    pub expanded: Vec<bool>,
}

struct Explorer<'a> {
    d: &'a OffspringSampler,
    parent: Vec<Option<usize>>,
    depth: Vec<u32>,
    expanded: Vec<bool>,
    expansions: usize,
}

impl<'a> Explorer<'a> {
    fn new(d: &'a OffspringSampler) -> Self {
        Explorer {
            d,
            parent: vec![None],
            depth: vec![0],
            expanded: vec![false],
            expansions: 0,
        }
    }

    /// Returns the range of new child ids.
    fn expand(&mut self, v: usize, rng: &mut SampleRng) -> std::ops::Range<usize> {
        debug_assert!(!self.expanded[v]);
        let x = self.d.draw(rng) as usize;
        self.expanded[v] = true;
        self.expansions += 1;
        let start = self.parent.len();
        for _ in 0..x {
            self.parent.push(Some(v));
            self.depth.push(self.depth[v] + 1);
            self.expanded.push(false);
        }
        start..start + x
    }
}

pub fn sample_surviving(
    d: &OffspringDistribution,
    seed: Seed,
    proxy: &SurvivalProxy,
) -> Result<SurvivingSample, SamplerError> {
    if proxy.depth == 0 {
        return Err(SamplerError::InvalidParameter(
            "survival depth must be at least 1".into(),
        ));
    }
    let mut rng = seed.rng();
    let sampler = d.sampler();
    for attempt in 1..=proxy.max_attempts {
        let mut ex = Explorer::new(&sampler);
        if !reaches_depth(&mut ex, &mut rng, proxy) {
            continue;
        }
        // complete the requested generations breadth-first
        let mut v = 0;
        while v < ex.parent.len() {
            if !ex.expanded[v] && ex.depth[v] < proxy.complete_generations {
                ex.expand(v, &mut rng);
            }
            v += 1;
        }
        let tree = RootedTree::from_parents(&ex.parent).expect("explorer builds a tree");
        return Ok(SurvivingSample {
            tree,
            attempts: attempt,
            expanded: ex.expanded,
        });
    }
    Err(SamplerError::NoSurvivingSample {
        attempts: proxy.max_attempts,
    })
}

fn reaches_depth(ex: &mut Explorer<'_>, rng: &mut SampleRng, proxy: &SurvivalProxy) -> bool {
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        if ex.expansions >= proxy.budget {
            return false;
        }
        let kids = ex.expand(v, rng);
        if !kids.is_empty() && ex.depth[v] + 1 >= proxy.depth {
            return true;
        }
        stack.extend(kids.rev());
    }
    false
}
