use serde::{Deserialize, Serialize};

use super::{OffspringDistribution, SampleRng, Seed};
use crate::tree::{NodeId, RootedTree, TreeBuilder};

/// The realized draws `X_1, X_2, …` and where the tree terminated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthTrace {
    pub draws: Vec<u32>,
    /// First `n` with `X_1 + … + X_n = n - 1`, if it occurs among the draws.
    pub terminated_at: Option<usize>,
}

impl GrowthTrace {
    /// Scans a draw sequence for its termination index.
    pub fn from_draws(draws: Vec<u32>) -> Self {
        let mut discovered = 1u64;
        let mut terminated_at = None;
        for (i, &x) in draws.iter().enumerate() {
            discovered += u64::from(x);
            if discovered == i as u64 + 1 {
                terminated_at = Some(i + 1);
                break;
            }
        }
        GrowthTrace {
            draws,
            terminated_at,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Complete,
    /// The budget ran out first; the tree holds every expanded node and the
    /// children they revealed.
    Truncated,
}

#[derive(Debug, Clone)]
pub struct SampledTree {
    pub tree: RootedTree,
    pub trace: GrowthTrace,
    pub status: SampleStatus,
}

fn draw_loop(
    d: &OffspringDistribution,
    rng: &mut SampleRng,
    budget: usize,
    mut on_draw: impl FnMut(usize, u32),
) -> GrowthTrace {
    let mut draws = Vec::new();
    let mut discovered = 1usize;
    let mut terminated_at = None;
    let mut j = 0;
    let sampler = d.sampler();
    while j < budget {
        let x = sampler.draw(rng);
        draws.push(x);
        on_draw(j, x);
        discovered += x as usize;
        j += 1;
        if discovered == j {
            terminated_at = Some(j);
            break;
        }
    }
    GrowthTrace {
        draws,
        terminated_at,
    }
}

/// Runs the fictitious continuation for at most `budget` draws without
/// materializing the tree.
pub fn growth_trace(d: &OffspringDistribution, seed: Seed, budget: usize) -> GrowthTrace {
    assert!(budget >= 1, "budget must be at least 1");
    draw_loop(d, &mut seed.rng(), budget, |_, _| {})
}

/// Grows one tree in breadth-first order, expanding at most `budget` nodes.
/// Node ids are breadth-first indices: node `i` (0-based) received draw
/// `i + 1`.
pub fn sample_tree(d: &OffspringDistribution, seed: Seed, budget: usize) -> SampledTree {
    assert!(budget >= 1, "budget must be at least 1");
    let mut b = TreeBuilder::new();
    let trace = draw_loop(d, &mut seed.rng(), budget, |j, x| {
        for _ in 0..x {
            b.add_child(NodeId::from(j));
        }
    });
    let status = if trace.terminated_at.is_some() {
        SampleStatus::Complete
    } else {
        SampleStatus::Truncated
    };
    SampledTree {
        tree: b.build(),
        trace,
        status,
    }
}

/// `T|_generations` drawn directly: nodes of the last kept generation are
/// never expanded. Because breadth-first order finishes a generation before
/// starting the next, this equals truncating [`sample_tree`] for the same
/// seed.
pub fn sample_truncated(d: &OffspringDistribution, seed: Seed, generations: u32) -> RootedTree {
    let mut rng = seed.rng();
    let sampler = d.sampler();
    let mut b = TreeBuilder::new();
    let mut depth = vec![0u32];
    let mut j = 0;
    while j < depth.len() {
        if depth[j] >= generations {
            break;
        }
        let x = sampler.draw(&mut rng);
        for _ in 0..x {
            b.add_child(NodeId::from(j));
            depth.push(depth[j] + 1);
        }
        j += 1;
    }
    b.build()
}

/// The forest process: when a tree terminates the next draw starts a fresh
/// root. Indices are 1-based global positions, as in the text.
#[derive(Debug, Clone)]
pub struct Forest {
    pub trees: Vec<RootedTree>,
    pub trace: GrowthTrace,
    /// Global index of each tree's root.
    pub roots: Vec<usize>,
    /// `children[i - 1]` lists the global indices of node `i`'s children.
    pub children: Vec<Vec<usize>>,
    /// Whether the last tree terminated within the draws.
    pub last_complete: bool,
}

impl Forest {
    /// `g_1(x)`: the highest index among nodes `1..=⌊x⌋` and their children.
    pub fn g1(&self, x: f64) -> usize {
        let fx = x.floor() as usize;
        assert!(fx <= self.children.len(), "g1 needs draws for 1..={fx}");
        self.children[..fx]
            .iter()
            .flatten()
            .copied()
            .chain(std::iter::once(fx))
            .max()
            .unwrap_or(0)
    }
}

/// Consumes exactly `total_nodes` draws of the forest process.
pub fn sample_forest(d: &OffspringDistribution, seed: Seed, total_nodes: usize) -> Forest {
    assert!(total_nodes >= 1, "forest needs at least one node");
    let mut rng = seed.rng();
    let sampler = d.sampler();
    let draws: Vec<u32> = (0..total_nodes).map(|_| sampler.draw(&mut rng)).collect();
    forest_from_draws(draws)
}

pub(crate) fn forest_from_draws(draws: Vec<u32>) -> Forest {
    let mut children = Vec::with_capacity(draws.len());
    let mut roots = Vec::new();
    let mut trees = Vec::new();
    // (global index of the current root, builder, global -> local offset)
    let mut current: Option<(usize, TreeBuilder)> = None;
    let mut discovered = 0usize;
    let mut last_complete = false;
    for (pos, &x) in draws.iter().enumerate() {
        let i = pos + 1;
        if i > discovered {
            roots.push(i);
            current = Some((i, TreeBuilder::new()));
            discovered = i;
        }
        let (root, b) = current.as_mut().expect("tree in progress");
        // within one tree, local id = global index - root index
        let local = NodeId::from(i - *root);
        let kids: Vec<usize> = (discovered + 1..=discovered + x as usize).collect();
        for _ in 0..x {
            b.add_child(local);
        }
        discovered += x as usize;
        children.push(kids);
        last_complete = i == discovered;
        if last_complete {
            let (_, b) = current.take().expect("tree in progress");
            trees.push(b.build());
        }
    }
    if let Some((_, b)) = current {
        trees.push(b.build());
    }
    let trace = GrowthTrace::from_draws(draws);
    Forest {
        trees,
        trace,
        roots,
        children,
        last_complete,
    }
}
