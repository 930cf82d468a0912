//! Seeded Galton-Watson sampling.
//!
//! Trees are grown by the fictitious continuation: an i.i.d. sequence of
//! offspring draws consumed in breadth-first order, the `i`-th draw being the
//! number of children of the `i`-th explored node. The tree terminates at the
//! first `n` with `X_1 + ... + X_n = n - 1`.

mod chernoff;
mod distribution;
mod growth;
mod survival;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chernoff::{chernoff_feasible, ChernoffCheck};
pub use distribution::{OffspringDistribution, OffspringSampler};
pub use growth::{
    growth_trace, sample_forest, sample_tree, sample_truncated, Forest, GrowthTrace, SampleStatus,
    SampledTree,
};
pub use survival::{sample_surviving, SurvivalProxy, SurvivingSample};

/// RNG used for every sampling routine.
pub type SampleRng = ChaCha8Rng;

/// Default node budget for a single sampled tree.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("Poisson mean must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("offspring probabilities must be non-negative and sum to 1 (sum = {sum})")]
    InvalidProbabilities { sum: f64 },
    #[error("no surviving sample after {attempts} attempts")]
    NoSurvivingSample { attempts: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Master seed. Trial `t` of an experiment uses [`Seed::trial`], so trials
/// are reproducible independently of execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub const DEFAULT: Seed = Seed(0xC0FFEE);

    pub fn trial(self, t: u64) -> Seed {
        Seed(splitmix64(self.0 ^ t))
    }

    pub fn rng(self) -> SampleRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl Default for Seed {
    fn default() -> Self {
        Seed::DEFAULT
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
