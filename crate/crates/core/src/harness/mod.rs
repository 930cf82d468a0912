//! Monte Carlo experiments against the exact class calculus.
//!
//! Every trial `t` draws from `seed.trial(t)`, so a report depends only on
//! its parameters and master seed. Counts are integers, which keeps the
//! parallel reduction order-independent.

mod decay;
mod emit;

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::calculus::{infinite_conditioned_probability, CalculusError, ClassProbabilities};
use crate::classes::{classify, enumerate_classes, ClassError, GammaClass};
use crate::sampler::{
    sample_surviving, sample_truncated, OffspringDistribution, SamplerError, Seed, SurvivalProxy,
};

pub use decay::{containment_decay, determined_within, partial_tree, DecayReport};
pub use emit::{report_emit, to_json, Emit, ReportFormat, Z_BOUND};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("invalid budgets: {0}")]
    Budgets(String),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("could not write report: {0}")]
    Emit(String),
}

/// One binomial estimate, optionally compared to an exact value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub experiment: String,
    pub parameters: BTreeMap<String, Value>,
    pub trials: u64,
    pub estimate: f64,
    /// `sqrt(estimate (1 - estimate) / trials)`.
    pub stderr: f64,
    pub exact: Option<f64>,
    /// `(estimate - exact) / sqrt(exact (1 - exact) / trials)`; present iff
    /// `exact` is.
    pub z_score: Option<f64>,
    pub seed: Seed,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl McReport {
    pub fn binomial(
        experiment: impl Into<String>,
        parameters: BTreeMap<String, Value>,
        hits: u64,
        trials: u64,
        exact: Option<f64>,
        seed: Seed,
    ) -> McReport {
        let n = trials as f64;
        let estimate = hits as f64 / n;
        McReport {
            experiment: experiment.into(),
            parameters,
            trials,
            estimate,
            stderr: (estimate * (1.0 - estimate) / n).sqrt(),
            exact,
            z_score: exact.map(|p| z_score(estimate, p, trials)),
            seed,
            wall_time: Duration::ZERO,
        }
    }

    /// Expected number of hits under the exact value.
    pub fn expected_count(&self) -> Option<f64> {
        self.exact.map(|p| p * self.trials as f64)
    }
}

/// z-score against the null standard error. A zero-variance null gives 0
/// when matched exactly and infinity otherwise.
pub fn z_score(estimate: f64, exact: f64, trials: u64) -> f64 {
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    let diff = estimate - exact;
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

fn count_classes(
    trials: u64,
    sample: impl Fn(u64) -> Result<GammaClass, HarnessError> + Send + Sync,
) -> Result<HashMap<GammaClass, u64>, HarnessError> {
    (0..trials)
        .into_par_iter()
        .map(sample)
        .try_fold(HashMap::new, |mut acc, c| {
            *acc.entry(c?).or_insert(0u64) += 1;
            Ok(acc)
        })
        .try_reduce(HashMap::new, |mut a, b| {
            for (c, n) in b {
                *a.entry(c).or_insert(0) += n;
            }
            Ok(a)
        })
}

fn class_parameters(lambda: f64, k: u32, i: u32, c: &GammaClass) -> BTreeMap<String, Value> {
    BTreeMap::from([
        ("lambda".to_string(), Value::from(lambda)),
        ("k".to_string(), Value::from(k)),
        ("i".to_string(), Value::from(i)),
        ("class".to_string(), Value::from(c.canonical())),
    ])
}

/// Samples `T|_i` under Poisson(λ) and tabulates `Γ_i` classes against
/// their exact probabilities. One row per enumerated class.
pub fn mc_class_frequencies(
    lambda: f64,
    k: u32,
    i: u32,
    trials: u64,
    seed: Seed,
) -> Result<Vec<McReport>, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let start = Instant::now();
    let d = OffspringDistribution::poisson(lambda)?;
    let all = enumerate_classes(k, i, crate::classes::DEFAULT_ENUMERATION_CAP)?;
    let counts = count_classes(trials, |t| {
        Ok(classify(&sample_truncated(&d, seed.trial(t), i), k, i))
    })?;
    let mut exact = ClassProbabilities::new(lambda);
    let wall_time = start.elapsed();
    Ok(all
        .iter()
        .map(|c| {
            let hits = counts.get(c).copied().unwrap_or(0);
            let mut r = McReport::binomial(
                "class_frequencies",
                class_parameters(lambda, k, i, c),
                hits,
                trials,
                Some(exact.get(c)),
                seed,
            );
            r.wall_time = wall_time;
            r
        })
        .collect())
}

/// Class frequencies of trees conditioned to reach depth `proxy_depth`,
/// against the exact `Pr*`. A second block of rows at depth
/// `proxy_depth + 10` shows how much the proxy moves the estimates.
pub fn mc_conditional_frequencies(
    lambda: f64,
    k: u32,
    i: u32,
    trials: u64,
    proxy_depth: u32,
    seed: Seed,
) -> Result<Vec<McReport>, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    if lambda.is_nan() || lambda <= 1.0 {
        return Err(CalculusError::ZeroProbabilityConditioning(lambda).into());
    }
    let d = OffspringDistribution::poisson(lambda)?;
    let all = enumerate_classes(k, i, crate::classes::DEFAULT_ENUMERATION_CAP)?;
    let exact: Vec<f64> = all
        .iter()
        .map(|c| infinite_conditioned_probability(c, lambda))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(2 * all.len());
    for depth in [proxy_depth, proxy_depth + 10] {
        let start = Instant::now();
        let proxy = SurvivalProxy::new(depth, i);
        let counts = count_classes(trials, |t| {
            let s = sample_surviving(&d, seed.trial(t), &proxy)?;
            Ok(classify(&s.tree.truncate(i), k, i))
        })?;
        let wall_time = start.elapsed();
        for (c, &p) in all.iter().zip(&exact) {
            let mut params = class_parameters(lambda, k, i, c);
            params.insert("proxy_depth".into(), Value::from(depth));
            let hits = counts.get(c).copied().unwrap_or(0);
            let mut r = McReport::binomial(
                "conditional_frequencies",
                params,
                hits,
                trials,
                Some(p),
                seed,
            );
            r.wall_time = wall_time;
            out.push(r);
        }
    }
    Ok(out)
}
