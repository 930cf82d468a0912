use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::SamplerError;

/// Above this mean Poisson draws fall back to `rand_distr`'s sampler.
const INVERSION_MAX_LAMBDA: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffspringDistribution {
    Poisson {
        lambda: f64,
    },
    /// `probabilities[i]` is the probability of exactly `i` children.
    FiniteSupport {
        probabilities: Vec<f64>,
    },
}

impl OffspringDistribution {
    pub fn poisson(lambda: f64) -> Result<Self, SamplerError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(SamplerError::InvalidLambda(lambda));
        }
        Ok(OffspringDistribution::Poisson { lambda })
    }

    pub fn finite_support(probabilities: Vec<f64>) -> Result<Self, SamplerError> {
        let sum: f64 = probabilities.iter().sum();
        let valid = !probabilities.is_empty()
            && probabilities.iter().all(|p| *p >= 0.0 && p.is_finite())
            && (sum - 1.0).abs() <= 1e-12;
        if !valid {
            return Err(SamplerError::InvalidProbabilities { sum });
        }
        Ok(OffspringDistribution::FiniteSupport { probabilities })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Poisson { lambda } => *lambda,
            Self::FiniteSupport { probabilities } => probabilities
                .iter()
                .enumerate()
                .map(|(i, p)| i as f64 * p)
                .sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Poisson { lambda } => *lambda,
            Self::FiniteSupport { probabilities } => {
                let m = self.mean();
                probabilities
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i as f64 - m).powi(2) * p)
                    .sum()
            }
        }
    }

    /// `ln E[e^{αX}]`.
    pub fn log_mgf(&self, alpha: f64) -> f64 {
        match self {
            Self::Poisson { lambda } => lambda * alpha.exp_m1(),
            Self::FiniteSupport { probabilities } => {
                // log-sum-exp over the support
                let terms: Vec<f64> = probabilities
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(i, p)| p.ln() + alpha * i as f64)
                    .collect();
                let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
            }
        }
    }

    /// Draws one offspring count. For repeated draws build an
    /// [`OffspringSampler`] once instead.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.sampler().draw(rng)
    }

    pub fn sampler(&self) -> OffspringSampler {
        match self {
            Self::Poisson { lambda } if *lambda <= INVERSION_MAX_LAMBDA => {
                OffspringSampler::Table(poisson_cdf(*lambda))
            }
            Self::Poisson { lambda } => {
                OffspringSampler::Large(Poisson::new(*lambda).expect("validated mean"))
            }
            Self::FiniteSupport { probabilities } => {
                let mut acc = 0.0;
                let cdf = probabilities
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                let last = probabilities
                    .iter()
                    .rposition(|p| *p > 0.0)
                    .expect("some mass") as u32;
                OffspringSampler::Finite { cdf, last }
            }
        }
    }
}

/// Precomputed inversion tables for fast repeated draws.
#[derive(Debug, Clone)]
pub enum OffspringSampler {
    /// Poisson cumulative sums up to the point where they stop changing in
    /// floating point; a uniform above every entry maps to `cdf.len()`.
    Table(Vec<f64>),
    Large(Poisson<f64>),
    Finite {
        cdf: Vec<f64>,
        last: u32,
    },
}

impl OffspringSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            Self::Table(cdf) => {
                let u: f64 = rng.random();
                cdf.iter().position(|c| u < *c).unwrap_or(cdf.len()) as u32
            }
            Self::Large(d) => d.sample(rng) as u32,
            Self::Finite { cdf, last } => {
                let u: f64 = rng.random();
                // u can land in the rounding gap above the last partial sum
                cdf.iter().position(|c| u < *c).map_or(*last, |i| i as u32)
            }
        }
    }
}

/// Cumulative sums of sequential-search inversion.
fn poisson_cdf(lambda: f64) -> Vec<f64> {
    let mut p = (-lambda).exp();
    let mut cdf = vec![p];
    let mut k = 0u32;
    loop {
        k += 1;
        p *= lambda / k as f64;
        let last = *cdf.last().expect("nonempty");
        let next = last + p;
        if next == last {
            return cdf;
        }
        cdf.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Seed;

    #[test]
    fn validation() {
        assert!(OffspringDistribution::poisson(0.0).is_err());
        assert!(OffspringDistribution::poisson(f64::NAN).is_err());
        assert!(OffspringDistribution::finite_support(vec![0.5, 0.4]).is_err());
        assert!(OffspringDistribution::finite_support(vec![-0.5, 1.5]).is_err());
        assert!(OffspringDistribution::finite_support(vec![]).is_err());
        assert!(OffspringDistribution::finite_support(vec![0.25, 0.5, 0.25]).is_ok());
    }

    fn check_mean(d: &OffspringDistribution, n: usize) {
        let mut rng = Seed(99).rng();
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = (d.variance() / n as f64).sqrt();
        assert!(
            (mean - d.mean()).abs() <= 4.0 * se,
            "{d:?}: mean {mean} vs {} (se {se})",
            d.mean()
        );
    }

    #[test]
    fn empirical_means_within_four_standard_errors() {
        for lambda in [0.5, 2.0, 7.5, 45.0] {
            check_mean(&OffspringDistribution::poisson(lambda).unwrap(), 100_000);
        }
        let fs = OffspringDistribution::finite_support(vec![0.2, 0.3, 0.0, 0.5]).unwrap();
        check_mean(&fs, 100_000);
    }

    #[test]
    fn poisson_frequencies_match_pmf() {
        let d = OffspringDistribution::poisson(2.0).unwrap();
        let mut rng = Seed(5).rng();
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let x = d.sample(&mut rng) as usize;
            if x < 4 {
                counts[x] += 1;
            }
        }
        let mut pmf = (-2.0f64).exp();
        for (i, &c) in counts.iter().enumerate() {
            if i > 0 {
                pmf *= 2.0 / i as f64;
            }
            let se = (pmf * (1.0 - pmf) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - pmf).abs() < 4.0 * se, "P({i})");
        }
    }

    /// Sequential search with no table, as a reference.
    fn reference_inversion(lambda: f64, u: f64) -> u32 {
        let mut k = 0u32;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        while u >= cdf {
            k += 1;
            p *= lambda / k as f64;
            if cdf + p == cdf {
                break;
            }
            cdf += p;
        }
        k
    }

    #[test]
    fn table_matches_sequential_search() {
        for lambda in [0.3, 2.0, 12.0, 30.0] {
            let s = OffspringDistribution::poisson(lambda).unwrap().sampler();
            let mut a = Seed(11).rng();
            let mut b = Seed(11).rng();
            for _ in 0..20_000 {
                let u: f64 = b.random();
                assert_eq!(s.draw(&mut a), reference_inversion(lambda, u));
            }
            for u in [0.0, 1.0 - f64::EPSILON / 2.0] {
                let OffspringSampler::Table(cdf) = &s else {
                    panic!()
                };
                let x = cdf.iter().position(|c| u < *c).unwrap_or(cdf.len()) as u32;
                assert_eq!(x, reference_inversion(lambda, u));
            }
        }
    }

    #[test]
    fn degenerate_support() {
        let d = OffspringDistribution::finite_support(vec![1.0]).unwrap();
        let mut rng = Seed(1).rng();
        assert!((0..100).all(|_| d.sample(&mut rng) == 0));
        assert_eq!(d.log_mgf(3.0), 0.0);
    }

    #[test]
    fn log_mgf_matches_direct_sum() {
        let d = OffspringDistribution::finite_support(vec![0.1, 0.6, 0.3]).unwrap();
        let direct = 0.1 + 0.6 * 0.7f64.exp() + 0.3 * 1.4f64.exp();
        assert!((d.log_mgf(0.7) - direct.ln()).abs() < 1e-14);
        let p = OffspringDistribution::poisson(2.0).unwrap();
        assert!((p.log_mgf(0.5) - 2.0 * (0.5f64.exp() - 1.0)).abs() < 1e-14);
    }
}
