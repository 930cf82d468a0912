use serde::Serialize;

use super::CalculusError;

/// Survival probability `p` of a Poisson(λ) tree and `q = 1 - p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalSolution {
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
}

impl SurvivalSolution {
    /// `|1 - p - e^{-pλ}|`.
    pub fn residual(&self) -> f64 {
        (1.0 - self.p - (-self.p * self.lambda).exp()).abs()
    }
}

/// Solves `1 - p = e^{-pλ}` for the positive root. For `λ <= 1` the answer
/// is `p = 0` exactly.
pub fn solve_survival(lambda: f64) -> Result<SurvivalSolution, CalculusError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CalculusError::InvalidLambda(lambda));
    }
    if lambda <= 1.0 {
        return Ok(SurvivalSolution {
            lambda,
            p: 0.0,
            q: 1.0,
        });
    }
    let g = |p: f64| 1.0 - p - (-lambda * p).exp();
    let (mut lo, mut hi) = (1e-12, 1.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut p = 0.5 * (lo + hi);
    for _ in 0..5 {
        let slope = -1.0 + lambda * (-lambda * p).exp();
        if slope == 0.0 {
            break;
        }
        let next = p - g(p) / slope;
        if !(next > 0.0 && next < 1.0) {
            break;
        }
        p = next;
    }
    Ok(SurvivalSolution {
        lambda,
        p,
        q: 1.0 - p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_and_subcritical() {
        for lambda in [0.1, 0.5, 1.0] {
            let s = solve_survival(lambda).unwrap();
            assert_eq!((s.p, s.q), (0.0, 1.0));
        }
        assert!(solve_survival(0.0).is_err());
        assert!(solve_survival(-1.0).is_err());
        assert!(solve_survival(f64::NAN).is_err());
    }

    #[test]
    fn supercritical_residuals() {
        for lambda in [1.001, 1.01, 1.5, 2.0, 4.0, 10.0, 50.0] {
            let s = solve_survival(lambda).unwrap();
            assert!(s.residual() <= 1e-12, "λ={lambda}");
            assert!((s.q - (-s.p * lambda).exp()).abs() <= 1e-12);
            // fixed-point iteration cross-check
            let mut p = 1.0f64;
            for _ in 0..100_000 {
                p = 1.0 - (-lambda * p).exp();
            }
            assert!((p - s.p).abs() < 1e-6, "λ={lambda}: {p} vs {}", s.p);
        }
    }
}
