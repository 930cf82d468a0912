use serde::{Deserialize, Serialize};

use super::{OffspringDistribution, SamplerError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffCheck {
    /// `φ(α)^ε · e^{-α(1-ε)}` where `φ` is the moment generating function.
    pub value: f64,
    /// `value < 1`.
    pub feasible: bool,
}

/// Evaluates the Chernoff condition for user-supplied `α` and `ε`. Computed
/// in log space so large `α` does not overflow.
pub fn chernoff_feasible(
    d: &OffspringDistribution,
    alpha: f64,
    epsilon: f64,
) -> Result<ChernoffCheck, SamplerError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SamplerError::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SamplerError::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let log_value = epsilon * d.log_mgf(alpha) - alpha * (1.0 - epsilon);
    Ok(ChernoffCheck {
        value: log_value.exp(),
        feasible: log_value < 0.0,
    })
}
