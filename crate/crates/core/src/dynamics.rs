//! Information retention and utility curves over information sets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Decay rates swept when a scenario does not list its own.
pub const DEFAULT_GAMMA_GRID: [f64; 4] = [0.1, 0.3, 0.5, 1.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid retention parameters: {0}")]
    InvalidRetention(String),
    #[error("invalid curve parameters: {0}")]
    InvalidCurve(String),
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetentionParams {
    pub initial: f64,
    pub gamma: f64,
}

impl RetentionParams {
    pub fn new(initial: f64, gamma: f64) -> Result<Self, DynamicsError> {
        if !(0.0..=1.0).contains(&initial) {
            return Err(DynamicsError::InvalidRetention(format!(
                "initial retention {initial} outside [0, 1]"
            )));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(DynamicsError::InvalidRetention(format!(
                "decay rate {gamma} must be nonnegative"
            )));
        }
        Ok(RetentionParams { initial, gamma })
    }
}

/// `R0 · e^(−γ t)`.
pub fn retention(params: &RetentionParams, t: f64) -> Result<f64, DynamicsError> {
    if t.is_nan() || t < 0.0 {
        return Err(DynamicsError::NegativeTime(t));
    }
    Ok(params.initial * (-params.gamma * t).exp())
}

/// Utility of holding `k` pieces of information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum UtilityCurve {
    /// Harmonic diminishing returns `c · Σ_{i≤k} 1/i`.
    Submodular { scale: f64 },
    /// Compounding interaction `c · k^α` with `α > 1`.
    Metzler { scale: f64, exponent: f64 },
}

impl UtilityCurve {
    pub fn submodular(scale: f64) -> Result<Self, DynamicsError> {
        let curve = UtilityCurve::Submodular { scale };
        curve.validate()?;
        Ok(curve)
    }

    pub fn metzler(scale: f64, exponent: f64) -> Result<Self, DynamicsError> {
        let curve = UtilityCurve::Metzler { scale, exponent };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        match *self {
            UtilityCurve::Submodular { scale } | UtilityCurve::Metzler { scale, .. }
                if !(scale.is_finite() && scale >= 0.0) =>
            {
                Err(DynamicsError::InvalidCurve(format!("scale {scale} must be nonnegative")))
            }
            UtilityCurve::Metzler { exponent, .. } if !(exponent.is_finite() && exponent > 1.0) => {
                Err(DynamicsError::InvalidCurve(format!("exponent {exponent} must exceed 1")))
            }
            _ => Ok(()),
        }
    }

    pub fn shape(&self) -> IncrementShape {
        match self {
            UtilityCurve::Submodular { .. } => IncrementShape::Nonincreasing,
            UtilityCurve::Metzler { .. } => IncrementShape::Nondecreasing,
        }
    }
}

impl Default for UtilityCurve {
    fn default() -> Self {
        UtilityCurve::Submodular { scale: 1.0 }
    }
}

pub fn utility(curve: &UtilityCurve, k: u64) -> f64 {
    match *curve {
        // Summed term by term in ascending order so that marginal
        // contributions telescope back to this value bit for bit.
        UtilityCurve::Submodular { scale } => (1..=k).fold(0.0, |acc, i| acc + scale / i as f64),
        UtilityCurve::Metzler { scale, exponent } => {
            if k == 0 {
                0.0
            } else {
                scale * (k as f64).powf(exponent)
            }
        }
    }
}

/// Utility gained from the `(k+1)`-th piece of information.
pub fn info_marginal_contribution(curve: &UtilityCurve, k: u64) -> f64 {
    match *curve {
        UtilityCurve::Submodular { scale } => scale / (k + 1) as f64,
        UtilityCurve::Metzler { .. } => utility(curve, k + 1) - utility(curve, k),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncrementShape {
    Nonincreasing,
    Nondecreasing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Pass,
    /// Increment at `k + 1` broke the expected ordering against the one at `k`.
    Fail { k: u64, delta: f64, next_delta: f64 },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Checks the increments `f(k+1) − f(k)` for `k < n` against `shape`.
pub fn check_increments<F: Fn(u64) -> f64>(f: F, shape: IncrementShape, n: u64) -> Verdict {
    let mut prev_value = f(0);
    let mut prev_delta: Option<f64> = None;
    for k in 0..n {
        let next_value = f(k + 1);
        let delta = next_value - prev_value;
        if let Some(p) = prev_delta {
            let ok = match shape {
                IncrementShape::Nonincreasing => delta <= p,
                IncrementShape::Nondecreasing => delta >= p,
            };
            if !ok {
                return Verdict::Fail { k: k - 1, delta: p, next_delta: delta };
            }
        }
        prev_delta = Some(delta);
        prev_value = next_value;
    }
    Verdict::Pass
}

pub fn check_increment_profile(curve: &UtilityCurve, n: u64) -> Verdict {
    check_increments(|k| utility(curve, k), curve.shape(), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retention_examples() {
        let p = RetentionParams::new(0.8, 0.3).unwrap();
        assert_eq!(retention(&p, 0.0).unwrap(), 0.8);
        let flat = RetentionParams::new(0.6, 0.0).unwrap();
        assert_eq!(retention(&flat, 17.0).unwrap(), 0.6);
        let unit = RetentionParams::new(1.0, 0.5).unwrap();
        assert!((retention(&unit, 2.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!(retention(&unit, -1.0).is_err());
    }

    #[test]
    fn retention_param_checks() {
        assert!(RetentionParams::new(1.5, 0.1).is_err());
        assert!(RetentionParams::new(0.5, -0.1).is_err());
    }

    #[test]
    fn utility_examples() {
        let s = UtilityCurve::submodular(1.0).unwrap();
        let m = UtilityCurve::metzler(1.0, 2.0).unwrap();
        assert_eq!(utility(&s, 0), 0.0);
        assert_eq!(utility(&m, 0), 0.0);
        assert_eq!(utility(&s, 2), 1.5);
        assert_eq!(utility(&m, 3), 9.0);
    }

    #[test]
    fn marginal_examples() {
        assert_eq!(info_marginal_contribution(&UtilityCurve::submodular(1.0).unwrap(), 0), 1.0);
        assert_eq!(info_marginal_contribution(&UtilityCurve::metzler(1.0, 2.0).unwrap(), 2), 5.0);
        assert_eq!(info_marginal_contribution(&UtilityCurve::submodular(0.0).unwrap(), 4), 0.0);
        assert_eq!(info_marginal_contribution(&UtilityCurve::metzler(0.0, 3.0).unwrap(), 4), 0.0);
    }

    #[test]
    fn increment_profiles() {
        assert!(check_increment_profile(&UtilityCurve::submodular(1.0).unwrap(), 100).passed());
        assert!(check_increment_profile(&UtilityCurve::metzler(1.0, 2.0).unwrap(), 100).passed());
        for shape in [IncrementShape::Nonincreasing, IncrementShape::Nondecreasing] {
            assert!(check_increments(|_| 4.0, shape, 50).passed());
        }
        // A convex curve checked as submodular fails at the first pair.
        let v = check_increments(|k| (k * k) as f64, IncrementShape::Nonincreasing, 10);
        assert_eq!(v, Verdict::Fail { k: 0, delta: 1.0, next_delta: 3.0 });
    }

    #[test]
    fn bad_curves() {
        assert!(UtilityCurve::metzler(1.0, 1.0).is_err());
        assert!(UtilityCurve::submodular(-1.0).is_err());
    }
}
