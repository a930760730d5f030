//! Provider and consumer payoff functions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::NewsType;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PayoffError {
    #[error("fake payoff {fake_base} never exceeds truth payoff {truth_payoff}; no crossover harm")]
    NoCrossover { fake_base: f64, truth_payoff: f64 },
    #[error("invalid payoff parameters: {0}")]
    InvalidParams(String),
}

/// `U_p(kind) = base − cost_sensitivity · C_kind`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderParams {
    pub base: f64,
    pub cost_sensitivity: f64,
}

/// `U_c(kind) = base − disadvantage_sensitivity · D_kind`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumerParams {
    pub base: f64,
    pub disadvantage_sensitivity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSchedule {
    pub fake_cost: f64,
    pub true_cost: f64,
    pub fake_disadvantage: f64,
    pub true_disadvantage: f64,
}

impl CostSchedule {
    pub fn cost(&self, kind: NewsType) -> f64 {
        match kind {
            NewsType::Fake => self.fake_cost,
            NewsType::True => self.true_cost,
        }
    }

    pub fn disadvantage(&self, kind: NewsType) -> f64 {
        match kind {
            NewsType::Fake => self.fake_disadvantage,
            NewsType::True => self.true_disadvantage,
        }
    }
}

/// Repeated-game payoffs: fake news pays `fake_base − harm_penalty · H`,
/// true news pays a flat `truth_payoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarmPayoffParams {
    pub fake_base: f64,
    pub harm_penalty: f64,
    pub truth_payoff: f64,
}

impl Default for HarmPayoffParams {
    fn default() -> Self {
        HarmPayoffParams {
            fake_base: 5.0,
            harm_penalty: 2.0,
            truth_payoff: 3.0,
        }
    }
}

impl HarmPayoffParams {
    pub fn validate(&self) -> Result<(), PayoffError> {
        if !(self.harm_penalty.is_finite() && self.harm_penalty > 0.0) {
            return Err(PayoffError::InvalidParams(format!(
                "harm penalty must be positive, got {}",
                self.harm_penalty
            )));
        }
        if !(self.fake_base.is_finite() && self.truth_payoff.is_finite()) {
            return Err(PayoffError::InvalidParams(
                "payoffs must be finite".into(),
            ));
        }
        Ok(())
    }
}

pub fn provider_payoff(p: &ProviderParams, kind: NewsType, costs: &CostSchedule) -> f64 {
    p.base - p.cost_sensitivity * costs.cost(kind)
}

pub fn consumer_payoff(c: &ConsumerParams, kind: NewsType, costs: &CostSchedule) -> f64 {
    c.base - c.disadvantage_sensitivity * costs.disadvantage(kind)
}

pub fn harm_payoff(params: &HarmPayoffParams, action: NewsType, harm: f64) -> f64 {
    match action {
        NewsType::Fake => params.fake_base - params.harm_penalty * harm,
        NewsType::True => params.truth_payoff,
    }
}

/// Harm level at which fake and true news pay the same.
pub fn crossover_harm(params: &HarmPayoffParams) -> Result<f64, PayoffError> {
    params.validate()?;
    if params.fake_base < params.truth_payoff {
        return Err(PayoffError::NoCrossover {
            fake_base: params.fake_base,
            truth_payoff: params.truth_payoff,
        });
    }
    Ok((params.fake_base - params.truth_payoff) / params.harm_penalty)
}

/// Segment compensation `α_p · β_c · Q`, where `Q` is the quality of the
/// news kind being paid for.
pub fn compensation(alpha_p: f64, beta_c: f64, quality: f64) -> f64 {
    alpha_p * beta_c * quality
}

#[cfg(test)]
mod tests {
    use super::*;

    fn costs() -> CostSchedule {
        CostSchedule {
            fake_cost: 1.0,
            true_cost: 2.0,
            fake_disadvantage: 2.0,
            true_disadvantage: 0.5,
        }
    }

    #[test]
    fn provider_examples() {
        let zero = ProviderParams { base: 5.0, cost_sensitivity: 0.0 };
        assert_eq!(provider_payoff(&zero, NewsType::Fake, &costs()), 5.0);
        let p = ProviderParams { base: 5.0, cost_sensitivity: 2.0 };
        assert_eq!(provider_payoff(&p, NewsType::Fake, &costs()), 3.0);
        let p = ProviderParams { base: 4.0, cost_sensitivity: 1.0 };
        assert_eq!(provider_payoff(&p, NewsType::True, &costs()), 2.0);
    }

    #[test]
    fn consumer_examples() {
        let zero = ConsumerParams { base: 3.0, disadvantage_sensitivity: 0.0 };
        assert_eq!(consumer_payoff(&zero, NewsType::Fake, &costs()), 3.0);
        let c = ConsumerParams { base: 3.0, disadvantage_sensitivity: 1.0 };
        assert_eq!(consumer_payoff(&c, NewsType::Fake, &costs()), 1.0);
        assert_eq!(consumer_payoff(&c, NewsType::True, &costs()), 2.5);
    }

    #[test]
    fn harm_defaults() {
        let d = HarmPayoffParams::default();
        assert_eq!(harm_payoff(&d, NewsType::Fake, 0.0), 5.0);
        assert_eq!(harm_payoff(&d, NewsType::Fake, 1.0), 3.0);
        assert_eq!(harm_payoff(&d, NewsType::True, 7.0), 3.0);
        assert_eq!(crossover_harm(&d).unwrap(), 1.0);
    }

    #[test]
    fn crossover_edges() {
        let eq = HarmPayoffParams { fake_base: 3.0, harm_penalty: 1.0, truth_payoff: 3.0 };
        assert_eq!(crossover_harm(&eq).unwrap(), 0.0);
        let dominated = HarmPayoffParams { fake_base: 2.0, harm_penalty: 1.0, truth_payoff: 3.0 };
        assert!(matches!(crossover_harm(&dominated), Err(PayoffError::NoCrossover { .. })));
        let bad = HarmPayoffParams { harm_penalty: 0.0, ..Default::default() };
        assert!(matches!(crossover_harm(&bad), Err(PayoffError::InvalidParams(_))));
    }

    #[test]
    fn compensation_examples() {
        assert_eq!(compensation(1.0, 1.0, 7.5), 7.5);
        assert_eq!(compensation(2.0, 0.5, 10.0), 10.0);
        assert_eq!(compensation(0.0, 123.0, 456.0), 0.0);
    }
}
