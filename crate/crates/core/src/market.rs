//! Linear supply/demand markets for fake and true news.
//!
//! Supply is `S(P) = a·P` and demand is `D(P) = b − c·P`. The clearing price
//! `P* = b / (a + c)` has a closed form; [`equilibrium_numeric`] solves the
//! general monotone case by bisection and doubles as the oracle for the
//! closed form.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Absolute/relative residual tolerance for numerically solved equilibria.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Hard cap on bisection steps.
pub const MAX_BISECTION_STEPS: usize = 200;
/// Number of points probed when checking monotonicity of user curves.
pub const MONOTONICITY_PROBES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("invalid market parameters: {0}")]
    InvalidParams(String),
    #[error("infeasible equilibrium: demand intercept {intercept} gives a non-positive price and quantity")]
    InfeasibleEquilibrium { intercept: f64 },
    #[error("no sign change of supply minus demand on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("{curve} curve is not monotone near price {price}")]
    NonMonotone { curve: &'static str, price: f64 },
    #[error("bisection stopped with residual {residual} above tolerance")]
    NoConvergence { residual: f64 },
}

/// The two kinds of news traded in the market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NewsType {
    Fake,
    True,
}

impl NewsType {
    pub const ALL: [NewsType; 2] = [NewsType::Fake, NewsType::True];
}

impl fmt::Display for NewsType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NewsType::Fake => "Fake",
            NewsType::True => "True",
        })
    }
}

/// Coefficients of one linear market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    /// Quantity supplied per unit of price (`a`).
    pub supply_slope: f64,
    /// Quantity demanded at price zero (`b`).
    pub demand_intercept: f64,
    /// Quantity lost per unit of price (`c`).
    pub demand_slope: f64,
}

impl MarketParams {
    pub fn new(supply_slope: f64, demand_intercept: f64, demand_slope: f64) -> Self {
        MarketParams {
            supply_slope,
            demand_intercept,
            demand_slope,
        }
    }

    pub fn supply(&self, price: f64) -> f64 {
        self.supply_slope * price
    }

    pub fn demand(&self, price: f64) -> f64 {
        self.demand_intercept - self.demand_slope * price
    }

    /// Checks slopes are strictly positive and every coefficient is finite.
    pub fn validate(&self) -> Result<(), MarketError> {
        if !(self.supply_slope.is_finite() && self.supply_slope > 0.0) {
            return Err(MarketError::InvalidParams(format!(
                "supply slope must be positive, got {}",
                self.supply_slope
            )));
        }
        if !(self.demand_slope.is_finite() && self.demand_slope > 0.0) {
            return Err(MarketError::InvalidParams(format!(
                "demand slope must be positive, got {}",
                self.demand_slope
            )));
        }
        if !self.demand_intercept.is_finite() {
            return Err(MarketError::InvalidParams(
                "demand intercept must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// A market-clearing price and the quantity traded at it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub price: f64,
    pub quantity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Neutral,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Neutral => "neutral",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub classification: Stability,
    /// Cobweb price trace, starting with the initial price.
    pub iterates: Vec<f64>,
}

/// Closed-form equilibrium `P* = b/(a+c)`, `Q* = a·P*`.
pub fn equilibrium_closed_form(params: &MarketParams) -> Result<Equilibrium, MarketError> {
    params.validate()?;
    if params.demand_intercept <= 0.0 {
        return Err(MarketError::InfeasibleEquilibrium {
            intercept: params.demand_intercept,
        });
    }
    let price = params.demand_intercept / (params.supply_slope + params.demand_slope);
    Ok(Equilibrium {
        price,
        quantity: params.supply(price),
    })
}

/// Finds the price where a nondecreasing supply meets a nonincreasing demand
/// inside `bracket` by bisection on `supply − demand`.
pub fn equilibrium_numeric<S, D>(
    supply: S,
    demand: D,
    bracket: (f64, f64),
) -> Result<Equilibrium, MarketError>
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(MarketError::InvalidParams(format!(
            "bad bracket [{lo}, {hi}]"
        )));
    }
    probe_monotone(&supply, &demand, lo, hi)?;

    let excess = |p: f64| supply(p) - demand(p);
    let f_lo = excess(lo);
    let f_hi = excess(hi);
    if f_lo == 0.0 {
        return Ok(Equilibrium {
            price: lo,
            quantity: supply(lo),
        });
    }
    if f_hi == 0.0 {
        return Ok(Equilibrium {
            price: hi,
            quantity: supply(hi),
        });
    }
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(MarketError::NoRoot { lo, hi });
    }

    for _ in 0..MAX_BISECTION_STEPS {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = excess(mid);
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Prefer whichever endpoint clears the market better.
    let price = if excess(lo).abs() <= excess(hi).abs() {
        lo
    } else {
        hi
    };
    let quantity = supply(price);
    let residual = excess(price).abs();
    if residual > RESIDUAL_TOLERANCE * (1.0 + quantity.abs()) {
        return Err(MarketError::NoConvergence { residual });
    }
    Ok(Equilibrium { price, quantity })
}

fn probe_monotone<S, D>(supply: &S, demand: &D, lo: f64, hi: f64) -> Result<(), MarketError>
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let step = (hi - lo) / (MONOTONICITY_PROBES - 1) as f64;
    let mut prev_price = lo;
    let mut prev_s = supply(lo);
    let mut prev_d = demand(lo);
    for i in 1..MONOTONICITY_PROBES {
        let p = if i == MONOTONICITY_PROBES - 1 {
            hi
        } else {
            lo + step * i as f64
        };
        let s = supply(p);
        let d = demand(p);
        if s.is_nan() || s < prev_s {
            return Err(MarketError::NonMonotone {
                curve: "supply",
                price: prev_price,
            });
        }
        if d.is_nan() || d > prev_d {
            return Err(MarketError::NonMonotone {
                curve: "demand",
                price: prev_price,
            });
        }
        prev_price = p;
        prev_s = s;
        prev_d = d;
    }
    Ok(())
}

/// Cobweb dynamic `p_{t+1} = (b − a·p_t)/c`: next price is the one at which
/// demand absorbs the quantity supplied at the current price.
///
/// Classification depends only on `a/c`: below one the trace spirals into
/// `P*`, equal to one it oscillates forever, above one it diverges.
pub fn stability_cobweb(
    params: &MarketParams,
    start_price: f64,
    steps: usize,
) -> Result<StabilityReport, MarketError> {
    params.validate()?;
    if steps == 0 {
        return Err(MarketError::InvalidParams(
            "cobweb needs at least one step".into(),
        ));
    }
    let a = params.supply_slope;
    let c = params.demand_slope;
    let classification = if a == c {
        Stability::Neutral
    } else if a < c {
        Stability::Stable
    } else {
        Stability::Unstable
    };

    let mut iterates = Vec::with_capacity(steps);
    let mut p = start_price;
    iterates.push(p);
    while iterates.len() < steps {
        p = (params.demand_intercept - a * p) / c;
        iterates.push(p);
    }
    Ok(StabilityReport {
        classification,
        iterates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn closed_form_examples() {
        let e = equilibrium_closed_form(&MarketParams::new(1.0, 10.0, 1.0)).unwrap();
        assert_eq!((e.price, e.quantity), (5.0, 5.0));
        let e = equilibrium_closed_form(&MarketParams::new(2.0, 12.0, 1.0)).unwrap();
        assert_eq!((e.price, e.quantity), (4.0, 8.0));
    }

    #[test]
    fn non_positive_intercept_is_infeasible() {
        for b in [0.0, -3.0] {
            let err = equilibrium_closed_form(&MarketParams::new(1.0, b, 1.0)).unwrap_err();
            assert!(matches!(err, MarketError::InfeasibleEquilibrium { .. }));
        }
    }

    #[test]
    fn invalid_slopes_rejected() {
        assert!(matches!(
            equilibrium_closed_form(&MarketParams::new(0.0, 1.0, 1.0)),
            Err(MarketError::InvalidParams(_))
        ));
        assert!(matches!(
            equilibrium_closed_form(&MarketParams::new(1.0, 1.0, -1.0)),
            Err(MarketError::InvalidParams(_))
        ));
        assert!(matches!(
            equilibrium_closed_form(&MarketParams::new(1.0, f64::NAN, 1.0)),
            Err(MarketError::InvalidParams(_))
        ));
    }

    #[test]
    fn numeric_matches_linear() {
        let m = MarketParams::new(1.0, 10.0, 1.0);
        let e = equilibrium_numeric(|p| m.supply(p), |p| m.demand(p), (0.0, 10.0)).unwrap();
        assert!(close(e.price, 5.0, 1e-9));
    }

    #[test]
    fn numeric_quadratic_supply() {
        // p² = 10 − p  →  p = (−1 + √41)/2
        let expected = (-1.0 + 41f64.sqrt()) / 2.0;
        let e = equilibrium_numeric(|p| p * p, |p| 10.0 - p, (0.0, 10.0)).unwrap();
        assert!(close(e.price, expected, 1e-9));
        assert!(close(e.price, 2.7016, 1e-4));
        assert!((e.price * e.price - (10.0 - e.price)).abs() <= 1e-9 * (1.0 + e.quantity));
    }

    #[test]
    fn numeric_degenerate_and_no_root() {
        // Identical curves clear everywhere; the lower bracket end is reported.
        let e = equilibrium_numeric(|_| 3.0, |_| 3.0, (1.0, 2.0)).unwrap();
        assert_eq!(e.price, 1.0);
        // Supply always above demand.
        let err = equilibrium_numeric(|_| 5.0, |_| 3.0, (0.0, 1.0)).unwrap_err();
        assert!(matches!(err, MarketError::NoRoot { .. }));
    }

    #[test]
    fn numeric_rejects_non_monotone() {
        let err = equilibrium_numeric(|p: f64| (p * 3.0).sin(), |p| 1.0 - p, (0.0, 3.0)).unwrap_err();
        assert!(matches!(err, MarketError::NonMonotone { curve: "supply", .. }));
        let err = equilibrium_numeric(|p| p, |p: f64| p * p, (0.0, 3.0)).unwrap_err();
        assert!(matches!(err, MarketError::NonMonotone { curve: "demand", .. }));
    }

    #[test]
    fn cobweb_examples() {
        let r = stability_cobweb(&MarketParams::new(1.0, 10.0, 2.0), 1.0, 80).unwrap();
        assert_eq!(r.classification, Stability::Stable);
        assert_eq!(r.iterates.len(), 80);
        assert!(close(*r.iterates.last().unwrap(), 10.0 / 3.0, 1e-12));

        let r = stability_cobweb(&MarketParams::new(1.0, 10.0, 1.0), 4.0, 5).unwrap();
        assert_eq!(r.classification, Stability::Neutral);
        assert_eq!(r.iterates, vec![4.0, 6.0, 4.0, 6.0, 4.0]);

        let r = stability_cobweb(&MarketParams::new(3.0, 10.0, 1.0), 2.6, 10).unwrap();
        assert_eq!(r.classification, Stability::Unstable);
        let first = (r.iterates[0] - 2.5).abs();
        let last = (r.iterates[9] - 2.5).abs();
        assert!(last > first * 1000.0);
    }

    #[test]
    fn cobweb_needs_a_step() {
        assert!(stability_cobweb(&MarketParams::new(1.0, 1.0, 1.0), 0.0, 0).is_err());
    }
}
