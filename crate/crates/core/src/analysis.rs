//! Market health, comparative statics over information reliability, and
//! cheapest spread routes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{equilibrium_closed_form, Equilibrium, MarketError, MarketParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("both markets are infeasible; health is undefined")]
    NoMarket,
    #[error("reliability {0} outside [0, 1]")]
    InvalidReliability(f64),
    #[error("reliability grid must be nonempty and strictly increasing")]
    InvalidGrid,
    #[error("a health curve needs at least two points")]
    TooFewPoints,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("no path from `{src}` to `{dst}`")]
    Unreachable { src: String, dst: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Equilibria of both markets at one reliability level. `None` marks an
/// infeasible market, which trades nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub fake: Option<Equilibrium>,
    pub true_: Option<Equilibrium>,
    pub reliability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HealthMetric {
    /// `Q_T / (Q_T + Q_F)`.
    #[default]
    QuantityShare,
    /// `w_T·Q_T / (w_T·Q_T + w_F·Q_F)`.
    Weighted { true_weight: f64, fake_weight: f64 },
}

pub fn market_health(state: &MarketState) -> Result<f64, AnalysisError> {
    market_health_with(state, &HealthMetric::QuantityShare)
}

pub fn market_health_with(state: &MarketState, metric: &HealthMetric) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&state.reliability) {
        return Err(AnalysisError::InvalidReliability(state.reliability));
    }
    if state.fake.is_none() && state.true_.is_none() {
        return Err(AnalysisError::NoMarket);
    }
    let q_fake = state.fake.map_or(0.0, |e| e.quantity);
    let q_true = state.true_.map_or(0.0, |e| e.quantity);
    let (t, f) = match *metric {
        HealthMetric::QuantityShare => (q_true, q_fake),
        HealthMetric::Weighted { true_weight, fake_weight } => (true_weight * q_true, fake_weight * q_fake),
    };
    if t + f == 0.0 {
        return Err(AnalysisError::NoMarket);
    }
    Ok(t / (t + f))
}

/// Parameters of both markets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketPair {
    pub fake: MarketParams,
    #[serde(rename = "true")]
    pub true_: MarketParams,
}

/// Solves both markets with demand intercepts scaled by reliability:
/// true news by `r`, fake news by `1 − r`.
pub fn market_state(pair: &MarketPair, reliability: f64) -> Result<MarketState, AnalysisError> {
    if !(0.0..=1.0).contains(&reliability) {
        return Err(AnalysisError::InvalidReliability(reliability));
    }
    let solve = |params: MarketParams, factor: f64| -> Result<Option<Equilibrium>, AnalysisError> {
        let scaled = MarketParams {
            demand_intercept: params.demand_intercept * factor,
            ..params
        };
        match equilibrium_closed_form(&scaled) {
            Ok(e) => Ok(Some(e)),
            Err(MarketError::InfeasibleEquilibrium { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    Ok(MarketState {
        fake: solve(pair.fake, 1.0 - reliability)?,
        true_: solve(pair.true_, reliability)?,
        reliability,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HealthCurve {
    /// `(reliability, health)` with strictly increasing reliability.
    pub points: Vec<(f64, f64)>,
}

fn check_grid(grid: &[f64]) -> Result<(), AnalysisError> {
    if grid.is_empty() || grid.iter().any(|r| r.is_nan()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::InvalidGrid);
    }
    if let Some(&r) = grid.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(AnalysisError::InvalidReliability(r));
    }
    Ok(())
}

pub fn health_curve(pair: &MarketPair, grid: &[f64], metric: &HealthMetric) -> Result<HealthCurve, AnalysisError> {
    check_grid(grid)?;
    let points = grid
        .iter()
        .map(|&r| Ok((r, market_health_with(&market_state(pair, r)?, metric)?)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(HealthCurve { points })
}

/// Health before and after a parameter change, on the same reliability grid.
pub fn comparative_sweep(
    base: &MarketPair,
    changed: &MarketPair,
    grid: &[f64],
    metric: &HealthMetric,
) -> Result<(HealthCurve, HealthCurve), AnalysisError> {
    Ok((health_curve(base, grid, metric)?, health_curve(changed, grid, metric)?))
}

/// Successive health differences, each paired with the right-hand reliability.
pub fn reliability_marginal_contribution(curve: &HealthCurve) -> Result<Vec<(f64, f64)>, AnalysisError> {
    if curve.points.len() < 2 {
        return Err(AnalysisError::TooFewPoints);
    }
    Ok(curve.points.windows(2).map(|w| (w[1].0, w[1].1 - w[0].1)).collect())
}

/// Directed channel graph with nonnegative spreading costs. Node indices
/// follow ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadGraph {
    nodes: Vec<String>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl SpreadGraph {
    pub fn new<S: AsRef<str>>(edges: &[(S, S, f64)]) -> Result<Self, AnalysisError> {
        Self::with_nodes(std::iter::empty::<&str>(), edges)
    }

    /// Like [`SpreadGraph::new`] but also registers isolated nodes.
    pub fn with_nodes<S: AsRef<str>, N: AsRef<str>>(
        nodes: impl IntoIterator<Item = N>,
        edges: &[(S, S, f64)],
    ) -> Result<Self, AnalysisError> {
        let mut ids: Vec<String> = nodes.into_iter().map(|n| n.as_ref().to_string()).collect();
        for (from, to, _) in edges {
            ids.push(from.as_ref().to_string());
            ids.push(to.as_ref().to_string());
        }
        ids.sort();
        ids.dedup();
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut adjacency = vec![Vec::new(); ids.len()];
        for (from, to, cost) in edges {
            let (from, to) = (from.as_ref(), to.as_ref());
            if from == to {
                return Err(AnalysisError::InvalidGraph(format!("self-loop on `{from}`")));
            }
            if !(cost.is_finite() && *cost >= 0.0) {
                return Err(AnalysisError::InvalidGraph(format!("edge {from}->{to} has cost {cost}")));
            }
            adjacency[index[from]].push((index[to], *cost));
        }
        Ok(SpreadGraph { nodes: ids, adjacency })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    /// Outgoing `(target, cost)` edges of node `i`.
    pub fn edges_from(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }
}

/// Parses an edge list with one `from to cost` triple per line; `#` starts a
/// comment.
pub fn parse_edge_list(text: &str) -> Result<SpreadGraph, AnalysisError> {
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |message: String| AnalysisError::Parse { line: i + 1, message };
        let [from, to, cost] = fields[..] else {
            return Err(err(format!("expected `from to cost`, got {} fields", fields.len())));
        };
        let cost: f64 = cost.parse().map_err(|_| err(format!("bad cost `{cost}`")))?;
        edges.push((from.to_string(), to.to_string(), cost));
    }
    SpreadGraph::new(&edges)
}

#[derive(Debug, Clone, PartialEq)]
struct Label {
    cost: f64,
    path: Vec<usize>,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.path.cmp(&self.path))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cheapest route from `src` to `dst`. Among equal-cost routes the
/// lexicographically smallest node sequence wins.
pub fn min_cost_spread_path(g: &SpreadGraph, src: &str, dst: &str) -> Result<(f64, Vec<String>), AnalysisError> {
    let s = g.index_of(src).ok_or_else(|| AnalysisError::UnknownNode(src.to_string()))?;
    let t = g.index_of(dst).ok_or_else(|| AnalysisError::UnknownNode(dst.to_string()))?;

    let n = g.nodes.len();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let start = Label { cost: 0.0, path: vec![s] };
    best[s] = Some(start.clone());
    heap.push(start);

    while let Some(label) = heap.pop() {
        let u = *label.path.last().expect("paths are never empty");
        if done[u] || best[u].as_ref() != Some(&label) {
            continue;
        }
        done[u] = true;
        if u == t {
            let path = label.path.iter().map(|&i| g.nodes[i].clone()).collect();
            return Ok((label.cost, path));
        }
        for &(v, w) in &g.adjacency[u] {
            if done[v] {
                continue;
            }
            let mut path = label.path.clone();
            path.push(v);
            let candidate = Label { cost: label.cost + w, path };
            let better = match &best[v] {
                None => true,
                // `Ord` is reversed, so "greater" means cheaper or lexicographically smaller.
                Some(cur) => candidate > *cur,
            };
            if better {
                best[v] = Some(candidate.clone());
                heap.push(candidate);
            }
        }
    }
    Err(AnalysisError::Unreachable {
        src: src.to_string(),
        dst: dst.to_string(),
    })
}
