//! Iterated true/fake news game between two providers.
//!
//! Each round both players pick an action, are paid through
//! [`harm_payoff`](crate::payoffs::harm_payoff) at their harm level *before*
//! the round, and then accumulate harm and audience acceptance.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::NewsType;
use crate::payoffs::{harm_payoff, HarmPayoffParams};
use crate::voting::{droop_quota, VotingError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("empty input")]
    EmptyInput,
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Quota(#[from] VotingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    ProvideTrue,
    ProvideFake,
}

impl Action {
    pub fn kind(self) -> NewsType {
        match self {
            Action::ProvideTrue => NewsType::True,
            Action::ProvideFake => NewsType::Fake,
        }
    }

    pub fn is_fake(self) -> bool {
        self == Action::ProvideFake
    }

    pub const BOTH: [Action; 2] = [Action::ProvideTrue, Action::ProvideFake];

    fn index(self) -> usize {
        match self {
            Action::ProvideTrue => 0,
            Action::ProvideFake => 1,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::ProvideTrue => "True",
            Action::ProvideFake => "Fake",
        })
    }
}

/// A decision rule for one player.
pub trait Strategy {
    fn name(&self) -> String;

    /// `own` and `opponent` hold every earlier action; both are empty in round 0.
    fn decide(&self, own: &[Action], opponent: &[Action], round: usize, rng: &mut ChaCha8Rng) -> Action;
}

/// The strategies shipped with the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinStrategy {
    AlwaysTrue,
    AlwaysFake,
    /// Opens with true news, then mirrors the opponent's previous action.
    TitForTat,
    /// Provides true news until the opponent's first fake, then fake forever.
    GrimTrigger,
    /// Fake with the given probability each round, drawn from the seeded stream.
    Random(f64),
}

impl Strategy for BuiltinStrategy {
    fn name(&self) -> String {
        self.to_string()
    }

    fn decide(&self, _own: &[Action], opponent: &[Action], _round: usize, rng: &mut ChaCha8Rng) -> Action {
        match *self {
            BuiltinStrategy::AlwaysTrue => Action::ProvideTrue,
            BuiltinStrategy::AlwaysFake => Action::ProvideFake,
            BuiltinStrategy::TitForTat => opponent.last().copied().unwrap_or(Action::ProvideTrue),
            BuiltinStrategy::GrimTrigger => {
                if opponent.iter().any(|a| a.is_fake()) {
                    Action::ProvideFake
                } else {
                    Action::ProvideTrue
                }
            }
            BuiltinStrategy::Random(p) => {
                if rng.gen::<f64>() < p {
                    Action::ProvideFake
                } else {
                    Action::ProvideTrue
                }
            }
        }
    }
}

impl fmt::Display for BuiltinStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinStrategy::AlwaysTrue => f.write_str("always-true"),
            BuiltinStrategy::AlwaysFake => f.write_str("always-fake"),
            BuiltinStrategy::TitForTat => f.write_str("tit-for-tat"),
            BuiltinStrategy::GrimTrigger => f.write_str("grim-trigger"),
            BuiltinStrategy::Random(p) => write!(f, "random:{p}"),
        }
    }
}

impl FromStr for BuiltinStrategy {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "always-true" => Ok(BuiltinStrategy::AlwaysTrue),
            "always-fake" => Ok(BuiltinStrategy::AlwaysFake),
            "tit-for-tat" => Ok(BuiltinStrategy::TitForTat),
            "grim-trigger" => Ok(BuiltinStrategy::GrimTrigger),
            _ => {
                let p = s
                    .strip_prefix("random:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .filter(|p| (0.0..=1.0).contains(p))
                    .ok_or_else(|| GameError::UnknownStrategy(s.to_string()))?;
                Ok(BuiltinStrategy::Random(p))
            }
        }
    }
}

/// How cumulative harm grows each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HarmRule {
    /// +1 for each of the player's own fake actions.
    #[default]
    OwnFake,
    /// +1 for every fake action played in the round, by either player.
    AnyFake,
}

/// Audience acceptance earned per round, in vote-equivalents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcceptanceRates {
    pub truth: f64,
    pub fake: f64,
}

impl Default for AcceptanceRates {
    fn default() -> Self {
        AcceptanceRates { truth: 2.0, fake: 3.0 }
    }
}

impl AcceptanceRates {
    fn rate(&self, action: Action) -> f64 {
        match action {
            Action::ProvideTrue => self.truth,
            Action::ProvideFake => self.fake,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    pub rounds: usize,
    pub payoffs: HarmPayoffParams,
    pub harm_rule: HarmRule,
    pub acceptance: AcceptanceRates,
}

impl GameConfig {
    pub fn new(rounds: usize) -> Self {
        GameConfig {
            rounds,
            payoffs: HarmPayoffParams::default(),
            harm_rule: HarmRule::default(),
            acceptance: AcceptanceRates::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub round: usize,
    pub histories: [Vec<Action>; 2],
    /// Cumulative harm after the last round.
    pub harm: [f64; 2],
    pub cumulative_payoffs: [f64; 2],
    pub round_payoffs: [Vec<f64>; 2],
    pub acceptance: [f64; 2],
    /// Acceptance after each round.
    pub acceptance_trace: [Vec<f64>; 2],
}

impl GameState {
    fn new() -> Self {
        GameState {
            round: 0,
            histories: [Vec::new(), Vec::new()],
            harm: [0.0; 2],
            cumulative_payoffs: [0.0; 2],
            round_payoffs: [Vec::new(), Vec::new()],
            acceptance: [0.0; 2],
            acceptance_trace: [Vec::new(), Vec::new()],
        }
    }

    /// Number of rounds the player needed to reach `quota`, if it ever did.
    pub fn rounds_to_quota(&self, player: usize, quota: f64) -> Option<usize> {
        self.acceptance_trace[player].iter().position(|&a| a >= quota).map(|i| i + 1)
    }
}

pub fn play_iterated(
    strategies: [&dyn Strategy; 2],
    config: &GameConfig,
    seed: u64,
) -> Result<GameState, GameError> {
    if config.rounds == 0 {
        return Err(GameError::InvalidConfig("at least one round is required".into()));
    }
    config
        .payoffs
        .validate()
        .map_err(|e| GameError::InvalidConfig(e.to_string()))?;
    let mut rngs = [ChaCha8Rng::seed_from_u64(seed), ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15)];
    let mut state = GameState::new();

    for round in 0..config.rounds {
        let a0 = strategies[0].decide(&state.histories[0], &state.histories[1], round, &mut rngs[0]);
        let a1 = strategies[1].decide(&state.histories[1], &state.histories[0], round, &mut rngs[1]);
        let actions = [a0, a1];
        let fakes = actions.iter().filter(|a| a.is_fake()).count() as f64;

        for (p, &action) in actions.iter().enumerate() {
            let pay = harm_payoff(&config.payoffs, action.kind(), state.harm[p]);
            state.round_payoffs[p].push(pay);
            state.cumulative_payoffs[p] += pay;
            state.harm[p] += match config.harm_rule {
                HarmRule::OwnFake => {
                    if action.is_fake() {
                        1.0
                    } else {
                        0.0
                    }
                }
                HarmRule::AnyFake => fakes,
            };
            state.acceptance[p] += config.acceptance.rate(action);
            state.acceptance_trace[p].push(state.acceptance[p]);
            state.histories[p].push(action);
        }
        state.round += 1;
    }
    Ok(state)
}

/// Whether `player` has gathered a Droop quota of the audience.
pub fn droop_acceptance_reached(
    state: &GameState,
    player: usize,
    total_audience: f64,
    seats: usize,
) -> Result<bool, GameError> {
    if player > 1 {
        return Err(GameError::InvalidConfig(format!("no player {player}")));
    }
    if total_audience.is_nan() || total_audience <= 0.0 {
        return Err(GameError::InvalidConfig("audience must be positive".into()));
    }
    let quota = droop_quota(total_audience, seats)?;
    Ok(state.acceptance[player] >= quota)
}

/// A 2×2 bimatrix game; `row[i][j]` and `col[i][j]` are the payoffs when the
/// row player plays action `i` and the column player plays `j`
/// (index 0 = true, 1 = fake).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageGame {
    pub row: [[f64; 2]; 2],
    pub col: [[f64; 2]; 2],
}

impl StageGame {
    /// Symmetric game from one player's `(own action, opponent action)` table.
    pub fn symmetric(own_vs_opponent: [[f64; 2]; 2]) -> Self {
        let m = own_vs_opponent;
        StageGame {
            row: m,
            col: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]],
        }
    }

    pub fn payoffs(&self, row: Action, col: Action) -> (f64, f64) {
        (self.row[row.index()][col.index()], self.col[row.index()][col.index()])
    }
}

/// Pure Nash equilibria by checking unilateral deviations in every cell.
pub fn nash_equilibria(stage: &StageGame) -> Vec<(Action, Action)> {
    let mut out = Vec::new();
    for r in Action::BOTH {
        for c in Action::BOTH {
            let (u_row, u_col) = stage.payoffs(r, c);
            let row_ok = Action::BOTH.iter().all(|&r2| stage.payoffs(r2, c).0 <= u_row);
            let col_ok = Action::BOTH.iter().all(|&c2| stage.payoffs(r, c2).1 <= u_col);
            if row_ok && col_ok {
                out.push((r, c));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub id: String,
    pub tie: bool,
}

/// Provider with the largest truth payoff; ties go to the smallest id.
pub fn max_compensation(providers: &[(String, HarmPayoffParams)]) -> Result<Selection, GameError> {
    let best = providers
        .iter()
        .map(|(_, p)| p.truth_payoff)
        .reduce(f64::max)
        .ok_or(GameError::EmptyInput)?;
    let mut top: Vec<&String> = providers
        .iter()
        .filter(|(_, p)| p.truth_payoff == best)
        .map(|(id, _)| id)
        .collect();
    top.sort();
    Ok(Selection {
        id: top[0].clone(),
        tie: top.len() > 1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TournamentRow {
    pub strategy_a: String,
    pub strategy_b: String,
    pub rounds: usize,
    pub payoff_a: f64,
    pub payoff_b: f64,
    pub rounds_to_quota_a: Option<usize>,
    pub rounds_to_quota_b: Option<usize>,
}

/// Round robin over every unordered pair (self-play included), ordered by
/// strategy name. Each match gets its own seed derived from `seed` and the
/// pair position so results do not depend on evaluation order.
pub fn tournament(
    strategies: &[BuiltinStrategy],
    config: &GameConfig,
    quota: Option<f64>,
    seed: u64,
) -> Result<Vec<TournamentRow>, GameError> {
    if strategies.is_empty() {
        return Err(GameError::EmptyInput);
    }
    let mut sorted: Vec<BuiltinStrategy> = strategies.to_vec();
    sorted.sort_by_key(|s| s.name());
    sorted.dedup_by_key(|s| s.name());

    let mut rows = Vec::new();
    for i in 0..sorted.len() {
        for j in i..sorted.len() {
            let match_seed = seed.wrapping_add(((i as u64) << 32) | j as u64);
            let state = play_iterated([&sorted[i], &sorted[j]], config, match_seed)?;
            rows.push(TournamentRow {
                strategy_a: sorted[i].name(),
                strategy_b: sorted[j].name(),
                rounds: state.round,
                payoff_a: state.cumulative_payoffs[0],
                payoff_b: state.cumulative_payoffs[1],
                rounds_to_quota_a: quota.and_then(|q| state.rounds_to_quota(0, q)),
                rounds_to_quota_b: quota.and_then(|q| state.rounds_to_quota(1, q)),
            });
        }
    }
    Ok(rows)
}
