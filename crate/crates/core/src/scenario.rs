//! TOML scenario files binding parameters for every subcommand.
//!
//! Unknown keys are rejected everywhere. Paths inside a scenario are resolved
//! against the directory holding the scenario file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{HealthMetric, MarketPair};
use crate::dynamics::DEFAULT_GAMMA_GRID;
use crate::error::{Error, Result};
use crate::game::{AcceptanceRates, HarmRule};
use crate::market::{MarketParams, NewsType};
use crate::matching::Side;
use crate::payoffs::{ConsumerParams, CostSchedule, HarmPayoffParams, ProviderParams};
use crate::voting::DEFAULT_TOLERANCE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<PayoffSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching: Option<MatchingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voting: Option<VotingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub fake: MarketParams,
    #[serde(rename = "true")]
    pub true_: MarketParams,
    #[serde(default = "default_cobweb_steps")]
    pub cobweb_steps: usize,
}

fn default_cobweb_steps() -> usize {
    50
}

impl MarketSection {
    pub fn pair(&self) -> MarketPair {
        MarketPair {
            fake: self.fake,
            true_: self.true_,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderEntry {
    pub base: f64,
    pub cost_sensitivity: f64,
    pub kind: NewsType,
}

impl ProviderEntry {
    pub fn params(&self) -> ProviderParams {
        ProviderParams {
            base: self.base,
            cost_sensitivity: self.cost_sensitivity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffSection {
    #[serde(default)]
    pub harm: HarmPayoffParams,
    #[serde(default)]
    pub costs: CostSchedule,
    #[serde(default)]
    pub providers: BTreeMap<String, ProviderEntry>,
    #[serde(default)]
    pub consumers: BTreeMap<String, ConsumerParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomProfile {
    pub providers: usize,
    pub consumers: usize,
}

/// A matching profile given as rankings, cardinal scores, or a seeded random
/// draw; exactly one form must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingSection {
    #[serde(default)]
    pub proposing: Side,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub providers: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub consumers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider_prefs: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consumer_prefs: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider_scores: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consumer_scores: Option<BTreeMap<String, Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub strategies: Vec<String>,
    pub rounds: usize,
    #[serde(default)]
    pub harm_rule: HarmRule,
    #[serde(default)]
    pub acceptance: AcceptanceRates,
    /// Total audience in vote-equivalents; enables rounds-to-quota reporting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audience: Option<f64>,
    #[serde(default = "one")]
    pub seats: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VotingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ballot_file: Option<PathBuf>,
    /// Plain per-candidate counts for plurality runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
    #[serde(default = "one")]
    pub seats: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub initial_retention: f64,
    pub gammas: Vec<f64>,
    pub times: Vec<f64>,
    pub horizon: u64,
    pub submodular_scale: f64,
    pub metzler_scale: f64,
    pub metzler_exponent: f64,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            initial_retention: 1.0,
            gammas: DEFAULT_GAMMA_GRID.to_vec(),
            times: (0..=20).map(|i| i as f64 * 0.5).collect(),
            horizon: 20,
            submodular_scale: 1.0,
            metzler_scale: 1.0,
            metzler_exponent: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supply_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_intercept: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_slope: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, base: MarketParams) -> MarketParams {
        MarketParams {
            supply_slope: self.supply_slope.unwrap_or(base.supply_slope),
            demand_intercept: self.demand_intercept.unwrap_or(base.demand_intercept),
            demand_slope: self.demand_slope.unwrap_or(base.demand_slope),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketOverrides {
    #[serde(default)]
    pub fake: ParamOverrides,
    #[serde(default, rename = "true")]
    pub true_: ParamOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
    #[serde(default)]
    pub metric: HealthMetric,
    #[serde(default)]
    pub changed: MarketOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Parses a comma separated list of reliabilities such as `0,0.5,1`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Scenario(format!("bad grid value `{}`", s.trim())))
        })
        .collect()
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    /// Reads, parses and checks a scenario file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scenario = Self::from_toml_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        scenario.check(base_dir(path))?;
        Ok(scenario)
    }

    /// Structural checks plus existence of every referenced file.
    pub fn check(&self, base: &Path) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Scenario(format!("invalid scenario name `{}`", self.name)));
        }
        let any = self.market.is_some()
            || self.payoffs.is_some()
            || self.matching.is_some()
            || self.game.is_some()
            || self.voting.is_some()
            || self.dynamics.is_some()
            || self.analysis.is_some();
        if !any {
            return Err(Error::Scenario("at least one section is required".into()));
        }
        let files = [
            self.voting.as_ref().and_then(|v| v.ballot_file.as_ref()),
            self.analysis.as_ref().and_then(|a| a.graph_file.as_ref()),
        ];
        for file in files.into_iter().flatten() {
            let resolved = base.join(file);
            if !resolved.is_file() {
                return Err(Error::Scenario(format!(
                    "referenced file {} does not exist",
                    resolved.display()
                )));
            }
        }
        Ok(())
    }
}

/// Directory that relative scenario paths are resolved against.
pub fn base_dir(scenario_path: &Path) -> &Path {
    match scenario_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}
