//! Subcommand execution: one scenario in, one CSV file out.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    comparative_sweep, min_cost_spread_path, parse_edge_list, reliability_marginal_contribution, MarketPair,
};
use crate::dynamics::{info_marginal_contribution, retention, utility, RetentionParams, UtilityCurve};
use crate::error::{Error, Result};
use crate::game::{tournament, BuiltinStrategy, GameConfig};
use crate::market::{equilibrium_closed_form, stability_cobweb, MarketError, NewsType};
use crate::matching::{gale_shapley, marginal_contribution, pair_count, PayoffValuation, PreferenceProfile};
use crate::scenario::{base_dir, MatchingSection, Scenario};
use crate::voting::{candidates_of, CountEvent, droop_quota, first_preferences, fptp_winner, meek_count, parse_ballots};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Equilibrium,
    Match,
    Game,
    VoteFptp,
    VoteMeek,
    Dynamics,
    Sweep,
    Path,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::Equilibrium,
        Subcommand::Match,
        Subcommand::Game,
        Subcommand::VoteFptp,
        Subcommand::VoteMeek,
        Subcommand::Dynamics,
        Subcommand::Sweep,
        Subcommand::Path,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Equilibrium => "equilibrium",
            Subcommand::Match => "match",
            Subcommand::Game => "game",
            Subcommand::VoteFptp => "vote-fptp",
            Subcommand::VoteMeek => "vote-meek",
            Subcommand::Dynamics => "dynamics",
            Subcommand::Sweep => "sweep",
            Subcommand::Path => "path",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown subcommand `{s}`")))
    }
}

/// Formats a number with at most 12 significant digits and no trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("scientific output parses");
    let magnitude = rounded.abs();
    if (1e-6..1e16).contains(&magnitude) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

fn fmt_opt(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Runtime options layered over the scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub grid: Option<Vec<f64>>,
}

/// Loads `scenario_path`, runs `command` and writes
/// `<out_dir>/<scenario>_<command>.csv`, returning that path.
pub fn run(command: Subcommand, scenario_path: &Path, out_dir: &Path, options: &RunOptions) -> Result<PathBuf> {
    let mut scenario = Scenario::load(scenario_path)?;
    if let Some(seed) = options.seed {
        scenario.seed = seed;
    }
    if let (Some(grid), Some(analysis)) = (&options.grid, scenario.analysis.as_mut()) {
        analysis.grid = grid.clone();
    }
    let base = base_dir(scenario_path);
    info!("running {command} for scenario `{}` (seed {})", scenario.name, scenario.seed);
    let rows = execute(command, &scenario, base)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(format!("{}_{}.csv", scenario.name, command.name()));
    let mut writer = csv::Writer::from_path(&path)?;
    for row in &rows {
        writer.write_record(row)?;
    }
    writer.flush().map_err(|e| Error::io(&path, e))?;
    debug!("wrote {} rows to {}", rows.len().saturating_sub(1), path.display());
    Ok(path)
}

type Rows = Vec<Vec<String>>;

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn missing(section: &str) -> Error {
    Error::Scenario(format!("scenario has no [{section}] section"))
}

/// Produces the CSV rows (header first) for a subcommand.
pub fn execute(command: Subcommand, scenario: &Scenario, base: &Path) -> Result<Rows> {
    match command {
        Subcommand::Equilibrium => equilibrium_rows(scenario),
        Subcommand::Match => match_rows(scenario),
        Subcommand::Game => game_rows(scenario),
        Subcommand::VoteFptp => fptp_rows(scenario, base),
        Subcommand::VoteMeek => meek_rows(scenario, base),
        Subcommand::Dynamics => dynamics_rows(scenario),
        Subcommand::Sweep => sweep_rows(scenario),
        Subcommand::Path => path_rows(scenario, base),
    }
}

fn equilibrium_rows(s: &Scenario) -> Result<Rows> {
    let market = s.market.as_ref().ok_or_else(|| missing("market"))?;
    let mut rows = vec![header(&["news_type", "price", "quantity", "stability"])];
    for kind in NewsType::ALL {
        let params = match kind {
            NewsType::Fake => market.fake,
            NewsType::True => market.true_,
        };
        let stability = stability_cobweb(&params, 0.0, market.cobweb_steps.max(1))?.classification;
        let (price, quantity) = match equilibrium_closed_form(&params) {
            Ok(e) => (fmt_num(e.price), fmt_num(e.quantity)),
            Err(MarketError::InfeasibleEquilibrium { .. }) => ("infeasible".into(), "infeasible".into()),
            Err(e) => return Err(e.into()),
        };
        rows.push(vec![kind.to_string(), price, quantity, stability.to_string()]);
    }
    Ok(rows)
}

fn lookup<T: Clone>(table: &BTreeMap<String, Vec<T>>, ids: &[String], what: &str) -> Result<Vec<Vec<T>>> {
    ids.iter()
        .map(|id| {
            table
                .get(id)
                .cloned()
                .ok_or_else(|| Error::Scenario(format!("no {what} for `{id}`")))
        })
        .collect()
}

fn build_profile(m: &MatchingSection, seed: u64) -> Result<PreferenceProfile> {
    let forms = [
        m.random.is_some(),
        m.provider_prefs.is_some() || m.consumer_prefs.is_some(),
        m.provider_scores.is_some() || m.consumer_scores.is_some(),
    ];
    if forms.iter().filter(|f| **f).count() != 1 {
        return Err(Error::Scenario(
            "matching needs exactly one of `random`, rankings, or scores".into(),
        ));
    }
    if let Some(r) = m.random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |len: usize, others: usize| -> Vec<Vec<usize>> {
            (0..len)
                .map(|_| {
                    let mut v: Vec<usize> = (0..others).collect();
                    v.shuffle(&mut rng);
                    v
                })
                .collect()
        };
        let pp = draw(r.providers, r.consumers);
        let cp = draw(r.consumers, r.providers);
        return Ok(PreferenceProfile::from_indices(pp, cp)?);
    }
    if let (Some(pp), Some(cp)) = (&m.provider_prefs, &m.consumer_prefs) {
        let pp = lookup(pp, &m.providers, "provider ranking")?;
        let cp = lookup(cp, &m.consumers, "consumer ranking")?;
        return Ok(PreferenceProfile::new(m.providers.clone(), m.consumers.clone(), pp, cp)?);
    }
    if let (Some(ps), Some(cs)) = (&m.provider_scores, &m.consumer_scores) {
        let ps = lookup(ps, &m.providers, "provider scores")?;
        let cs = lookup(cs, &m.consumers, "consumer scores")?;
        return Ok(PreferenceProfile::from_scores(m.providers.clone(), m.consumers.clone(), &ps, &cs)?);
    }
    Err(Error::Scenario("rankings and scores must be given for both sides".into()))
}

fn match_rows(s: &Scenario) -> Result<Rows> {
    let section = s.matching.as_ref().ok_or_else(|| missing("matching"))?;
    let profile = build_profile(section, s.seed)?;
    let matching = gale_shapley(&profile, section.proposing);

    let valuation = s.payoffs.as_ref().map(|p| PayoffValuation {
        providers: p.providers.iter().map(|(id, e)| (id.clone(), (e.params(), e.kind))).collect(),
        consumers: p.consumers.clone(),
        costs: p.costs,
    });
    let valuation = valuation.filter(|v| v.covers(&profile).is_ok());

    let mut rows = vec![header(&["provider", "consumer", "marginal_contribution"])];
    for (p, id) in profile.providers().iter().enumerate() {
        let consumer = matching
            .provider_partner(p)
            .map(|c| profile.consumers()[c].clone())
            .unwrap_or_default();
        let mc = match &valuation {
            Some(v) => marginal_contribution(&profile, id, |pr, m| v.value(pr, m))?,
            None => marginal_contribution(&profile, id, pair_count)?,
        };
        rows.push(vec![id.clone(), consumer, fmt_num(mc)]);
    }
    Ok(rows)
}

fn game_rows(s: &Scenario) -> Result<Rows> {
    let g = s.game.as_ref().ok_or_else(|| missing("game"))?;
    let strategies = g
        .strategies
        .iter()
        .map(|name| name.parse::<BuiltinStrategy>())
        .collect::<Result<Vec<_>, _>>()?;
    let config = GameConfig {
        rounds: g.rounds,
        payoffs: s.payoffs.as_ref().map(|p| p.harm).unwrap_or_default(),
        harm_rule: g.harm_rule,
        acceptance: g.acceptance,
    };
    let quota = g.audience.map(|a| droop_quota(a, g.seats)).transpose()?;
    let table = tournament(&strategies, &config, quota, s.seed)?;
    let mut rows = vec![header(&[
        "strategy_a",
        "strategy_b",
        "rounds",
        "payoff_a",
        "payoff_b",
        "rounds_to_quota_a",
        "rounds_to_quota_b",
    ])];
    for r in table {
        rows.push(vec![
            r.strategy_a,
            r.strategy_b,
            r.rounds.to_string(),
            fmt_num(r.payoff_a),
            fmt_num(r.payoff_b),
            fmt_opt(r.rounds_to_quota_a),
            fmt_opt(r.rounds_to_quota_b),
        ]);
    }
    Ok(rows)
}

fn read_ballots(path: &Path) -> Result<Vec<crate::voting::Ballot>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ballots(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn fptp_rows(s: &Scenario, base: &Path) -> Result<Rows> {
    let v = s.voting.as_ref().ok_or_else(|| missing("voting"))?;
    let (names, counts) = match (&v.votes, &v.ballot_file) {
        (Some(votes), _) => {
            let names = match &v.candidates {
                Some(c) if c.len() == votes.len() => c.clone(),
                Some(_) => return Err(Error::Scenario("`candidates` and `votes` differ in length".into())),
                None => (0..votes.len()).map(|i| i.to_string()).collect(),
            };
            (names, votes.clone())
        }
        (None, Some(file)) => {
            let ballots = read_ballots(&base.join(file))?;
            let names = v.candidates.clone().unwrap_or_else(|| candidates_of(&ballots));
            let counts = first_preferences(&ballots, &names)?;
            (names, counts)
        }
        (None, None) => return Err(Error::Scenario("voting needs `votes` or `ballot_file`".into())),
    };
    let outcome = fptp_winner(&counts)?;
    let mut rows = vec![header(&["candidate", "votes", "winner", "tie"])];
    for (i, (name, count)) in names.iter().zip(&counts).enumerate() {
        rows.push(vec![
            name.clone(),
            fmt_num(*count),
            (i == outcome.winner).to_string(),
            (i == outcome.winner && outcome.tie).to_string(),
        ]);
    }
    Ok(rows)
}

fn meek_rows(s: &Scenario, base: &Path) -> Result<Rows> {
    let v = s.voting.as_ref().ok_or_else(|| missing("voting"))?;
    let file = v
        .ballot_file
        .as_ref()
        .ok_or_else(|| Error::Scenario("vote-meek needs `ballot_file`".into()))?;
    let ballots = read_ballots(&base.join(file))?;
    let names = v.candidates.clone().unwrap_or_else(|| candidates_of(&ballots));
    let result = meek_count(&ballots, &names, v.seats, v.tolerance)?;
    info!("elected: {}", result.winners.join(", "));

    let mut rows = vec![header(&[
        "round",
        "candidate",
        "status",
        "total",
        "keep_factor",
        "quota",
        "exhausted",
        "event",
    ])];
    for (r, round) in result.rounds.iter().enumerate() {
        for (c, name) in names.iter().enumerate() {
            let event = round.events.iter().find_map(|e| match e {
                CountEvent::Elected(x) if x == name => Some("elected"),
                CountEvent::Excluded(x) if x == name => Some("excluded"),
                _ => None,
            });
            rows.push(vec![
                (r + 1).to_string(),
                name.clone(),
                round.status[c].to_string(),
                fmt_num(round.totals[c]),
                fmt_num(round.keep_factors[c]),
                fmt_num(round.quota),
                fmt_num(round.exhausted),
                event.unwrap_or("").to_string(),
            ]);
        }
    }
    Ok(rows)
}

fn dynamics_rows(s: &Scenario) -> Result<Rows> {
    let d = s.dynamics.as_ref().ok_or_else(|| missing("dynamics"))?;
    let mut rows = vec![header(&["series", "parameter", "x", "value"])];
    for &gamma in &d.gammas {
        let params = RetentionParams::new(d.initial_retention, gamma)?;
        for &t in &d.times {
            rows.push(vec!["retention".into(), fmt_num(gamma), fmt_num(t), fmt_num(retention(&params, t)?)]);
        }
    }
    let curves = [
        ("submodular", UtilityCurve::submodular(d.submodular_scale)?, d.submodular_scale),
        ("metzler", UtilityCurve::metzler(d.metzler_scale, d.metzler_exponent)?, d.metzler_exponent),
    ];
    for (name, curve, param) in curves {
        for k in 0..=d.horizon {
            rows.push(vec![name.into(), fmt_num(param), k.to_string(), fmt_num(utility(&curve, k))]);
        }
        let marginal = format!("{name}-marginal");
        for k in 0..d.horizon {
            rows.push(vec![
                marginal.clone(),
                fmt_num(param),
                k.to_string(),
                fmt_num(info_marginal_contribution(&curve, k)),
            ]);
        }
    }
    Ok(rows)
}

fn sweep_rows(s: &Scenario) -> Result<Rows> {
    let market = s.market.as_ref().ok_or_else(|| missing("market"))?;
    let a = s.analysis.as_ref().ok_or_else(|| missing("analysis"))?;
    let base = market.pair();
    let changed = MarketPair {
        fake: a.changed.fake.apply(base.fake),
        true_: a.changed.true_.apply(base.true_),
    };
    let (before, after) = comparative_sweep(&base, &changed, &a.grid, &a.metric)?;
    let marginal = if after.points.len() >= 2 {
        reliability_marginal_contribution(&after)?
    } else {
        Vec::new()
    };
    let mut rows = vec![header(&["reliability", "health_before", "health_after", "marginal"])];
    for (i, (b, af)) in before.points.iter().zip(&after.points).enumerate() {
        let m = if i == 0 { String::new() } else { fmt_num(marginal[i - 1].1) };
        rows.push(vec![fmt_num(b.0), fmt_num(b.1), fmt_num(af.1), m]);
    }
    Ok(rows)
}

fn path_rows(s: &Scenario, base: &Path) -> Result<Rows> {
    let a = s.analysis.as_ref().ok_or_else(|| missing("analysis"))?;
    let (Some(file), Some(src), Some(dst)) = (&a.graph_file, &a.source, &a.target) else {
        return Err(Error::Scenario("path needs `graph_file`, `source` and `target`".into()));
    };
    let path = base.join(file);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let graph = parse_edge_list(&text)?;
    let (_, route) = min_cost_spread_path(&graph, src, dst)?;

    let mut rows = vec![header(&["step", "node", "cumulative_cost"])];
    let mut cost = 0.0;
    for (i, node) in route.iter().enumerate() {
        if i > 0 {
            let u = graph.index_of(&route[i - 1]).expect("route nodes exist");
            let v = graph.index_of(node).expect("route nodes exist");
            cost += graph
                .edges_from(u)
                .iter()
                .filter(|(t, _)| *t == v)
                .map(|(_, w)| *w)
                .fold(f64::INFINITY, f64::min);
        }
        rows.push(vec![i.to_string(), node.clone(), fmt_num(cost)]);
    }
    Ok(rows)
}
