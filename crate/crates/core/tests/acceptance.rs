//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! run with `--nocapture` to see them.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use infomarket::analysis::{
    market_health, min_cost_spread_path, reliability_marginal_contribution, HealthCurve, MarketState, SpreadGraph,
};
use infomarket::cli::{run, RunOptions, Subcommand};
use infomarket::dynamics::{check_increment_profile, retention, RetentionParams, UtilityCurve, Verdict};
use infomarket::game::{nash_equilibria, play_iterated, Action, BuiltinStrategy, GameConfig, StageGame};
use infomarket::market::{equilibrium_closed_form, equilibrium_numeric, Equilibrium, MarketParams, NewsType};
use infomarket::matching::{gale_shapley, is_stable, Matching, PreferenceProfile, Side};
use infomarket::payoffs::{crossover_harm, harm_payoff, HarmPayoffParams};
use infomarket::voting::{droop_quota, meek_count, Ballot, CandidateStatus, VotingError};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn equilibrium_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    for i in 0..10_000 {
        let m = MarketParams::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..100.0), rng.gen_range(0.1..10.0));
        let closed = equilibrium_closed_form(&m).map_err(|e| e.to_string())?;
        let numeric = equilibrium_numeric(|p| m.supply(p), |p| m.demand(p), (0.0, m.demand_intercept / m.demand_slope))
            .map_err(|e| format!("market {i}: {e}"))?;
        let independent = common::bisect_linear(m.supply_slope, m.demand_intercept, m.demand_slope);
        ensure((closed.price - numeric.price).abs() <= 1e-9, || {
            format!("market {i} {m:?}: closed {} vs bisection {}", closed.price, numeric.price)
        })?;
        ensure((closed.price - independent).abs() <= 1e-9, || {
            format!("market {i} {m:?}: closed {} vs independent {}", closed.price, independent)
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 2.0, || format!("took {elapsed:?}"))
}

fn harm_constants() -> Check {
    let d = HarmPayoffParams::default();
    let f = |h: f64| harm_payoff(&d, NewsType::Fake, h);
    let t = |h: f64| harm_payoff(&d, NewsType::True, h);
    ensure(f(0.0) == 5.0, || format!("U(F) at 0 = {}", f(0.0)))?;
    ensure(f(1.0) == 3.0 && t(1.0) == 3.0, || format!("U(F), U(T) at 1 = {}, {}", f(1.0), t(1.0)))?;
    ensure(f(2.0) == 1.0, || format!("U(F) at 2 = {}", f(2.0)))?;
    let x = crossover_harm(&d).map_err(|e| e.to_string())?;
    ensure(x == 1.0, || format!("crossover {x}"))
}

fn droop_values() -> Check {
    let q1 = droop_quota(100.0, 2).map_err(|e| e.to_string())?;
    let q2 = droop_quota(180.0, 1).map_err(|e| e.to_string())?;
    ensure(q1 == 34.0 && q2 == 91.0, || format!("quotas {q1}, {q2}"))
}

fn meek_example() -> Check {
    let ballots = vec![
        Ballot::new(10.0, ["A", "B"]),
        Ballot::new(6.0, ["B"]),
        Ballot::new(4.0, ["C", "B"]),
    ];
    let names: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
    let res = match meek_count(&ballots, &names, 2, 1e-9) {
        Err(e @ VotingError::NonConvergence { .. }) => return Err(e.to_string()),
        r => r.map_err(|e| e.to_string())?,
    };
    let mut winners = res.winners.clone();
    winners.sort();
    ensure(winners == ["A", "B"], || format!("winners {:?}", res.winners))?;
    let mut prev = vec![1.0; names.len()];
    for (r, round) in res.rounds.iter().enumerate() {
        let sum: f64 = round.totals.iter().sum::<f64>() + round.exhausted;
        ensure((sum - 20.0).abs() <= 1e-6, || format!("round {}: conserved {sum}", r + 1))?;
        for c in 0..names.len() {
            if round.status[c] == CandidateStatus::Elected {
                ensure((round.totals[c] - round.quota).abs() <= 1e-6, || {
                    format!("round {}: {} holds {} vs quota {}", r + 1, names[c], round.totals[c], round.quota)
                })?;
            }
            ensure(round.keep_factors[c] <= prev[c], || format!("round {}: keep of {} rose", r + 1, names[c]))?;
        }
        prev = round.keep_factors.clone();
    }
    Ok(())
}

fn to_assignment(m: &Matching, providers: usize) -> common::Assignment {
    (0..providers).map(|p| m.provider_partner(p)).collect()
}

fn transpose(a: &common::Assignment, providers: usize) -> common::Assignment {
    (0..providers).map(|p| a.iter().position(|&c| c == Some(p))).collect()
}

fn matching_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..10_000 {
        let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let (pp, cp) = common::random_prefs(&mut rng, m, n);
        let prof = PreferenceProfile::from_indices(pp.clone(), cp.clone()).map_err(|e| e.to_string())?;
        let g = gale_shapley(&prof, Side::Providers);
        let verdict = is_stable(&g, &prof);
        ensure(verdict.stable && verdict.blocking_pairs.is_empty(), || {
            format!("profile {i}: blocking pairs {:?}", verdict.blocking_pairs)
        })?;
        let got = to_assignment(&g, m);
        ensure(common::all_stable_matchings(&pp, &cp).contains(&got), || {
            format!("profile {i}: {got:?} not among the enumerated stable matchings")
        })?;
    }
    for i in 0..1_000 {
        let (m, n) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let (pp, cp) = common::random_prefs(&mut rng, m, n);
        let prof = PreferenceProfile::from_indices(pp.clone(), cp.clone()).map_err(|e| e.to_string())?;
        let best = common::provider_optimal(&pp, &cp).ok_or_else(|| format!("profile {i}: no optimum"))?;
        let got = to_assignment(&gale_shapley(&prof, Side::Providers), m);
        ensure(got == best, || format!("profile {i}: provider-proposing {got:?} vs optimum {best:?}"))?;
        // Swapping roles gives the consumer-optimal matching.
        let best_c = common::provider_optimal(&cp, &pp).ok_or_else(|| format!("profile {i}: no consumer optimum"))?;
        let got_c = to_assignment(&gale_shapley(&prof, Side::Consumers), m);
        ensure(got_c == transpose(&best_c, m), || {
            format!("profile {i}: consumer-proposing {got_c:?} vs optimum {best_c:?}")
        })?;
    }
    Ok(())
}

fn game_crossover_and_determinism() -> Check {
    let cfg = GameConfig::new(10);
    let fake = BuiltinStrategy::AlwaysFake;
    let truth = BuiltinStrategy::AlwaysTrue;
    let state = play_iterated([&fake, &truth], &cfg, 0).map_err(|e| e.to_string())?;
    let c = cfg.payoffs.truth_payoff;
    // Harm after `r` fake rounds is `r`, so the crossover round index equals the crossover harm.
    let crossover = crossover_harm(&cfg.payoffs).map_err(|e| e.to_string())? as usize;
    for (r, &u) in state.round_payoffs[0].iter().enumerate() {
        let below = u < c;
        ensure(below == (r > crossover), || format!("round {r}: fake payoff {u} vs truth {c}"))?;
    }

    let dir = scratch("tournament");
    let scenario = scenarios_dir().join("baseline.toml");
    let opts = RunOptions::default();
    let first = fs::read(run(Subcommand::Game, &scenario, &dir, &opts).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let second = fs::read(run(Subcommand::Game, &scenario, &dir, &opts).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(!first.is_empty() && first == second, || "tournament CSVs differ between runs".into())
}

fn nash_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1_000 {
        let mut cell = || rng.gen_range(-3..=3) as f64;
        let row = [[cell(), cell()], [cell(), cell()]];
        let col = [[cell(), cell()], [cell(), cell()]];
        let got: Vec<(usize, usize)> = nash_equilibria(&StageGame { row, col })
            .into_iter()
            .map(|(r, c)| (r as usize, c as usize))
            .collect();
        let want = common::best_response_nash(row, col);
        ensure(got == want, || format!("game {i}: {got:?} vs {want:?}"))?;
    }
    let pd = StageGame::symmetric([[3.0, 0.0], [5.0, 1.0]]);
    let eq = nash_equilibria(&pd);
    ensure(eq == [(Action::ProvideFake, Action::ProvideFake)], || format!("PD equilibria {eq:?}"))
}

fn dynamics_shapes() -> Check {
    let n = 10_000;
    for curve in [UtilityCurve::submodular(1.0), UtilityCurve::metzler(1.0, 2.0)] {
        let curve = curve.map_err(|e| e.to_string())?;
        // The checker's Pass is for weak monotonicity; strictness is checked here.
        let v = check_increment_profile(&curve, n);
        ensure(v == Verdict::Pass, || format!("{curve:?}: {v:?}"))?;
        let d = |k: u64| infomarket::dynamics::info_marginal_contribution(&curve, k);
        for k in 0..n {
            let strict = match curve {
                UtilityCurve::Submodular { .. } => d(k + 1) < d(k),
                UtilityCurve::Metzler { .. } => d(k + 1) > d(k),
            };
            ensure(strict, || format!("{curve:?}: increments at {k} not strict"))?;
        }
    }
    let p = RetentionParams::new(1.0, 0.3).map_err(|e| e.to_string())?;
    for i in 0..100 {
        for j in 0..100 {
            let (s, t) = (i as f64 * 0.1, j as f64 * 0.1);
            let lhs = retention(&p, s + t).map_err(|e| e.to_string())?;
            let rhs = retention(&p, s).unwrap() * retention(&p, t).unwrap();
            ensure((lhs - rhs).abs() <= 1e-12, || format!("semigroup at ({s}, {t}): {lhs} vs {rhs}"))?;
        }
    }
    Ok(())
}

fn analysis_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..500 {
        let (n, edges) = common::random_graph(&mut rng, 8);
        let named: Vec<(String, String, f64)> =
            edges.iter().map(|&(a, b, w)| (common::node_name(a), common::node_name(b), w)).collect();
        let g = SpreadGraph::with_nodes((0..n).map(common::node_name), &named).map_err(|e| e.to_string())?;
        let (src, dst) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let got = min_cost_spread_path(&g, &common::node_name(src), &common::node_name(dst));
        match (common::brute_force_path(n, &edges, src, dst), got) {
            (None, Err(_)) => {}
            (Some((cost, path)), Ok((c, p))) => {
                let want: Vec<String> = path.into_iter().map(common::node_name).collect();
                ensure(c == cost && p == want, || format!("graph {i}: {c} {p:?} vs {cost} {want:?}"))?;
            }
            (want, got) => return Err(format!("graph {i}: {got:?} vs {want:?}")),
        }
    }

    for _ in 0..1_000 {
        let (qt, qf) = (rng.gen_range(0..10_000u32) as f64, rng.gen_range(0..10_000u32) as f64);
        if qt + qf == 0.0 {
            continue;
        }
        let lambda = rng.gen_range(1..1_000u32) as f64;
        let state = |t: f64, f: f64| MarketState {
            fake: Some(Equilibrium { price: 1.0, quantity: f }),
            true_: Some(Equilibrium { price: 1.0, quantity: t }),
            reliability: 0.5,
        };
        let h0 = market_health(&state(qt, qf)).map_err(|e| e.to_string())?;
        let h1 = market_health(&state(qt * lambda, qf * lambda)).map_err(|e| e.to_string())?;
        ensure(h0 == h1, || format!("health ({qt}, {qf}) x{lambda}: {h0} vs {h1}"))?;
    }

    for _ in 0..1_000 {
        let len = rng.gen_range(2..40);
        let points: Vec<(f64, f64)> = (0..len).map(|i| (i as f64, rng.gen_range(0..=4096) as f64 / 4096.0)).collect();
        let curve = HealthCurve { points: points.clone() };
        let d = reliability_marginal_contribution(&curve).map_err(|e| e.to_string())?;
        let sum = d.iter().fold(0.0, |acc, x| acc + x.1);
        let want = points[len - 1].1 - points[0].1;
        ensure(sum == want, || format!("telescoping {sum} vs {want}"))?;
    }
    Ok(())
}

fn cli_reruns() -> Check {
    let bin = env!("CARGO_BIN_EXE_infomarket");
    let mut shipped: Vec<PathBuf> = fs::read_dir(scenarios_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    shipped.sort();
    ensure(!shipped.is_empty(), || "no shipped scenarios".into())?;
    let (a, b) = (scratch("cli_a"), scratch("cli_b"));
    for scenario in &shipped {
        for cmd in Subcommand::ALL {
            let mut outputs = Vec::new();
            for dir in [&a, &b] {
                let out = Command::new(bin)
                    .arg(cmd.name())
                    .arg("--scenario")
                    .arg(scenario)
                    .arg("--out")
                    .arg(dir)
                    .output()
                    .map_err(|e| e.to_string())?;
                ensure(out.status.success(), || {
                    format!("{} on {}: {}", cmd.name(), scenario.display(), String::from_utf8_lossy(&out.stderr))
                })?;
                let path = PathBuf::from(String::from_utf8_lossy(&out.stdout).trim());
                outputs.push(fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?);
            }
            ensure(outputs[0] == outputs[1], || format!("{} on {} not reproducible", cmd.name(), scenario.display()))?;
        }
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("equilibrium oracle equivalence", equilibrium_oracle),
        ("harm payoff constants", harm_constants),
        ("droop quota values", droop_values),
        ("meek hand example", meek_example),
        ("matching oracle equivalence", matching_oracle),
        ("game crossover and determinism", game_crossover_and_determinism),
        ("nash oracle", nash_oracle),
        ("dynamics shape properties", dynamics_shapes),
        ("analysis oracles", analysis_checks),
        ("cli reproducibility", cli_reruns),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("PASS {:>2} {name} ({:.2?})", i + 1, start.elapsed()),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
