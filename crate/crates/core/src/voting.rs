//! Ranked-ballot counting: plurality, the Droop quota, and Meek STV.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Default convergence tolerance for keep factors, in vote units.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Keep-factor iterations allowed per count round.
pub const MAX_KEEP_ITERATIONS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VotingError {
    #[error("no candidates or votes given")]
    EmptyInput,
    #[error("seat count must be at least 1, got {0}")]
    InvalidSeats(usize),
    #[error("invalid vote count {0}")]
    InvalidVotes(f64),
    #[error("ballot {ballot} names unknown candidate `{candidate}`")]
    UnknownCandidate { ballot: usize, candidate: String },
    #[error("ballot {ballot} ranks `{candidate}` twice")]
    DuplicateCandidate { ballot: usize, candidate: String },
    #[error("duplicate candidate id `{0}`")]
    DuplicateCandidateId(String),
    #[error("ballot {ballot} has invalid weight {weight}")]
    InvalidWeight { ballot: usize, weight: f64 },
    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),
    #[error("keep factors did not converge within {iterations} iterations in round {round} (max deviation {deviation:e})")]
    NonConvergence { round: usize, iterations: usize, deviation: f64 },
    #[error("ballot line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FptpOutcome {
    pub winner: usize,
    /// Set when several candidates share the top count; the lowest index wins.
    pub tie: bool,
}

/// Plurality winner `argmax_i votes[i]`.
pub fn fptp_winner(votes: &[f64]) -> Result<FptpOutcome, VotingError> {
    if votes.is_empty() {
        return Err(VotingError::EmptyInput);
    }
    if let Some(&bad) = votes.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(VotingError::InvalidVotes(bad));
    }
    let mut winner = 0;
    for (i, &v) in votes.iter().enumerate().skip(1) {
        if v > votes[winner] {
            winner = i;
        }
    }
    let tie = votes.iter().filter(|&&v| v == votes[winner]).count() > 1;
    Ok(FptpOutcome { winner, tie })
}

/// Integer Droop quota `⌊votes/(seats+1)⌋ + 1`.
pub fn droop_quota(valid_votes: f64, seats: usize) -> Result<f64, VotingError> {
    if seats < 1 {
        return Err(VotingError::InvalidSeats(seats));
    }
    if !(valid_votes.is_finite() && valid_votes >= 0.0) {
        return Err(VotingError::InvalidVotes(valid_votes));
    }
    Ok((valid_votes / (seats as f64 + 1.0)).floor() + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ballot {
    pub ranking: Vec<String>,
    pub weight: f64,
}

impl Ballot {
    pub fn new<S: Into<String>>(weight: f64, ranking: impl IntoIterator<Item = S>) -> Self {
        Ballot {
            ranking: ranking.into_iter().map(Into::into).collect(),
            weight,
        }
    }
}

/// Parses the line-oriented ballot format `<weight> : <cand> > <cand> > ...`.
/// Blank lines and `#` comments are skipped.
pub fn parse_ballots(text: &str) -> Result<Vec<Ballot>, VotingError> {
    let mut ballots = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| VotingError::Parse { line: line_no, message };
        let (weight, ranking) = line
            .split_once(':')
            .ok_or_else(|| err("expected `<weight> : <ranking>`".into()))?;
        let weight: f64 = weight
            .trim()
            .parse()
            .map_err(|_| err(format!("bad weight `{}`", weight.trim())))?;
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(err(format!("weight must be nonnegative, got {weight}")));
        }
        let ranking = ranking.trim();
        let ranking: Vec<String> = if ranking.is_empty() {
            Vec::new()
        } else {
            ranking.split('>').map(|c| c.trim().to_string()).collect()
        };
        if ranking.iter().any(String::is_empty) {
            return Err(err("empty candidate name".into()));
        }
        ballots.push(Ballot { ranking, weight });
    }
    Ok(ballots)
}

/// Candidates appearing on any ballot, sorted by id.
pub fn candidates_of(ballots: &[Ballot]) -> Vec<String> {
    let mut all: Vec<String> = ballots.iter().flat_map(|b| b.ranking.iter().cloned()).collect();
    all.sort();
    all.dedup();
    all
}

/// First-preference totals per candidate, in `candidates` order.
pub fn first_preferences(ballots: &[Ballot], candidates: &[String]) -> Result<Vec<f64>, VotingError> {
    let index = candidate_index(candidates)?;
    let mut totals = vec![0.0; candidates.len()];
    for (b, ballot) in ballots.iter().enumerate() {
        if let Some(first) = ballot.ranking.first() {
            let &c = index.get(first.as_str()).ok_or_else(|| VotingError::UnknownCandidate {
                ballot: b,
                candidate: first.clone(),
            })?;
            totals[c] += ballot.weight;
        }
    }
    Ok(totals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateStatus {
    Hopeful,
    Elected,
    Excluded,
}

impl fmt::Display for CandidateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidateStatus::Hopeful => "hopeful",
            CandidateStatus::Elected => "elected",
            CandidateStatus::Excluded => "excluded",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CountEvent {
    Elected(String),
    Excluded(String),
}

/// Snapshot of one count round, taken after keep factors have converged and
/// before the round's election or exclusion is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRound {
    pub totals: Vec<f64>,
    pub keep_factors: Vec<f64>,
    pub status: Vec<CandidateStatus>,
    pub quota: f64,
    pub exhausted: f64,
    pub iterations: usize,
    pub events: Vec<CountEvent>,
    /// A tie had to be broken by candidate id in this round.
    pub tie_broken: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionResult {
    pub candidates: Vec<String>,
    pub winners: Vec<String>,
    pub rounds: Vec<CountRound>,
    pub keep_factors: Vec<f64>,
    pub tie_broken: bool,
}

fn candidate_index(candidates: &[String]) -> Result<HashMap<&str, usize>, VotingError> {
    let mut index = HashMap::with_capacity(candidates.len());
    for (i, c) in candidates.iter().enumerate() {
        if index.insert(c.as_str(), i).is_some() {
            return Err(VotingError::DuplicateCandidateId(c.clone()));
        }
    }
    Ok(index)
}

struct Distribution {
    totals: Vec<f64>,
    exhausted: f64,
}

/// Pushes every ballot down its ranking; each candidate keeps `keep[c]` of
/// what reaches it and passes the rest on.
fn distribute(ballots: &[(f64, Vec<usize>)], keep: &[f64]) -> Distribution {
    let mut totals = vec![0.0; keep.len()];
    let mut exhausted = 0.0;
    for (weight, ranking) in ballots {
        let mut remaining = *weight;
        for &c in ranking {
            if remaining == 0.0 {
                break;
            }
            let kept = remaining * keep[c];
            totals[c] += kept;
            remaining -= kept;
        }
        exhausted += remaining;
    }
    Distribution { totals, exhausted }
}

/// Meek STV count.
///
/// Each round iterates the keep factors of elected candidates,
/// `keep ← keep · quota / total`, with the quota recomputed as
/// `(total weight − exhausted)/(seats + 1)` on every pass, until every elected
/// total sits within `tolerance` of the quota. Then the hopefuls above the
/// quota are elected, or failing that the weakest hopeful is excluded.
pub fn meek_count(
    ballots: &[Ballot],
    candidates: &[String],
    seats: usize,
    tolerance: f64,
) -> Result<ElectionResult, VotingError> {
    if seats < 1 {
        return Err(VotingError::InvalidSeats(seats));
    }
    if candidates.is_empty() {
        return Err(VotingError::EmptyInput);
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(VotingError::InvalidTolerance(tolerance));
    }
    let index = candidate_index(candidates)?;
    let mut prepared = Vec::with_capacity(ballots.len());
    for (b, ballot) in ballots.iter().enumerate() {
        if !(ballot.weight.is_finite() && ballot.weight >= 0.0) {
            return Err(VotingError::InvalidWeight { ballot: b, weight: ballot.weight });
        }
        let mut seen = vec![false; candidates.len()];
        let mut ranking = Vec::with_capacity(ballot.ranking.len());
        for name in &ballot.ranking {
            let &c = index.get(name.as_str()).ok_or_else(|| VotingError::UnknownCandidate {
                ballot: b,
                candidate: name.clone(),
            })?;
            if std::mem::replace(&mut seen[c], true) {
                return Err(VotingError::DuplicateCandidate { ballot: b, candidate: name.clone() });
            }
            ranking.push(c);
        }
        prepared.push((ballot.weight, ranking));
    }
    let total_weight: f64 = prepared.iter().map(|(w, _)| w).sum();

    let n = candidates.len();
    let mut keep = vec![1.0; n];
    let mut status = vec![CandidateStatus::Hopeful; n];
    let mut winners: Vec<usize> = Vec::new();
    let mut rounds = Vec::new();
    let mut any_tie = false;

    loop {
        let round_no = rounds.len() + 1;
        let mut iterations = 0;
        let (dist, quota) = loop {
            let dist = distribute(&prepared, &keep);
            let quota = (total_weight - dist.exhausted) / (seats as f64 + 1.0);
            let deviation = winners
                .iter()
                .map(|&c| (dist.totals[c] - quota).abs())
                .fold(0.0, f64::max);
            if deviation <= tolerance {
                break (dist, quota);
            }
            if iterations == MAX_KEEP_ITERATIONS {
                return Err(VotingError::NonConvergence {
                    round: round_no,
                    iterations,
                    deviation,
                });
            }
            iterations += 1;
            for &c in &winners {
                if dist.totals[c] > 0.0 {
                    keep[c] *= quota / dist.totals[c];
                }
            }
        };

        let mut round = CountRound {
            totals: dist.totals.clone(),
            keep_factors: keep.clone(),
            status: status.clone(),
            quota,
            exhausted: dist.exhausted,
            iterations,
            events: Vec::new(),
            tie_broken: false,
        };

        let seats_left = seats - winners.len();
        let mut hopefuls: Vec<usize> = (0..n).filter(|&c| status[c] == CandidateStatus::Hopeful).collect();
        // Strongest first; equal totals fall back to candidate order.
        hopefuls.sort_by(|&x, &y| dist.totals[y].total_cmp(&dist.totals[x]).then(x.cmp(&y)));

        let over_quota: Vec<usize> = hopefuls.iter().copied().filter(|&c| dist.totals[c] > quota).collect();
        let to_elect: Vec<usize> = if !over_quota.is_empty() {
            if over_quota.len() > seats_left {
                let cutoff = dist.totals[over_quota[seats_left - 1]];
                if (dist.totals[over_quota[seats_left]] - cutoff).abs() <= tolerance {
                    round.tie_broken = true;
                }
            }
            over_quota.into_iter().take(seats_left).collect()
        } else if hopefuls.len() <= seats_left {
            hopefuls.clone()
        } else {
            Vec::new()
        };

        if !to_elect.is_empty() {
            for &c in &to_elect {
                status[c] = CandidateStatus::Elected;
                winners.push(c);
                round.events.push(CountEvent::Elected(candidates[c].clone()));
            }
        } else {
            let lowest = dist.totals[*hopefuls.last().expect("more hopefuls than seats")];
            let tied: Vec<usize> = hopefuls
                .iter()
                .copied()
                .filter(|&c| (dist.totals[c] - lowest).abs() <= tolerance)
                .collect();
            let out = *tied.iter().min().expect("at least one lowest hopeful");
            if tied.len() > 1 {
                round.tie_broken = true;
            }
            status[out] = CandidateStatus::Excluded;
            keep[out] = 0.0;
            round.events.push(CountEvent::Excluded(candidates[out].clone()));
        }

        any_tie |= round.tie_broken;
        rounds.push(round);

        let hopefuls_left = status.contains(&CandidateStatus::Hopeful);
        if winners.len() == seats || !hopefuls_left {
            break;
        }
    }

    Ok(ElectionResult {
        candidates: candidates.to_vec(),
        winners: winners.iter().map(|&c| candidates[c].clone()).collect(),
        rounds,
        keep_factors: keep,
        tie_broken: any_tie,
    })
}
