//! Two-sided provider/consumer matching.
//!
//! Profiles hold strict, complete rankings of the opposite side. Agents are
//! addressed by index internally; ids are kept for reporting. Sides may have
//! different sizes, and being unmatched ranks below every partner.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::NewsType;
use crate::payoffs::{consumer_payoff, provider_payoff, ConsumerParams, CostSchedule, ProviderParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchingError {
    #[error("malformed preference profile: {0}")]
    MalformedProfile(String),
    #[error("malformed matching: {0}")]
    MalformedMatching(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    #[default]
    Providers,
    Consumers,
}

/// Market segment a news kind trades in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentLabel {
    Cheap,
    Luxury,
}

pub fn segment(kind: NewsType) -> SegmentLabel {
    match kind {
        NewsType::Fake => SegmentLabel::Cheap,
        NewsType::True => SegmentLabel::Luxury,
    }
}

pub fn segment_kind(label: SegmentLabel) -> NewsType {
    match label {
        SegmentLabel::Cheap => NewsType::Fake,
        SegmentLabel::Luxury => NewsType::True,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceProfile {
    providers: Vec<String>,
    consumers: Vec<String>,
    /// `provider_prefs[i]` lists consumer indices, most preferred first.
    provider_prefs: Vec<Vec<usize>>,
    consumer_prefs: Vec<Vec<usize>>,
    /// `provider_rank[i][j]` is the position of consumer `j` in provider `i`'s list.
    provider_rank: Vec<Vec<usize>>,
    consumer_rank: Vec<Vec<usize>>,
}

impl PreferenceProfile {
    /// Builds a profile from id-based rankings. `provider_prefs[i]` belongs to
    /// `providers[i]`.
    pub fn new(
        providers: Vec<String>,
        consumers: Vec<String>,
        provider_prefs: Vec<Vec<String>>,
        consumer_prefs: Vec<Vec<String>>,
    ) -> Result<Self, MatchingError> {
        let p_index = index_ids(&providers, "provider")?;
        let c_index = index_ids(&consumers, "consumer")?;
        let resolve = |lists: Vec<Vec<String>>, index: &HashMap<&str, usize>| {
            lists
                .into_iter()
                .map(|list| {
                    list.iter()
                        .map(|id| {
                            index.get(id.as_str()).copied().ok_or_else(|| {
                                MatchingError::MalformedProfile(format!("ranking mentions unknown id `{id}`"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let provider_prefs = resolve(provider_prefs, &c_index)?;
        let consumer_prefs = resolve(consumer_prefs, &p_index)?;
        Self::assemble(providers, consumers, provider_prefs, consumer_prefs)
    }

    /// Builds a profile from index rankings; ids default to `p0.., c0..`.
    pub fn from_indices(
        provider_prefs: Vec<Vec<usize>>,
        consumer_prefs: Vec<Vec<usize>>,
    ) -> Result<Self, MatchingError> {
        let providers = (0..provider_prefs.len()).map(|i| format!("p{i}")).collect();
        let consumers = (0..consumer_prefs.len()).map(|j| format!("c{j}")).collect();
        Self::assemble(providers, consumers, provider_prefs, consumer_prefs)
    }

    /// Derives ordinal rankings from cardinal scores. `provider_scores[i][j]`
    /// is provider `i`'s value for consumer `j`. Higher is better; equal scores
    /// fall back to ascending id order.
    pub fn from_scores(
        providers: Vec<String>,
        consumers: Vec<String>,
        provider_scores: &[Vec<f64>],
        consumer_scores: &[Vec<f64>],
    ) -> Result<Self, MatchingError> {
        index_ids(&providers, "provider")?;
        index_ids(&consumers, "consumer")?;
        let rank = |scores: &[Vec<f64>], owners: &[String], others: &[String]| {
            if scores.len() != owners.len() {
                return Err(MatchingError::MalformedProfile(format!(
                    "expected {} score rows, got {}",
                    owners.len(),
                    scores.len()
                )));
            }
            scores
                .iter()
                .zip(owners)
                .map(|(row, owner)| {
                    if row.len() != others.len() || row.iter().any(|s| !s.is_finite()) {
                        return Err(MatchingError::MalformedProfile(format!(
                            "scores of `{owner}` must be {} finite values",
                            others.len()
                        )));
                    }
                    let mut order: Vec<usize> = (0..others.len()).collect();
                    order.sort_by(|&x, &y| {
                        row[y].total_cmp(&row[x]).then_with(|| others[x].cmp(&others[y]))
                    });
                    Ok(order)
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let provider_prefs = rank(provider_scores, &providers, &consumers)?;
        let consumer_prefs = rank(consumer_scores, &consumers, &providers)?;
        Self::assemble(providers, consumers, provider_prefs, consumer_prefs)
    }

    fn assemble(
        providers: Vec<String>,
        consumers: Vec<String>,
        provider_prefs: Vec<Vec<usize>>,
        consumer_prefs: Vec<Vec<usize>>,
    ) -> Result<Self, MatchingError> {
        index_ids(&providers, "provider")?;
        index_ids(&consumers, "consumer")?;
        if provider_prefs.len() != providers.len() || consumer_prefs.len() != consumers.len() {
            return Err(MatchingError::MalformedProfile(
                "one ranking per agent is required".into(),
            ));
        }
        let provider_rank = ranks(&provider_prefs, consumers.len(), &providers)?;
        let consumer_rank = ranks(&consumer_prefs, providers.len(), &consumers)?;
        Ok(PreferenceProfile {
            providers,
            consumers,
            provider_prefs,
            consumer_prefs,
            provider_rank,
            consumer_rank,
        })
    }

    pub fn providers(&self) -> &[String] {
        &self.providers
    }

    pub fn consumers(&self) -> &[String] {
        &self.consumers
    }

    pub fn provider_prefs(&self) -> &[Vec<usize>] {
        &self.provider_prefs
    }

    pub fn consumer_prefs(&self) -> &[Vec<usize>] {
        &self.consumer_prefs
    }

    /// Position (0 = favourite) of consumer `c` in provider `p`'s ranking.
    pub fn provider_rank(&self, p: usize, c: usize) -> usize {
        self.provider_rank[p][c]
    }

    pub fn consumer_rank(&self, c: usize, p: usize) -> usize {
        self.consumer_rank[c][p]
    }

    pub fn provider_index(&self, id: &str) -> Option<usize> {
        self.providers.iter().position(|p| p == id)
    }

    pub fn consumer_index(&self, id: &str) -> Option<usize> {
        self.consumers.iter().position(|c| c == id)
    }

    /// The same profile with one provider removed from both sides' rankings.
    pub fn without_provider(&self, p: usize) -> Self {
        let shift = |q: usize| if q > p { q - 1 } else { q };
        let mut providers = self.providers.clone();
        providers.remove(p);
        let mut provider_prefs = self.provider_prefs.clone();
        provider_prefs.remove(p);
        let consumer_prefs = self
            .consumer_prefs
            .iter()
            .map(|list| list.iter().filter(|&&q| q != p).map(|&q| shift(q)).collect())
            .collect();
        Self::assemble(providers, self.consumers.clone(), provider_prefs, consumer_prefs)
            .expect("removing a provider keeps rankings complete")
    }
}

fn index_ids<'a>(ids: &'a [String], side: &str) -> Result<HashMap<&'a str, usize>, MatchingError> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.as_str(), i).is_some() {
            return Err(MatchingError::MalformedProfile(format!("duplicate {side} id `{id}`")));
        }
    }
    Ok(index)
}

fn ranks(prefs: &[Vec<usize>], others: usize, owners: &[String]) -> Result<Vec<Vec<usize>>, MatchingError> {
    prefs
        .iter()
        .zip(owners)
        .map(|(list, owner)| {
            if list.len() != others {
                return Err(MatchingError::MalformedProfile(format!(
                    "ranking of `{owner}` has {} entries, expected {others}",
                    list.len()
                )));
            }
            let mut rank = vec![usize::MAX; others];
            for (pos, &q) in list.iter().enumerate() {
                if q >= others || rank[q] != usize::MAX {
                    return Err(MatchingError::MalformedProfile(format!(
                        "ranking of `{owner}` is not a strict permutation"
                    )));
                }
                rank[q] = pos;
            }
            Ok(rank)
        })
        .collect()
}

/// A one-to-one assignment of providers to consumers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    provider_partner: Vec<Option<usize>>,
    consumer_partner: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(providers: usize, consumers: usize) -> Self {
        Matching {
            provider_partner: vec![None; providers],
            consumer_partner: vec![None; consumers],
        }
    }

    /// Builds a matching from `(provider, consumer)` index pairs.
    pub fn from_pairs(
        profile: &PreferenceProfile,
        pairs: &[(usize, usize)],
    ) -> Result<Self, MatchingError> {
        let mut m = Matching::empty(profile.providers.len(), profile.consumers.len());
        for &(p, c) in pairs {
            if p >= m.provider_partner.len() || c >= m.consumer_partner.len() {
                return Err(MatchingError::MalformedMatching(format!("pair ({p}, {c}) out of range")));
            }
            if m.provider_partner[p].is_some() || m.consumer_partner[c].is_some() {
                return Err(MatchingError::MalformedMatching(format!("pair ({p}, {c}) reuses an agent")));
            }
            m.provider_partner[p] = Some(c);
            m.consumer_partner[c] = Some(p);
        }
        Ok(m)
    }

    pub fn provider_partner(&self, p: usize) -> Option<usize> {
        self.provider_partner[p]
    }

    pub fn consumer_partner(&self, c: usize) -> Option<usize> {
        self.consumer_partner[c]
    }

    /// Matched pairs in ascending provider order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.provider_partner
            .iter()
            .enumerate()
            .filter_map(|(p, c)| c.map(|c| (p, c)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.provider_partner.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id_pairs<'a>(&self, profile: &'a PreferenceProfile) -> Vec<(&'a str, &'a str)> {
        self.pairs()
            .into_iter()
            .map(|(p, c)| (profile.providers[p].as_str(), profile.consumers[c].as_str()))
            .collect()
    }
}

/// Deferred acceptance with the given side proposing.
pub fn gale_shapley(profile: &PreferenceProfile, proposing: Side) -> Matching {
    let (prefs, receiver_rank, receivers) = match proposing {
        Side::Providers => (&profile.provider_prefs, &profile.consumer_rank, profile.consumers.len()),
        Side::Consumers => (&profile.consumer_prefs, &profile.provider_rank, profile.providers.len()),
    };
    let proposers = prefs.len();
    let mut next = vec![0usize; proposers];
    let mut held: Vec<Option<usize>> = vec![None; receivers];
    // Stack of free proposers; popping from the back keeps the run deterministic.
    let mut free: Vec<usize> = (0..proposers).rev().collect();

    while let Some(x) = free.pop() {
        let Some(&y) = prefs[x].get(next[x]) else {
            continue;
        };
        next[x] += 1;
        match held[y] {
            None => held[y] = Some(x),
            Some(cur) if receiver_rank[y][x] < receiver_rank[y][cur] => {
                held[y] = Some(x);
                free.push(cur);
            }
            Some(_) => free.push(x),
        }
    }

    let mut m = Matching::empty(profile.providers.len(), profile.consumers.len());
    for (y, x) in held.iter().enumerate() {
        if let Some(x) = *x {
            let (p, c) = match proposing {
                Side::Providers => (x, y),
                Side::Consumers => (y, x),
            };
            m.provider_partner[p] = Some(c);
            m.consumer_partner[c] = Some(p);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// Every `(provider, consumer)` pair that would rather be together.
    pub blocking_pairs: Vec<(usize, usize)>,
}

pub fn is_stable(m: &Matching, profile: &PreferenceProfile) -> StabilityVerdict {
    let mut blocking_pairs = Vec::new();
    for p in 0..profile.providers.len() {
        for c in 0..profile.consumers.len() {
            if m.provider_partner[p] == Some(c) {
                continue;
            }
            let p_wants = match m.provider_partner[p] {
                None => true,
                Some(cur) => profile.provider_rank[p][c] < profile.provider_rank[p][cur],
            };
            let c_wants = match m.consumer_partner[c] {
                None => true,
                Some(cur) => profile.consumer_rank[c][p] < profile.consumer_rank[c][cur],
            };
            if p_wants && c_wants {
                blocking_pairs.push((p, c));
            }
        }
    }
    StabilityVerdict {
        stable: blocking_pairs.is_empty(),
        blocking_pairs,
    }
}

/// `value(GS(profile)) − value(GS(profile without provider))`, providers proposing.
pub fn marginal_contribution<F>(
    profile: &PreferenceProfile,
    provider: &str,
    value: F,
) -> Result<f64, MatchingError>
where
    F: Fn(&PreferenceProfile, &Matching) -> f64,
{
    let p = profile
        .provider_index(provider)
        .ok_or_else(|| MatchingError::UnknownId(provider.to_string()))?;
    let with = gale_shapley(profile, Side::Providers);
    let reduced = profile.without_provider(p);
    let without = gale_shapley(&reduced, Side::Providers);
    Ok(value(profile, &with) - value(&reduced, &without))
}

/// Number of matched pairs.
pub fn pair_count(_profile: &PreferenceProfile, m: &Matching) -> f64 {
    m.len() as f64
}

/// Default matching valuation: summed provider and consumer payoffs over
/// matched pairs, each pair trading the provider's news kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffValuation {
    pub providers: BTreeMap<String, (ProviderParams, NewsType)>,
    pub consumers: BTreeMap<String, ConsumerParams>,
    pub costs: CostSchedule,
}

impl PayoffValuation {
    pub fn covers(&self, profile: &PreferenceProfile) -> Result<(), MatchingError> {
        for id in &profile.providers {
            if !self.providers.contains_key(id) {
                return Err(MatchingError::UnknownId(id.clone()));
            }
        }
        for id in &profile.consumers {
            if !self.consumers.contains_key(id) {
                return Err(MatchingError::UnknownId(id.clone()));
            }
        }
        Ok(())
    }

    /// Pairs whose ids are missing from the valuation contribute nothing.
    pub fn value(&self, profile: &PreferenceProfile, m: &Matching) -> f64 {
        m.id_pairs(profile)
            .into_iter()
            .filter_map(|(p, c)| {
                let (pp, kind) = self.providers.get(p)?;
                let cp = self.consumers.get(c)?;
                Some(provider_payoff(pp, *kind, &self.costs) + consumer_payoff(cp, *kind, &self.costs))
            })
            .sum()
    }
}
