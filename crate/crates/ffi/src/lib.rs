//! C ABI over the `infomarket` library.
//!
//! Every fallible function returns an [`ImStatus`] and writes results through
//! out-pointers. On failure a message is kept per thread and can be read with
//! [`im_last_error_message`]. Handles (`ImElection`, `ImProfile`, `ImGraph`)
//! are opaque and must be released with their `_free` function; strings
//! returned to the caller are released with [`im_string_free`].
//!
//! Pointer arguments must be null or valid for the access described on each
//! function; handles must come from this library and not be used after free.

#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use infomarket::analysis::{min_cost_spread_path, parse_edge_list, AnalysisError, SpreadGraph};
use infomarket::dynamics::{retention, utility, RetentionParams, UtilityCurve};
use infomarket::market::{equilibrium_closed_form, MarketError, MarketParams, NewsType};
use infomarket::matching::{gale_shapley, PreferenceProfile, Side};
use infomarket::payoffs::{crossover_harm, harm_payoff, HarmPayoffParams, PayoffError};
use infomarket::voting::{candidates_of, droop_quota, fptp_winner, meek_count, parse_ballots, VotingError};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Utf8 = 3,
    Parse = 4,
    /// No equilibrium, no crossover, or no route.
    NoSolution = 5,
    NonConvergence = 6,
    OutOfRange = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(ImStatus, String);

impl Failure {
    fn new(status: ImStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

impl From<MarketError> for Failure {
    fn from(e: MarketError) -> Self {
        let status = match e {
            MarketError::InfeasibleEquilibrium { .. } | MarketError::NoRoot { .. } => ImStatus::NoSolution,
            MarketError::NoConvergence { .. } => ImStatus::NonConvergence,
            _ => ImStatus::InvalidArgument,
        };
        Failure::new(status, e)
    }
}

impl From<PayoffError> for Failure {
    fn from(e: PayoffError) -> Self {
        let status = match e {
            PayoffError::NoCrossover { .. } => ImStatus::NoSolution,
            _ => ImStatus::InvalidArgument,
        };
        Failure::new(status, e)
    }
}

impl From<VotingError> for Failure {
    fn from(e: VotingError) -> Self {
        let status = match e {
            VotingError::Parse { .. } => ImStatus::Parse,
            VotingError::NonConvergence { .. } => ImStatus::NonConvergence,
            _ => ImStatus::InvalidArgument,
        };
        Failure::new(status, e)
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let status = match e {
            AnalysisError::Parse { .. } => ImStatus::Parse,
            AnalysisError::Unreachable { .. } => ImStatus::NoSolution,
            _ => ImStatus::InvalidArgument,
        };
        Failure::new(status, e)
    }
}

/// Runs `f`, clearing the last error on success and recording it otherwise.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ImStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ImStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ImStatus::Panic
        }
    }
}

fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Failure::new(ImStatus::NullPointer, format!("`{what}` is null")))
}

fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(ImStatus::NullPointer, format!("`{what}` is null")));
    }
    // SAFETY: non-null and, per the contract, NUL-terminated.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|e| Failure::new(ImStatus::Utf8, format!("`{what}`: {e}")))
}

fn array<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(ImStatus::NullPointer, format!("`{what}` is null")));
    }
    // SAFETY: non-null and, per the contract, valid for `len` elements.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn boxed<T>(value: T, slot: *mut *mut T, what: &str) -> Result<(), Failure> {
    *out(slot, what)? = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn im_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Closed-form equilibrium of `S = a·P`, `D = b − c·P`.
#[no_mangle]
pub extern "C" fn im_equilibrium(
    supply_slope: f64,
    demand_intercept: f64,
    demand_slope: f64,
    price: *mut f64,
    quantity: *mut f64,
) -> ImStatus {
    guard(|| {
        let e = equilibrium_closed_form(&MarketParams::new(supply_slope, demand_intercept, demand_slope))?;
        *out(price, "price")? = e.price;
        *out(quantity, "quantity")? = e.quantity;
        Ok(())
    })
}

fn harm_params(fake_base: f64, harm_penalty: f64, truth_payoff: f64) -> HarmPayoffParams {
    HarmPayoffParams {
        fake_base,
        harm_penalty,
        truth_payoff,
    }
}

/// Per-round payoff of providing fake (`is_fake`) or true news at harm `harm`.
#[no_mangle]
pub extern "C" fn im_harm_payoff(
    fake_base: f64,
    harm_penalty: f64,
    truth_payoff: f64,
    is_fake: bool,
    harm: f64,
    payoff: *mut f64,
) -> ImStatus {
    guard(|| {
        let kind = if is_fake { NewsType::Fake } else { NewsType::True };
        *out(payoff, "payoff")? = harm_payoff(&harm_params(fake_base, harm_penalty, truth_payoff), kind, harm);
        Ok(())
    })
}

/// Harm level at which fake and true news pay the same.
#[no_mangle]
pub extern "C" fn im_crossover_harm(fake_base: f64, harm_penalty: f64, truth_payoff: f64, harm: *mut f64) -> ImStatus {
    guard(|| {
        *out(harm, "harm")? = crossover_harm(&harm_params(fake_base, harm_penalty, truth_payoff))?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn im_droop_quota(valid_votes: f64, seats: usize, quota: *mut f64) -> ImStatus {
    guard(|| {
        *out(quota, "quota")? = droop_quota(valid_votes, seats)?;
        Ok(())
    })
}

/// Plurality winner over `len` vote counts; `tie` is set when the lowest
/// index was chosen among equal leaders.
#[no_mangle]
pub extern "C" fn im_fptp_winner(votes: *const f64, len: usize, winner: *mut usize, tie: *mut bool) -> ImStatus {
    guard(|| {
        let r = fptp_winner(array(votes, len, "votes")?)?;
        *out(winner, "winner")? = r.winner;
        *out(tie, "tie")? = r.tie;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn im_retention(initial: f64, gamma: f64, t: f64, value: *mut f64) -> ImStatus {
    guard(|| {
        let p = RetentionParams::new(initial, gamma).map_err(|e| Failure::new(ImStatus::InvalidArgument, e))?;
        *out(value, "value")? = retention(&p, t).map_err(|e| Failure::new(ImStatus::InvalidArgument, e))?;
        Ok(())
    })
}

/// Utility of `k` pieces of information. `exponent <= 0` selects the
/// submodular curve; otherwise the Metzler curve with that exponent.
#[no_mangle]
pub extern "C" fn im_utility(scale: f64, exponent: f64, k: u64, value: *mut f64) -> ImStatus {
    guard(|| {
        let curve = if exponent <= 0.0 {
            UtilityCurve::submodular(scale)
        } else {
            UtilityCurve::metzler(scale, exponent)
        }
        .map_err(|e| Failure::new(ImStatus::InvalidArgument, e))?;
        *out(value, "value")? = utility(&curve, k);
        Ok(())
    })
}

/// Completed Meek count.
pub struct ImElection {
    winners: Vec<CString>,
    rounds: usize,
    tie_broken: bool,
}

/// Parses ballots (`weight : A > B > C` per line, `#` comments) and runs a
/// Meek count. Candidates are all names that appear on some ballot.
#[no_mangle]
pub extern "C" fn im_election_count(
    ballots: *const c_char,
    seats: usize,
    tolerance: f64,
    election: *mut *mut ImElection,
) -> ImStatus {
    guard(|| {
        let ballots = parse_ballots(text(ballots, "ballots")?)?;
        let names = candidates_of(&ballots);
        let r = meek_count(&ballots, &names, seats, tolerance)?;
        let winners = r
            .winners
            .into_iter()
            .map(|w| CString::new(w).map_err(|e| Failure::new(ImStatus::InvalidArgument, e)))
            .collect::<Result<_, _>>()?;
        boxed(
            ImElection {
                winners,
                rounds: r.rounds.len(),
                tie_broken: r.tie_broken,
            },
            election,
            "election",
        )
    })
}

/// Number of winners, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn im_election_winner_count(election: *const ImElection) -> usize {
    // SAFETY: null or a live handle from `im_election_count`.
    unsafe { election.as_ref() }.map_or(0, |e| e.winners.len())
}

#[no_mangle]
pub extern "C" fn im_election_round_count(election: *const ImElection) -> usize {
    // SAFETY: as above.
    unsafe { election.as_ref() }.map_or(0, |e| e.rounds)
}

#[no_mangle]
pub extern "C" fn im_election_tie_broken(election: *const ImElection) -> bool {
    // SAFETY: as above.
    unsafe { election.as_ref() }.is_some_and(|e| e.tie_broken)
}

/// Name of the `index`-th winner in election order, or null when out of
/// range. Owned by the handle.
#[no_mangle]
pub extern "C" fn im_election_winner(election: *const ImElection, index: usize) -> *const c_char {
    // SAFETY: as above.
    unsafe { election.as_ref() }
        .and_then(|e| e.winners.get(index))
        .map_or(ptr::null(), |w| w.as_ptr())
}

#[no_mangle]
pub extern "C" fn im_election_free(election: *mut ImElection) {
    if !election.is_null() {
        // SAFETY: produced by `Box::into_raw` in `im_election_count`.
        drop(unsafe { Box::from_raw(election) });
    }
}

/// Two-sided preference profile.
pub struct ImProfile {
    profile: PreferenceProfile,
}

fn rows(flat: &[usize], count: usize, width: usize) -> Vec<Vec<usize>> {
    (0..count).map(|i| flat[i * width..(i + 1) * width].to_vec()).collect()
}

/// Builds a profile from complete rankings in row-major order:
/// `provider_prefs` holds `providers × consumers` consumer indices, best
/// first, and `consumer_prefs` holds `consumers × providers`.
#[no_mangle]
pub extern "C" fn im_profile_new(
    provider_prefs: *const usize,
    providers: usize,
    consumer_prefs: *const usize,
    consumers: usize,
    profile: *mut *mut ImProfile,
) -> ImStatus {
    guard(|| {
        let cells = providers
            .checked_mul(consumers)
            .ok_or_else(|| Failure::new(ImStatus::InvalidArgument, "profile too large"))?;
        let pp = rows(array(provider_prefs, cells, "provider_prefs")?, providers, consumers);
        let cp = rows(array(consumer_prefs, cells, "consumer_prefs")?, consumers, providers);
        let p = PreferenceProfile::from_indices(pp, cp).map_err(|e| Failure::new(ImStatus::InvalidArgument, e))?;
        boxed(ImProfile { profile: p }, profile, "profile")
    })
}

/// Stable matching by deferred acceptance. Writes each provider's consumer
/// index, or -1 if unmatched, into `partners[0..len]`; `len` must equal the
/// number of providers.
#[no_mangle]
pub extern "C" fn im_profile_match(
    profile: *const ImProfile,
    consumers_propose: bool,
    partners: *mut isize,
    len: usize,
) -> ImStatus {
    guard(|| {
        // SAFETY: null or a live handle from `im_profile_new`.
        let p = &unsafe { profile.as_ref() }
            .ok_or_else(|| Failure::new(ImStatus::NullPointer, "`profile` is null"))?
            .profile;
        let n = p.providers().len();
        if len != n {
            return Err(Failure::new(ImStatus::OutOfRange, format!("need {n} slots, got {len}")));
        }
        let side = if consumers_propose { Side::Consumers } else { Side::Providers };
        let m = gale_shapley(p, side);
        if n > 0 {
            if partners.is_null() {
                return Err(Failure::new(ImStatus::NullPointer, "`partners` is null"));
            }
            // SAFETY: non-null and valid for `len` writes per the contract.
            let dst = unsafe { slice::from_raw_parts_mut(partners, len) };
            for (i, slot) in dst.iter_mut().enumerate() {
                *slot = m.provider_partner(i).map_or(-1, |c| c as isize);
            }
        }
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn im_profile_free(profile: *mut ImProfile) {
    if !profile.is_null() {
        // SAFETY: produced by `Box::into_raw` in `im_profile_new`.
        drop(unsafe { Box::from_raw(profile) });
    }
}

/// Directed spread graph.
pub struct ImGraph {
    graph: SpreadGraph,
}

/// Parses an edge list (`from to cost` per line, `#` comments).
#[no_mangle]
pub extern "C" fn im_graph_parse(edges: *const c_char, graph: *mut *mut ImGraph) -> ImStatus {
    guard(|| {
        let g = parse_edge_list(text(edges, "edges")?)?;
        boxed(ImGraph { graph: g }, graph, "graph")
    })
}

/// Cheapest route from `source` to `target`. `path` receives the node ids
/// separated by single spaces; free it with `im_string_free`.
#[no_mangle]
pub extern "C" fn im_graph_shortest_path(
    graph: *const ImGraph,
    source: *const c_char,
    target: *const c_char,
    cost: *mut f64,
    path: *mut *mut c_char,
) -> ImStatus {
    guard(|| {
        // SAFETY: null or a live handle from `im_graph_parse`.
        let g = &unsafe { graph.as_ref() }
            .ok_or_else(|| Failure::new(ImStatus::NullPointer, "`graph` is null"))?
            .graph;
        let (c, nodes) = min_cost_spread_path(g, text(source, "source")?, text(target, "target")?)?;
        let joined = CString::new(nodes.join(" ")).map_err(|e| Failure::new(ImStatus::InvalidArgument, e))?;
        let cost = out(cost, "cost")?;
        let path = out(path, "path")?;
        *cost = c;
        *path = joined.into_raw();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn im_graph_free(graph: *mut ImGraph) {
    if !graph.is_null() {
        // SAFETY: produced by `Box::into_raw` in `im_graph_parse`.
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// Releases a string returned by this library.
#[no_mangle]
pub extern "C" fn im_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by `CString::into_raw` in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}
