//! Deterministic simulation of an information market where fake and true
//! news compete.
//!
//! * [`market`] solves linear supply/demand equilibria and classifies their
//!   stability.
//! * [`payoffs`] evaluates provider, consumer and repeated-game payoffs.
//! * [`matching`] pairs providers with consumers by deferred acceptance.
//! * [`game`] runs iterated true/fake news games and stage-game Nash checks.
//! * [`voting`] counts ballots by plurality, Droop quota and Meek STV.
//! * [`dynamics`] models retention decay and utility over information sets.
//! * [`analysis`] computes market health, comparative sweeps and cheapest
//!   spread routes.
//! * [`scenario`] and [`cli`] tie everything to TOML scenarios and CSV output.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod market;
pub mod matching;
pub mod payoffs;
pub mod scenario;
pub mod voting;

pub use error::{Error, Result};
