//! Climate-contingent finance toolkit.
//!
//! Models two counterparties around a ladder of climate scenarios:
//!
//! * an **Adapter** (e.g. a city) that sells scenario-triggered contracts and
//!   invests the proceeds in adaptation projects whose productivity rises with
//!   climate severity, and
//! * a **Backer** (e.g. an insurer or fund) that buys those contracts as a
//!   hedge, paying notional up front and receiving `price x principal` when a
//!   scenario at or above the contract trigger is realized.
//!
//! The crate provides the scenario ladder and probability model
//! ([`scenario`]), contract payoff and break-even pricing ([`contracts`]),
//! adaptation-income accounting with mismatch discounts and knowledge decay
//! ([`adaptation`]), a Monte Carlo wealth simulation for both parties
//! ([`engine`]), a derivative-free price search that equalizes the two
//! parties' expected outcomes ([`price`]), climate projection ingestion and
//! quantile binning ([`climate`]), and a climate-contingent bond structurer
//! that calibrates a coupon schedule to a traditional-bond NPV target
//! ([`bond`]).
//!
//! All stochastic routines draw from explicit seeded streams ([`rng`]) so
//! that every result is reproducible and parameter sweeps can share common
//! random numbers.
//!
//! # Quick start
//!
//! ```
//! use ccfin_core::engine::{run_batch, SimulationConfig};
//! use ccfin_core::stats::summarize;
//!
//! let cfg = SimulationConfig::default();
//! let results = run_batch(&cfg).unwrap();
//! let outcomes_a: Vec<f64> = results.iter().map(|r| r.outcome_a).collect();
//! let stats = summarize(&outcomes_a).unwrap();
//! assert!(stats.mean > 0.0);
//! ```

pub mod adaptation;
pub mod bond;
pub mod climate;
pub mod contracts;
pub mod engine;
pub mod error;
pub mod price;
pub mod rng;
pub mod scenario;
pub mod search;
pub mod stats;

pub use error::{CcbError, DataError, ModelError, OptimizeError, StructuringError};
