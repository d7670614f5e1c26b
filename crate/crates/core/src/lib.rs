//! Outage analysis of a two-source, multi-relay network in which every
//! relay applies successive interference cancellation and forwards each
//! block either re-encoded (when decoded) or amplified (when not).
//!
//! The crate pairs a full-system Monte Carlo simulator ([`montecarlo`]) with
//! closed-form first-hop probabilities and an event-enumeration calculator
//! ([`analytic`]) so that each can check the other. [`preselect`] chooses
//! which relays take part, [`dmt`] fits diversity orders, and [`cli`] backs
//! the `sicrelay` binary.
//!
//! Conventions: `γ = 1/σ²` is the per-node transmit SNR, `Y = |h_1|²` and
//! `X = |h_2|²` are the source-to-relay gains, `k_i = 2^{(N_F/2)R_i} − 1` are
//! the rate thresholds over `N_F = N_RU + 1` slots.

pub mod analytic;
pub mod cli;
pub mod destination;
pub mod dmt;
pub mod error;
pub mod estimate;
pub mod fading;
pub mod montecarlo;
pub mod preselect;
pub mod protocol;
pub mod scenario;

pub use error::{Error, Result};
pub use estimate::OutageEstimate;
pub use fading::SeedSpec;
pub use protocol::{DecodeEvent, RateConfig, Source};
pub use scenario::{db_to_linear, linear_to_db, RelayLinks, ScenarioConfig};
