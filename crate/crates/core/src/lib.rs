//! End-to-end physical-layer simulator for frequency-multiplexed
//! multipoint-to-point optical access.
//!
//! ONU lasers are frequency-locked to lines of an OLT-distributed comb,
//! intensity-modulated with subcarrier QAM, passively combined, and detected
//! together by one coherent receiver whose output is split back into
//! channels digitally.

pub mod dsp;
pub mod config;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod link;
pub mod locking;
pub mod metrics;
pub mod photonics;
pub mod seed;

pub use error::{Error, Result};
