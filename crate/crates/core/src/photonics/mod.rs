//! Optical building blocks: sources, modulators, fibre, amplification and
//! detection, all on complex envelopes sampled relative to a global
//! reference frequency.

pub mod comb;
pub mod combine;
pub mod edfa;
pub mod fiber;
pub mod field;
pub mod laser;
pub mod modulator;
pub mod receiver;

pub use comb::{comb_generate, CombSpec};
pub use combine::{combine, Combined};
pub use edfa::{edfa_amplify, EdfaSpec};
pub use fiber::{fiber_propagate, FiberSpec};
pub use field::{dbm_to_watts, watts_to_dbm, OpticalField};
pub use laser::{laser_emit, LaserSpec};
pub use modulator::{intensity_modulate, Modulated, ModulatorKind, ModulatorSpec};
pub use receiver::{coherent_detect, photodiode_detect, ReceiverSpec};
