//! Comb-referenced wavelength locking of ONU lasers.

pub mod acquire;
pub mod beat;
pub mod pi;
pub mod tec;

pub use acquire::{acquire_lock, write_histories, LockConfig, LockSample, LockState};
pub use beat::{measure_beat, measure_beat_in};
pub use pi::{pi_step, PiController};
pub use tec::{tec_tune, TecModel};
