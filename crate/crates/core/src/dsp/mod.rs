//! Sampled-signal containers and generic DSP primitives.

pub mod fft;
pub mod fir;
pub mod mix;
pub mod prbs;
pub mod qam;
pub mod resample;
pub mod rrc;
pub mod waveform;

pub use mix::{bandpass_extract, downconvert, downconvert_real, upconvert_real};
pub use prbs::{prbs_generate, BitStream, Prbs, PrbsSpec};
pub use qam::{qam_demap, qam_map, ModFormat, SymbolStream};
pub use resample::{resample_complex, resample_real};
pub use rrc::{matched_filter, pulse_shape, rrc_taps, RrcSpec};
pub use waveform::{Band, ComplexWaveform, RealWaveform};
