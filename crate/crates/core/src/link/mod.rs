//! Upstream scenario assembly, the coherent capture, and per-channel
//! demodulation back to bits.

pub mod ber;
pub mod demod;
pub mod dummy;
pub mod loopback;
pub mod onu;
pub mod scenario;

pub use ber::ber_count;
pub use demod::{channel_demodulate, DemodDiagnostics};
pub use dummy::{dummy_bank_generate, DummyBankSpec};
pub use loopback::awgn_loopback;
pub use onu::{onu_transmit, OnuInstance, ScmQamConfig};
pub use scenario::{scenario_run, upstream_at_preamp, PreampInput, ScenarioConfig, UpstreamCapture};
