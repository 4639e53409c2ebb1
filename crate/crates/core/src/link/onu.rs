use serde::{Deserialize, Serialize};

use crate::dsp::mix::upconvert_real;
use crate::dsp::{prbs_generate, pulse_shape, qam_map, resample_real, BitStream, ModFormat, PrbsSpec, RealWaveform, RrcSpec};
use crate::error::{Error, Result};
use crate::metrics::channel_freq;
use crate::photonics::{fiber_propagate, intensity_modulate, laser_emit, FiberSpec, LaserSpec, ModulatorSpec, OpticalField};
use crate::photonics::laser::REFERENCE_TEMPERATURE;

/// Subcarrier QAM transmitter settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScmQamConfig {
    pub baud: f64,
    pub rolloff: f64,
    pub rf_carrier: f64,
    pub dac_rate: f64,
    pub format: ModFormat,
    pub prbs: PrbsSpec,
    /// RRC length in symbols.
    pub span_symbols: usize,
    /// Oversampling of the shaped baseband.
    pub samples_per_symbol: usize,
}

impl Default for ScmQamConfig {
    fn default() -> Self {
        ScmQamConfig {
            baud: 1.072e9,
            rolloff: 0.01,
            rf_carrier: 0.635e9,
            dac_rate: 4.9e9,
            format: ModFormat::Qam4,
            prbs: PrbsSpec::default(),
            span_symbols: 256,
            samples_per_symbol: 4,
        }
    }
}

impl ScmQamConfig {
    pub fn rrc(&self) -> RrcSpec {
        RrcSpec { rolloff: self.rolloff, span_symbols: self.span_symbols, samples_per_symbol: self.samples_per_symbol as f64 }
    }

    /// Rate of the shaped baseband, `baud * samples_per_symbol`.
    pub fn shaping_rate(&self) -> f64 {
        self.baud * self.samples_per_symbol as f64
    }

    /// Lower and upper edge of the real SCM signal.
    pub fn band_edges(&self) -> (f64, f64) {
        let half = (1.0 + self.rolloff) * self.baud / 2.0;
        (self.rf_carrier - half, self.rf_carrier + half)
    }

    pub fn bit_rate(&self) -> f64 {
        self.baud * self.format.bits_per_symbol() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.baud > 0.0) || !(self.dac_rate > 0.0) || self.samples_per_symbol < 2 {
            return Err(Error::invalid("SCM transmitter needs positive rates and >= 2 samples per symbol"));
        }
        let (lo, hi) = self.band_edges();
        if lo <= 0.0 || hi >= self.dac_rate / 2.0 {
            return Err(Error::SpectralOverlap(format!(
                "SCM band [{lo:.4e}, {hi:.4e}] Hz must sit inside (0, {:.4e}) Hz",
                self.dac_rate / 2.0
            )));
        }
        self.rrc().validate()
    }

    /// Electrical chain up to `out_rate`: bits, symbols, RRC shaping,
    /// upconversion, DAC-rate conversion and final rate conversion.
    /// The drive is scaled to unit RMS.
    pub fn drive(&self, n_symbols: usize, out_rate: f64) -> Result<(RealWaveform, BitStream)> {
        self.validate()?;
        if n_symbols == 0 {
            return Ok((RealWaveform::new(Vec::new(), out_rate)?, BitStream::default()));
        }
        let bits = prbs_generate(&self.prbs, n_symbols * self.format.bits_per_symbol())?;
        let symbols = qam_map(&bits, self.format, self.baud)?;
        let shaped = pulse_shape(&symbols, &self.rrc())?;
        let rf = upconvert_real(&shaped, self.rf_carrier)?;
        let dac = resample_real(&rf, self.dac_rate)?;
        let out = resample_real(&dac, out_rate)?;
        Ok((out.normalized_rms(), bits))
    }
}

/// One end user: a laser locked on `channel_id`, its modulator and feeder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnuInstance {
    pub channel_id: i32,
    pub laser: LaserSpec,
    /// Light diverted to the locking branch, dB.
    #[serde(default = "default_tap")]
    pub lock_tap_db: f64,
    pub modulator: ModulatorSpec,
    #[serde(default)]
    pub tx: ScmQamConfig,
    pub feeder: FiberSpec,
}

fn default_tap() -> f64 {
    3.0
}

/// Reference transmitter parameters: (EAM insertion loss dB, feeder km, CSPR dB).
/// Together with an 8 dBm laser and a 3 dB locking tap they give -3, -5
/// and -6 dBm at the splitter. The second and third EAMs are modelled with
/// a 4 dB higher CSPR to reproduce their weaker modulation.
const REFERENCE_ONUS: [(f64, f64, f64); 3] = [(7.8, 1.0, 14.0), (9.2, 4.0, 18.0), (10.996, 0.02, 18.0)];

impl OnuInstance {
    /// ONU number `k` (0, 1 or 2) of the reference set on `channel_id`. Each
    /// gets its own PRBS starting state.
    pub fn reference(k: usize, channel_id: i32) -> Result<Self> {
        let &(il, km, cspr) = REFERENCE_ONUS
            .get(k)
            .ok_or_else(|| Error::invalid(format!("reference ONU index {k} out of range")))?;
        let mut tx = ScmQamConfig::default();
        tx.prbs.seed = 1 + 4099 * k as u32;
        Ok(OnuInstance {
            channel_id,
            laser: LaserSpec::onu(channel_freq(channel_id)?),
            lock_tap_db: default_tap(),
            modulator: ModulatorSpec::eam(il, cspr),
            tx,
            feeder: FiberSpec::smf(km),
        })
    }

    /// Mean optical power reaching the splitter, ignoring clipping.
    pub fn launch_power_at_splitter_dbm(&self) -> f64 {
        self.laser.power_dbm - self.lock_tap_db - self.modulator.insertion_loss_db - self.feeder.loss_db()
    }

    pub fn validate(&self) -> Result<()> {
        channel_freq(self.channel_id)?;
        self.tx.validate()?;
        self.feeder.validate()?;
        self.laser.validate()
    }
}

/// Transmit `n_symbols` from a locked ONU. The field is returned in the
/// ONU's own frame, centred on its channel.
pub fn onu_transmit(onu: &OnuInstance, n_symbols: usize, sim_rate: f64, rng_seed: u64) -> Result<(OpticalField, BitStream)> {
    onu.validate()?;
    let (drive, bits) = onu.tx.drive(n_symbols, sim_rate)?;
    let locked = LaserSpec {
        power_dbm: onu.laser.power_dbm - onu.lock_tap_db,
        freq_offset: channel_freq(onu.channel_id)?,
        tuning_coeff: 0.0,
        temperature: REFERENCE_TEMPERATURE,
        ..onu.laser.clone()
    };
    let cw = laser_emit(&locked, drive.len(), sim_rate, rng_seed)?;
    let modulated = intensity_modulate(&cw, &drive, &onu.modulator)?;
    let out = fiber_propagate(&modulated.field, &onu.feeder)?;
    Ok((out, bits))
}
