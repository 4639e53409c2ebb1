use num_complex::Complex64;

use crate::dsp::mix::frequency_shift;
use crate::error::{Error, Result};

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Wavelength of the OLT laser, which is the reference for all optical
/// frequency offsets.
pub const REFERENCE_WAVELENGTH: f64 = 1550.08e-9;

/// Optical frequency of the global reference, Hz (about 193.4 THz).
pub fn reference_frequency() -> f64 {
    SPEED_OF_LIGHT / REFERENCE_WAVELENGTH
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Complex optical envelope in sqrt(W), sampled at `sample_rate`, whose DC
/// sits `ref_offset` Hz from the global reference.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalField {
    pub envelope: Vec<Complex64>,
    pub sample_rate: f64,
    pub ref_offset: f64,
}

impl OpticalField {
    pub fn new(envelope: Vec<Complex64>, sample_rate: f64, ref_offset: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if envelope.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("optical envelope contains non-finite samples"));
        }
        Ok(OpticalField { envelope, sample_rate, ref_offset })
    }

    pub fn dark(n: usize, sample_rate: f64, ref_offset: f64) -> Self {
        OpticalField { envelope: vec![Complex64::default(); n], sample_rate, ref_offset }
    }

    pub fn len(&self) -> usize {
        self.envelope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envelope.is_empty()
    }

    /// Mean power in W.
    pub fn mean_power(&self) -> f64 {
        if self.envelope.is_empty() {
            return 0.0;
        }
        self.envelope.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.envelope.len() as f64
    }

    pub fn mean_power_dbm(&self) -> f64 {
        watts_to_dbm(self.mean_power())
    }

    /// Apply a power gain in dB (negative for loss).
    pub fn apply_gain_db(&mut self, gain_db: f64) {
        let a = 10f64.powf(gain_db / 20.0);
        self.envelope.iter_mut().for_each(|z| *z *= a);
    }

    /// Re-express the same optical field with its DC at `ref_offset`.
    pub fn reframe(&mut self, ref_offset: f64) {
        let shift = self.ref_offset - ref_offset;
        frequency_shift(&mut self.envelope, shift, self.sample_rate);
        self.ref_offset = ref_offset;
    }
}
