use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::field::{dbm_to_watts, OpticalField};
use crate::error::{Error, Result};
use crate::seed;

/// Temperature at which a laser sits at its nominal `freq_offset`.
pub const REFERENCE_TEMPERATURE: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSpec {
    pub power_dbm: f64,
    /// Lorentzian FWHM, Hz.
    pub linewidth: f64,
    /// Offset from the global reference at the reference temperature, Hz.
    pub freq_offset: f64,
    /// Thermal tuning, Hz per degree C.
    #[serde(default)]
    pub tuning_coeff: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

fn default_temperature() -> f64 {
    REFERENCE_TEMPERATURE
}

impl LaserSpec {
    /// OLT laser: 13 dBm, 30 kHz.
    pub fn olt() -> Self {
        LaserSpec {
            power_dbm: 13.0,
            linewidth: 30e3,
            freq_offset: 0.0,
            tuning_coeff: 0.0,
            temperature: REFERENCE_TEMPERATURE,
        }
    }

    /// ONU laser: 8 dBm. The linewidth is not reported; 300 kHz is typical
    /// of a discrete-mode device.
    pub fn onu(freq_offset: f64) -> Self {
        LaserSpec {
            power_dbm: 8.0,
            linewidth: 300e3,
            freq_offset,
            tuning_coeff: 160e9 / 13.0,
            temperature: REFERENCE_TEMPERATURE,
        }
    }

    /// Emission frequency relative to the global reference.
    pub fn emission_offset(&self) -> f64 {
        self.freq_offset + self.tuning_coeff * (self.temperature - REFERENCE_TEMPERATURE)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth >= 0.0) || !self.power_dbm.is_finite() {
            return Err(Error::invalid("laser linewidth must be >= 0 and power finite"));
        }
        Ok(())
    }
}

/// Laser phase as a Wiener process with per-sample increment variance
/// `2 pi linewidth / fs`, starting from a random phase.
pub fn phase_walk(linewidth: f64, n: usize, fs: f64, rng_seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(rng_seed);
    let mut phi = rng.random_range(0.0..2.0 * PI);
    let sigma = (2.0 * PI * linewidth / fs).sqrt();
    let mut out = Vec::with_capacity(n);
    if sigma == 0.0 {
        out.resize(n, phi);
        return out;
    }
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    for _ in 0..n {
        out.push(phi);
        phi += normal.sample(&mut rng);
    }
    out
}

pub fn laser_emit(spec: &LaserSpec, n_samples: usize, fs: f64, rng_seed: u64) -> Result<OpticalField> {
    spec.validate()?;
    if !(fs > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    let amp = dbm_to_watts(spec.power_dbm).sqrt();
    let env = phase_walk(spec.linewidth, n_samples, fs, rng_seed)
        .into_iter()
        .map(|p| Complex64::from_polar(amp, p))
        .collect();
    OpticalField::new(env, fs, spec.emission_offset())
}
