use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{OpticalField, REFERENCE_WAVELENGTH, SPEED_OF_LIGHT};
use crate::dsp::fft::{bin_freq, fft_in_place, ifft_in_place};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    pub length_km: f64,
    #[serde(default = "default_loss")]
    pub loss_db_per_km: f64,
    /// D in ps/(nm km).
    #[serde(default = "default_dispersion")]
    pub dispersion_ps_nm_km: f64,
    #[serde(default = "default_true")]
    pub dispersion_enabled: bool,
}

fn default_loss() -> f64 {
    0.2
}
fn default_dispersion() -> f64 {
    17.0
}
fn default_true() -> bool {
    true
}

impl FiberSpec {
    pub fn smf(length_km: f64) -> Self {
        FiberSpec {
            length_km,
            loss_db_per_km: default_loss(),
            dispersion_ps_nm_km: default_dispersion(),
            dispersion_enabled: true,
        }
    }

    pub fn loss_db(&self) -> f64 {
        self.length_km * self.loss_db_per_km
    }

    /// Group velocity dispersion at the reference wavelength, s^2/m.
    pub fn beta2(&self) -> f64 {
        let d = self.dispersion_ps_nm_km * 1e-12 / (1e-9 * 1e3);
        -d * REFERENCE_WAVELENGTH * REFERENCE_WAVELENGTH / (2.0 * PI * SPEED_OF_LIGHT)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_km >= 0.0) || !(self.loss_db_per_km >= 0.0) || !self.dispersion_ps_nm_km.is_finite() {
            return Err(Error::invalid("fiber length and loss must be non-negative"));
        }
        Ok(())
    }
}

/// Loss plus first-order chromatic dispersion,
/// `H(w) = exp(j beta2 w^2 L / 2)` with `w` taken from the global reference.
/// The FFT makes the dispersion circular over the window.
pub fn fiber_propagate(field: &OpticalField, spec: &FiberSpec) -> Result<OpticalField> {
    spec.validate()?;
    let mut out = field.clone();
    out.apply_gain_db(-spec.loss_db());
    if spec.dispersion_enabled && spec.length_km > 0.0 && spec.dispersion_ps_nm_km != 0.0 && !out.is_empty() {
        let n = out.len();
        let k = spec.beta2() * spec.length_km * 1e3 / 2.0;
        fft_in_place(&mut out.envelope);
        for (i, z) in out.envelope.iter_mut().enumerate() {
            let w = 2.0 * PI * (field.ref_offset + bin_freq(i, n, field.sample_rate));
            *z *= Complex64::from_polar(1.0, k * w * w);
        }
        ifft_in_place(&mut out.envelope);
    }
    Ok(out)
}
