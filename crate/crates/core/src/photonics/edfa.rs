use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::field::{db_to_linear, reference_frequency, OpticalField, PLANCK};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdfaSpec {
    pub gain_db: f64,
    pub noise_figure_db: f64,
}

impl Default for EdfaSpec {
    fn default() -> Self {
        EdfaSpec { gain_db: 30.0, noise_figure_db: 5.0 }
    }
}

impl EdfaSpec {
    /// Spontaneous emission factor, taken as NF / 2 in the high-gain limit.
    pub fn n_sp(&self) -> f64 {
        db_to_linear(self.noise_figure_db) / 2.0
    }

    /// ASE power spectral density in the signal polarisation, W/Hz.
    pub fn ase_psd(&self) -> f64 {
        (db_to_linear(self.gain_db) - 1.0) * self.n_sp() * PLANCK * reference_frequency()
    }
}

/// Amplify and add white complex Gaussian ASE over the simulated bandwidth.
pub fn edfa_amplify(field: &OpticalField, spec: &EdfaSpec, rng_seed: u64) -> Result<OpticalField> {
    if !(spec.gain_db >= 0.0) || !spec.noise_figure_db.is_finite() {
        return Err(Error::invalid("amplifier gain must be >= 0 dB"));
    }
    let mut out = field.clone();
    out.apply_gain_db(spec.gain_db);
    let var = spec.ase_psd() * field.sample_rate;
    if var > 0.0 {
        let mut rng = seed::rng(rng_seed);
        let normal = Normal::new(0.0, (var / 2.0).sqrt()).expect("finite variance");
        for z in out.envelope.iter_mut() {
            *z += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::fft::welch_psd;

    #[test]
    fn ase_psd_value() {
        let s = EdfaSpec::default().ase_psd();
        assert!((s / 2.0e-16 - 1.0).abs() < 0.05, "{s}");
    }

    fn measured_psd(spec: &EdfaSpec) -> f64 {
        let fs = 10e9;
        let dark = OpticalField::dark(1 << 16, fs, 0.0);
        let out = edfa_amplify(&dark, spec, 3).unwrap();
        let (_, psd) = welch_psd(&out.envelope, fs, 1024);
        psd.iter().sum::<f64>() / psd.len() as f64
    }

    #[test]
    fn measured_psd_matches_formula() {
        for g in [10.0, 20.0, 30.0] {
            let spec = EdfaSpec { gain_db: g, noise_figure_db: 5.0 };
            let m = measured_psd(&spec);
            assert!((m / spec.ase_psd() - 1.0).abs() < 0.05, "gain {g}: {}", m / spec.ase_psd());
        }
    }

    #[test]
    fn negative_gain_is_rejected() {
        let dark = OpticalField::dark(4, 1.0, 0.0);
        assert!(edfa_amplify(&dark, &EdfaSpec { gain_db: -1.0, noise_figure_db: 5.0 }, 0).is_err());
    }
}
