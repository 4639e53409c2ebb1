use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::field::{OpticalField, ELECTRON_CHARGE};
use crate::dsp::fft::{bin_freq, fft_in_place, ifft_in_place};
use crate::dsp::{ComplexWaveform, RealWaveform};
use crate::error::{Error, Result};
use crate::seed;

/// Photoreceiver front end. Shot noise is added at the photodiode, ahead of
/// the electrical roll-off; thermal noise belongs to the TIA/ADC and is added
/// after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSpec {
    /// A/W.
    pub responsivity: f64,
    /// 3-dB point of the electrical roll-off, Hz.
    pub bw_3db: f64,
    /// Butterworth order of the roll-off magnitude.
    pub rolloff_order: u32,
    pub rolloff_enabled: bool,
    pub shot_noise_enabled: bool,
    /// One-sided thermal current PSD per quadrature, A^2/Hz.
    pub thermal_noise_psd: f64,
}

impl Default for ReceiverSpec {
    fn default() -> Self {
        ReceiverSpec {
            responsivity: 0.8,
            bw_3db: 70e9,
            rolloff_order: 2,
            rolloff_enabled: true,
            shot_noise_enabled: true,
            thermal_noise_psd: 4.0e-19,
        }
    }
}

impl ReceiverSpec {
    /// Slow photodiode used by the wavelength-locking loop.
    pub fn locking() -> Self {
        ReceiverSpec { bw_3db: 1.5e9, thermal_noise_psd: 1e-22, ..Default::default() }
    }

    /// Magnitude response at electrical frequency `f`.
    pub fn gain(&self, f: f64) -> f64 {
        if !self.rolloff_enabled {
            return 1.0;
        }
        1.0 / (1.0 + (f / self.bw_3db).abs().powi(2 * self.rolloff_order as i32)).sqrt()
    }

    /// Attenuation in dB at `f` (positive number).
    pub fn rolloff_db(&self, f: f64) -> f64 {
        -20.0 * self.gain(f).log10()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.responsivity > 0.0) || !(self.bw_3db > 0.0) || !(self.thermal_noise_psd >= 0.0) || self.rolloff_order == 0 {
            return Err(Error::invalid("receiver needs positive responsivity, bandwidth and order"));
        }
        Ok(())
    }
}

fn apply_rolloff(x: &mut [Complex64], rate: f64, offset: f64, spec: &ReceiverSpec) {
    if !spec.rolloff_enabled || x.is_empty() {
        return;
    }
    let n = x.len();
    fft_in_place(x);
    for (k, z) in x.iter_mut().enumerate() {
        *z *= spec.gain(offset + bin_freq(k, n, rate));
    }
    ifft_in_place(x);
}

fn add_complex_noise(x: &mut [Complex64], var: f64, rng_seed: u64) {
    if var <= 0.0 {
        return;
    }
    let mut rng = seed::rng(rng_seed);
    let normal = Normal::new(0.0, (var / 2.0).sqrt()).expect("finite variance");
    for z in x.iter_mut() {
        *z += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
    }
}

/// Direct detection: `i = R |e|^2` plus noise, band-limited by the roll-off.
pub fn photodiode_detect(field: &OpticalField, spec: &ReceiverSpec, rng_seed: u64) -> Result<RealWaveform> {
    spec.validate()?;
    let fs = field.sample_rate;
    let mut i: Vec<Complex64> =
        field.envelope.iter().map(|e| Complex64::new(spec.responsivity * e.norm_sqr(), 0.0)).collect();
    let mean = i.iter().map(|z| z.re).sum::<f64>() / i.len().max(1) as f64;
    let mut rng = seed::rng(seed::derive(rng_seed, "shot"));
    if spec.shot_noise_enabled && mean > 0.0 {
        let normal = Normal::new(0.0, (ELECTRON_CHARGE * mean * fs).sqrt()).expect("finite");
        i.iter_mut().for_each(|z| z.re += normal.sample(&mut rng));
    }
    apply_rolloff(&mut i, fs, 0.0, spec);
    let mut out: Vec<f64> = i.into_iter().map(|z| z.re).collect();
    if spec.thermal_noise_psd > 0.0 {
        let mut rng = seed::rng(seed::derive(rng_seed, "thermal"));
        let normal = Normal::new(0.0, (spec.thermal_noise_psd * fs / 2.0).sqrt()).expect("finite");
        out.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
    }
    RealWaveform::new(out, fs)
}

/// Ideal phase-diverse balanced receiver: `r = R e_sig conj(e_lo)` plus
/// shot and thermal noise. The output is centred on the LO frame, so
/// `center_offset = sig.ref_offset - lo.ref_offset`.
pub fn coherent_detect(
    sig: &OpticalField,
    lo: &OpticalField,
    spec: &ReceiverSpec,
    rng_seed: u64,
) -> Result<ComplexWaveform> {
    spec.validate()?;
    if sig.sample_rate != lo.sample_rate {
        return Err(Error::config("signal and LO use different sample rates"));
    }
    if sig.len() != lo.len() {
        return Err(Error::Length(format!("signal has {} samples, LO {}", sig.len(), lo.len())));
    }
    let fs = sig.sample_rate;
    let offset = sig.ref_offset - lo.ref_offset;
    let mut r: Vec<Complex64> =
        sig.envelope.iter().zip(&lo.envelope).map(|(s, l)| spec.responsivity * s * l.conj()).collect();
    if spec.shot_noise_enabled {
        let i_dc = spec.responsivity * (sig.mean_power() + lo.mean_power());
        add_complex_noise(&mut r, 2.0 * ELECTRON_CHARGE * i_dc * fs, seed::derive(rng_seed, "shot"));
    }
    apply_rolloff(&mut r, fs, offset, spec);
    add_complex_noise(&mut r, spec.thermal_noise_psd * fs, seed::derive(rng_seed, "thermal"));
    ComplexWaveform::new(r, fs, offset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> ReceiverSpec {
        ReceiverSpec { shot_noise_enabled: false, thermal_noise_psd: 0.0, ..Default::default() }
    }

    #[test]
    fn rolloff_points() {
        let r = ReceiverSpec::default();
        assert!((r.rolloff_db(70e9) - 3.0103).abs() < 1e-3);
        // 10 log10(1 + (8/7)^4)
        assert!((r.rolloff_db(80e9) - 4.3226).abs() < 1e-3);
        assert!(r.rolloff_db(1e9) < 1e-6);
        let off = ReceiverSpec { rolloff_enabled: false, ..r };
        assert_eq!(off.rolloff_db(80e9), 0.0);
    }

    #[test]
    fn beat_tone_lands_at_frequency_difference() {
        let fs = 16e9;
        let n = 1024;
        let sig = OpticalField::new(vec![Complex64::new(1e-3, 0.0); n], fs, 2e9).unwrap();
        let lo = OpticalField::new(vec![Complex64::new(0.1, 0.0); n], fs, 0.5e9).unwrap();
        let r = coherent_detect(&sig, &lo, &quiet(), 0).unwrap();
        assert_eq!(r.center_offset(), 1.5e9);
        // in the LO frame the tone is at +1.5 GHz: reframe the signal first
        let mut s2 = sig.clone();
        s2.reframe(lo.ref_offset);
        let r = coherent_detect(&s2, &lo, &quiet(), 0).unwrap();
        assert_eq!(r.center_offset(), 0.0);
        let (freqs, p) = crate::dsp::fft::power_spectrum(r.samples(), fs);
        let k = p.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!((freqs[k] - 1.5e9).abs() < 1e-3);
        assert!((p[k] / (0.8f64 * 1e-3 * 0.1).powi(2) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shot_noise_variance() {
        let fs = 10e9;
        let n = 1 << 16;
        let p: f64 = 1e-3;
        let f = OpticalField::new(vec![Complex64::new(p.sqrt(), 0.0); n], fs, 0.0).unwrap();
        let spec = ReceiverSpec { rolloff_enabled: false, thermal_noise_psd: 0.0, ..Default::default() };
        let i = photodiode_detect(&f, &spec, 2).unwrap();
        let mean = i.mean();
        let var = i.mean_square() - mean * mean;
        // 2 q I B with B = fs / 2
        let want = ELECTRON_CHARGE * 0.8 * p * fs;
        assert!((var / want - 1.0).abs() < 0.03, "{}", var / want);
    }

    #[test]
    fn thermal_noise_is_not_rolled_off() {
        let fs = 200e9;
        let n = 1 << 15;
        let f = OpticalField::dark(n, fs, 0.0);
        let lo = OpticalField::new(vec![Complex64::new(1.0, 0.0); n], fs, 0.0).unwrap();
        let spec = ReceiverSpec { shot_noise_enabled: false, ..Default::default() };
        let r = coherent_detect(&f, &lo, &spec, 1).unwrap();
        let (freqs, psd) = crate::dsp::fft::welch_psd(r.samples(), fs, 256);
        let near = |t: f64| {
            let v: Vec<f64> = freqs.iter().zip(&psd).filter(|(x, _)| (**x - t).abs() < 5e9).map(|(_, p)| *p).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!((near(80e9) / near(0.0) - 1.0).abs() < 0.15);
        assert!((near(0.0) / (spec.thermal_noise_psd) - 1.0).abs() < 0.1);
    }
}
