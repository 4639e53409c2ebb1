//! Frequency conversion and channel extraction.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fir::{filter_same, lowpass};
use super::waveform::{Band, ComplexWaveform, RealWaveform};
use crate::error::{Error, Result};

/// Transition width of the downconversion lowpass, as a fraction of its
/// bandwidth.
pub const DOWNCONVERT_TRANSITION: f64 = 0.1;
/// Transition width of the channel-extraction filter, as a fraction of its
/// bandwidth. At 2.5 GHz this is 62.5 MHz, narrower than the 146 MHz guard
/// band between neighbouring SCM channels.
pub const EXTRACT_TRANSITION: f64 = 0.025;
const DOWNCONVERT_ATTEN_DB: f64 = 70.0;
const EXTRACT_ATTEN_DB: f64 = 60.0;

/// Multiply by `exp(j 2 pi f t)` with `t = n / rate`.
pub fn frequency_shift(x: &mut [Complex64], f: f64, rate: f64) {
    if f == 0.0 {
        return;
    }
    let w = 2.0 * PI * f / rate;
    for (n, z) in x.iter_mut().enumerate() {
        // direct evaluation keeps the phase exact over long records
        *z *= Complex64::from_polar(1.0, w * n as f64);
    }
}

/// `s[n] = Re{a[n] exp(j 2 pi f_c n / fs)}`.
pub fn upconvert_real(baseband: &ComplexWaveform, f_c: f64) -> Result<RealWaveform> {
    let fs = baseband.sample_rate();
    let half = baseband.band().map_or(fs / 2.0, |b| b.edge());
    if f_c - half <= 0.0 {
        return Err(Error::SpectralOverlap(format!(
            "carrier {f_c} Hz puts the lower band edge at {} Hz",
            f_c - half
        )));
    }
    if f_c + half >= fs / 2.0 {
        return Err(Error::SpectralOverlap(format!(
            "carrier {f_c} Hz puts the upper band edge {} Hz beyond Nyquist {} Hz",
            f_c + half,
            fs / 2.0
        )));
    }
    let w = 2.0 * PI * f_c / fs;
    let s = baseband
        .samples()
        .iter()
        .enumerate()
        .map(|(n, a)| (a * Complex64::from_polar(1.0, w * n as f64)).re)
        .collect();
    Ok(RealWaveform::new(s, fs)?.with_band(Band::new(f_c - half, f_c + half)))
}

fn lowpass_for(bandwidth: f64, transition_fraction: f64, atten: f64, rate: f64) -> Vec<f64> {
    let transition = transition_fraction * bandwidth / rate;
    let cutoff = (bandwidth / 2.0 - transition_fraction * bandwidth / 2.0) / rate;
    lowpass(cutoff, transition, atten)
}

/// Real passband to complex baseband: `lowpass(2 x e^{-j 2 pi f_c t})`. The
/// lowpass stopband starts at `bandwidth / 2`.
pub fn downconvert_real(w: &RealWaveform, f_c: f64, bandwidth: f64) -> Result<ComplexWaveform> {
    let fs = w.sample_rate();
    if f_c < 0.0 || f_c + bandwidth / 2.0 > fs / 2.0 {
        return Err(Error::range(format!(
            "band {f_c} +/- {} Hz outside +/-{} Hz",
            bandwidth / 2.0,
            fs / 2.0
        )));
    }
    let mut x: Vec<Complex64> = w.samples().iter().map(|&v| Complex64::new(2.0 * v, 0.0)).collect();
    frequency_shift(&mut x, -f_c, fs);
    let h = lowpass_for(bandwidth, DOWNCONVERT_TRANSITION, DOWNCONVERT_ATTEN_DB, fs);
    Ok(ComplexWaveform::new(filter_same(&x, &h), fs, 0.0)?.with_band(Band::centered(bandwidth)))
}

/// Complex shift by `-f_c` (relative to the array's DC) and lowpass.
pub fn downconvert(w: &ComplexWaveform, f_c: f64, bandwidth: f64) -> Result<ComplexWaveform> {
    let fs = w.sample_rate();
    if f_c.abs() + bandwidth / 2.0 > fs / 2.0 {
        return Err(Error::range(format!(
            "band {f_c} +/- {} Hz outside +/-{} Hz",
            bandwidth / 2.0,
            fs / 2.0
        )));
    }
    let mut x = w.samples().to_vec();
    frequency_shift(&mut x, -f_c, fs);
    let h = lowpass_for(bandwidth, DOWNCONVERT_TRANSITION, DOWNCONVERT_ATTEN_DB, fs);
    Ok(ComplexWaveform::new(filter_same(&x, &h), fs, w.center_offset() + f_c)?
        .with_band(Band::centered(bandwidth)))
}

/// Isolate `[center - bw/2, center + bw/2]` (absolute, in the waveform's
/// reference frame) and move it to DC.
pub fn bandpass_extract(w: &ComplexWaveform, center: f64, bandwidth: f64) -> Result<ComplexWaveform> {
    bandpass_extract_with(w, center, bandwidth, EXTRACT_TRANSITION)
}

/// As [`bandpass_extract`] with an explicit transition fraction. The
/// stopband begins at `bandwidth / 2` from `center`.
pub fn bandpass_extract_with(
    w: &ComplexWaveform,
    center: f64,
    bandwidth: f64,
    transition_fraction: f64,
) -> Result<ComplexWaveform> {
    let fs = w.sample_rate();
    let rel = center - w.center_offset();
    if rel.abs() + bandwidth / 2.0 > fs / 2.0 {
        return Err(Error::range(format!(
            "channel at {rel} Hz +/- {} Hz outside +/-{} Hz",
            bandwidth / 2.0,
            fs / 2.0
        )));
    }
    let mut x = w.samples().to_vec();
    frequency_shift(&mut x, -rel, fs);
    let h = lowpass_for(bandwidth, transition_fraction, EXTRACT_ATTEN_DB, fs);
    Ok(ComplexWaveform::new(filter_same(&x, &h), fs, center)?.with_band(Band::centered(bandwidth)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::fft::power_spectrum;
    use crate::dsp::prbs::{prbs_generate, PrbsSpec};
    use crate::dsp::qam::{qam_map, ModFormat};
    use crate::dsp::rrc::{pulse_shape, RrcSpec};

    const BAUD: f64 = 1.072e9;
    const FC: f64 = 0.635e9;

    fn shaped(n_symbols: usize) -> ComplexWaveform {
        let bits = prbs_generate(&PrbsSpec::default(), 2 * n_symbols).unwrap();
        let syms = qam_map(&bits, ModFormat::Qam4, BAUD).unwrap();
        pulse_shape(&syms, &RrcSpec::default()).unwrap()
    }

    fn tone_power(x: &[Complex64], rate: f64, f: f64) -> f64 {
        let (freqs, p) = power_spectrum(x, rate);
        freqs.iter().zip(&p).filter(|(fr, _)| (**fr - f).abs() < rate / x.len() as f64 * 1.5).map(|(_, p)| p).sum()
    }

    #[test]
    fn constant_upconverts_to_cosine() {
        let a = ComplexWaveform::new(vec![Complex64::new(1.0, 0.0); 64], 4.288e9, 0.0)
            .unwrap()
            .with_band(Band::centered(1e6));
        let s = upconvert_real(&a, FC).unwrap();
        for (n, v) in s.samples().iter().enumerate() {
            let want = (2.0 * PI * FC * n as f64 / 4.288e9).cos();
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_carrier_band_edges() {
        let s = upconvert_real(&shaped(256), FC).unwrap();
        let b = s.band().unwrap();
        assert!((b.lo - 0.09364e9).abs() < 1e5, "{}", b.lo);
        assert!((b.hi - 1.17636e9).abs() < 1e5, "{}", b.hi);
    }

    #[test]
    fn low_carrier_overlaps_dc() {
        let err = upconvert_real(&shaped(256), 0.4e9).unwrap_err();
        assert!(matches!(err, Error::SpectralOverlap(_)));
    }

    #[test]
    fn up_down_roundtrip_preserves_constellation() {
        let a = shaped(4096);
        let s = upconvert_real(&a, FC).unwrap();
        let b = downconvert_real(&s, FC, 1.4e9).unwrap();
        let core = 600..a.len() - 600;
        let err: f64 = core.clone().map(|n| (a.samples()[n] - b.samples()[n]).norm_sqr()).sum();
        let sig: f64 = core.map(|n| a.samples()[n].norm_sqr()).sum();
        let evm = (err / sig).sqrt();
        assert!(evm < 0.01, "EVM {evm}");
    }

    #[test]
    fn cosine_downconverts_to_constant() {
        let fs = 4.288e9;
        let s = RealWaveform::new((0..8000).map(|n| (2.0 * PI * FC * n as f64 / fs).cos()).collect(), fs).unwrap();
        let b = downconvert_real(&s, FC, 1.4e9).unwrap();
        for z in &b.samples()[1000..7000] {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-3);
        }
    }

    #[test]
    fn downconvert_rejects_distant_tone() {
        let fs = 20e9;
        let bw = 1.0e9;
        let n = 20000;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * PI * 2e9 * t).cos() + (2.0 * PI * (2e9 + 2.0 * bw) * t).cos()
            })
            .collect();
        let b = downconvert_real(&RealWaveform::new(x, fs).unwrap(), 2e9, bw).unwrap();
        let core = &b.samples()[2000..18000];
        let wanted = tone_power(core, fs, 0.0);
        let other = tone_power(core, fs, 2.0 * bw);
        assert!(10.0 * (other / wanted).log10() < -60.0);
    }

    #[test]
    fn extraction_keeps_lone_tone() {
        let fs = 10e9;
        let x: Vec<Complex64> = (0..10000).map(|n| Complex64::from_polar(1.0, 2.0 * PI * 2.5e9 * n as f64 / fs)).collect();
        let w = ComplexWaveform::new(x, fs, 0.0).unwrap();
        let y = bandpass_extract(&w, 2.5e9, 2.5e9).unwrap();
        assert_eq!(y.center_offset(), 2.5e9);
        let p = y.samples()[2000..8000].iter().map(|z| z.norm_sqr()).sum::<f64>() / 6000.0;
        assert!((10.0 * p.log10()).abs() < 0.2);
    }

    #[test]
    fn extraction_isolates_grid_neighbour() {
        let fs = 10e9;
        let n = 20000;
        let x: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                Complex64::from_polar(1.0, 2.0 * PI * 1e9 * t) + Complex64::from_polar(1.0, 2.0 * PI * 3.5e9 * t)
            })
            .collect();
        let w = ComplexWaveform::new(x, fs, 0.0).unwrap();
        let y = bandpass_extract(&w, 1e9, 2.4e9).unwrap();
        let core = &y.samples()[3000..17000];
        let kept = tone_power(core, fs, 0.0);
        let leak = tone_power(core, fs, 2.5e9);
        assert!(10.0 * (leak / kept).log10() < -40.0);
    }

    #[test]
    fn guard_band_on_the_grid() {
        let occupied = 2.0 * (FC + RrcSpec::default().occupied_bandwidth(BAUD) / 2.0);
        // 2.5 - 2 (0.635 + 1.08272 / 2) = 0.14728 GHz
        assert!((2.5e9 - occupied - 0.14728e9).abs() < 1e3);
    }

    #[test]
    fn out_of_nyquist_band_rejected() {
        let w = ComplexWaveform::new(vec![Complex64::default(); 100], 5e9, 0.0).unwrap();
        assert!(matches!(bandpass_extract(&w, 2.4e9, 1e9), Err(Error::Range(_))));
        let r = RealWaveform::new(vec![0.0; 100], 5e9).unwrap();
        assert!(matches!(downconvert_real(&r, 2.4e9, 1e9), Err(Error::Range(_))));
    }
}
