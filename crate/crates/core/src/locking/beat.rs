use num_complex::Complex64;

use crate::dsp::fft::{fft_in_place, hann};
use crate::dsp::RealWaveform;
use crate::error::{Error, Result};

/// Minimum peak-to-median ratio for a beat to count as present.
pub const MIN_BEAT_SNR_DB: f64 = 6.0;

/// Dominant beat frequency over `(0, fs/2)`.
pub fn measure_beat(photocurrent: &RealWaveform, window: usize) -> Result<f64> {
    measure_beat_in(photocurrent, window, 0.0, photocurrent.sample_rate() / 2.0)
}

/// Dominant beat frequency within `(f_lo, f_hi]`. The periodogram is
/// averaged over 50 % overlapping Hann windows, so noise rejection improves
/// with records longer than one window.
pub fn measure_beat_in(photocurrent: &RealWaveform, window: usize, f_lo: f64, f_hi: f64) -> Result<f64> {
    if window < 256 {
        return Err(Error::invalid("beat window must be at least 256 samples"));
    }
    let x = photocurrent.samples();
    if x.len() < window {
        return Err(Error::Length(format!("photocurrent has {} samples, window {window}", x.len())));
    }
    let fs = photocurrent.sample_rate();
    let win = hann(window);
    let mut acc = vec![0.0; window / 2];
    let mut buf = vec![Complex64::default(); window];
    let mut start = 0;
    while start + window <= x.len() {
        let seg = &x[start..start + window];
        let mean = seg.iter().sum::<f64>() / window as f64;
        for i in 0..window {
            buf[i] = Complex64::new((seg[i] - mean) * win[i], 0.0);
        }
        fft_in_place(&mut buf);
        for (a, z) in acc.iter_mut().zip(&buf) {
            *a += z.norm_sqr();
        }
        start += window / 2;
    }
    let df = fs / window as f64;
    let k_lo = ((f_lo / df).floor() as usize + 1).max(1);
    let k_hi = ((f_hi / df).floor() as usize).min(window / 2 - 1);
    if k_lo + 2 > k_hi {
        return Err(Error::invalid("beat search band is narrower than three bins"));
    }
    let band = &acc[k_lo..=k_hi];
    let (rel, &peak) = band.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty band");
    let mut sorted = band.to_vec();
    sorted.sort_by(f64::total_cmp);
    // numerical floor so that roundoff alone never reads as a beat
    let total: f64 = acc[1..].iter().sum();
    let median = sorted[sorted.len() / 2].max(total * 1e-12);
    let snr_db = if median > 0.0 { 10.0 * (peak / median).log10() } else if peak > 0.0 { f64::INFINITY } else { 0.0 };
    if snr_db < MIN_BEAT_SNR_DB {
        return Err(Error::NoBeat { snr_db });
    }
    let k = k_lo + rel;
    // parabola through log powers of the peak and its neighbours
    let delta = if k >= 1 && k + 1 < acc.len() {
        let (a, b, c) = (acc[k - 1].max(1e-300).ln(), acc[k].ln(), acc[k + 1].max(1e-300).ln());
        let den = a - 2.0 * b + c;
        if den < 0.0 {
            (0.5 * (a - c) / den).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok((k as f64 + delta) * df)
}
