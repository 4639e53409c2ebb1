//! FFT helpers and spectral estimation.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn fft_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Inverse FFT including the `1/N` scale.
pub fn ifft_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
}

/// Smallest `2^a 3^b 5^c` not below `n`.
pub fn fast_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1usize;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut m = p35;
            while m < n {
                m *= 2;
            }
            best = best.min(m);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// Frequency of FFT bin `k` for an `n`-point transform at `rate`, in `[-rate/2, rate/2)`.
pub fn bin_freq(k: usize, n: usize, rate: f64) -> f64 {
    let k = k as isize;
    let n_i = n as isize;
    let signed = if k >= (n_i + 1) / 2 { k - n_i } else { k };
    signed as f64 * rate / n as f64
}

pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Two-sided Welch power spectral density of a complex signal.
///
/// Returns `(freqs, psd)` with frequencies in ascending order from `-rate/2`
/// and `psd` in units²/Hz such that `sum(psd) * rate / nfft` equals the mean
/// power.
pub fn welch_psd(x: &[Complex64], rate: f64, nfft: usize) -> (Vec<f64>, Vec<f64>) {
    let nfft = nfft.min(x.len()).max(1);
    let win = hann(nfft);
    let wpow: f64 = win.iter().map(|w| w * w).sum();
    let hop = (nfft / 2).max(1);
    let mut acc = vec![0.0; nfft];
    let mut segments = 0usize;
    let mut buf = vec![Complex64::default(); nfft];
    let mut start = 0;
    while start + nfft <= x.len() {
        for i in 0..nfft {
            buf[i] = x[start + i] * win[i];
        }
        fft_in_place(&mut buf);
        for (a, z) in acc.iter_mut().zip(&buf) {
            *a += z.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let norm = 1.0 / (segments.max(1) as f64 * wpow * rate);
    let half = nfft / 2;
    let mut freqs = Vec::with_capacity(nfft);
    let mut psd = Vec::with_capacity(nfft);
    for i in 0..nfft {
        let k = (i + nfft - half) % nfft;
        freqs.push(bin_freq(k, nfft, rate));
        psd.push(acc[k] * norm);
    }
    (freqs, psd)
}

/// Single-sided Welch PSD of a real signal, frequencies `0..=rate/2`.
pub fn welch_psd_real(x: &[f64], rate: f64, nfft: usize) -> (Vec<f64>, Vec<f64>) {
    let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let (f, p) = welch_psd(&z, rate, nfft);
    let n = f.len();
    let half = n / 2;
    let mut freqs = Vec::with_capacity(half + 1);
    let mut psd = Vec::with_capacity(half + 1);
    for i in half..n {
        let mirrored = if i == half { 0.0 } else { p[2 * half - i] };
        freqs.push(f[i]);
        psd.push(p[i] + mirrored);
    }
    (freqs, psd)
}

/// Spectrum of the whole record: `|X(f)|^2 / N^2` per bin, i.e. the power of a
/// bin-centred tone. Frequencies ascending from `-rate/2`.
pub fn power_spectrum(x: &[Complex64], rate: f64) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut buf = x.to_vec();
    fft_in_place(&mut buf);
    let half = n / 2;
    let scale = 1.0 / (n as f64 * n as f64);
    let mut freqs = Vec::with_capacity(n);
    let mut pow = Vec::with_capacity(n);
    for i in 0..n {
        let k = (i + n - half) % n;
        freqs.push(bin_freq(k, n, rate));
        pow.push(buf[k].norm_sqr() * scale);
    }
    (freqs, pow)
}
