//! Linear-phase FIR design and application.
//!
//! All filters are odd-length and symmetric, so the group delay is exactly
//! `(len - 1) / 2` samples; the `*_same` helpers remove it.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{fast_len, fft_in_place, ifft_in_place};

/// Zeroth-order modified Bessel function of the first kind.
pub fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db > 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

pub fn kaiser(n: usize, beta: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let r = 2.0 * i as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Odd tap count meeting `atten_db` over a transition of `transition` cycles/sample.
pub fn kaiser_len(atten_db: f64, transition: f64) -> usize {
    let n = ((atten_db - 7.95) / (2.285 * 2.0 * PI * transition)).ceil() as usize + 1;
    n | 1
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Kaiser-windowed lowpass with unit DC gain.
///
/// `cutoff` is the -6 dB point and `transition` the full transition width,
/// both in cycles/sample.
pub fn lowpass(cutoff: f64, transition: f64, atten_db: f64) -> Vec<f64> {
    let n = kaiser_len(atten_db, transition);
    let win = kaiser(n, kaiser_beta(atten_db));
    let mid = (n - 1) as f64 / 2.0;
    let mut h: Vec<f64> = (0..n)
        .map(|i| 2.0 * cutoff * sinc(2.0 * cutoff * (i as f64 - mid)) * win[i])
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}

/// Full linear convolution of a complex signal with real taps.
pub fn convolve(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    if h.len() <= 48 || x.len() <= 48 {
        let mut y = vec![Complex64::default(); out_len];
        for (i, &xi) in x.iter().enumerate() {
            for (k, &hk) in h.iter().enumerate() {
                y[i + k] += xi * hk;
            }
        }
        return y;
    }
    let n = fast_len(out_len);
    let mut xf = vec![Complex64::default(); n];
    xf[..x.len()].copy_from_slice(x);
    let mut hf = vec![Complex64::default(); n];
    for (d, &s) in hf.iter_mut().zip(h) {
        *d = Complex64::new(s, 0.0);
    }
    fft_in_place(&mut xf);
    fft_in_place(&mut hf);
    xf.iter_mut().zip(&hf).for_each(|(a, b)| *a *= b);
    ifft_in_place(&mut xf);
    xf.truncate(out_len);
    xf
}

/// Filter and drop the group delay of a symmetric odd-length FIR, so output
/// sample `n` aligns with input sample `n`.
pub fn filter_same(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    debug_assert!(h.len() % 2 == 1);
    let delay = (h.len() - 1) / 2;
    let full = convolve(x, h);
    full[delay..delay + x.len()].to_vec()
}

pub fn filter_same_real(x: &[f64], h: &[f64]) -> Vec<f64> {
    let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    filter_same(&z, h).into_iter().map(|c| c.re).collect()
}

/// Delay by a (possibly fractional) number of samples with an ideal
/// band-limited phase ramp. Zero padding keeps wrap-around out of the record.
pub fn fractional_delay(x: &[Complex64], delay: f64) -> Vec<Complex64> {
    if x.is_empty() {
        return Vec::new();
    }
    let pad = delay.abs().ceil() as usize + 256;
    let n = fast_len(x.len() + 2 * pad);
    let mut buf = vec![Complex64::default(); n];
    buf[pad..pad + x.len()].copy_from_slice(x);
    fft_in_place(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        let f = super::fft::bin_freq(k, n, 1.0);
        *z *= Complex64::from_polar(1.0, -2.0 * PI * f * delay);
    }
    ifft_in_place(&mut buf);
    buf[pad..pad + x.len()].to_vec()
}

/// Magnitude response of real taps at `f` cycles/sample.
pub fn response(h: &[f64], f: f64) -> f64 {
    h.iter()
        .enumerate()
        .map(|(k, &v)| Complex64::from_polar(v, -2.0 * PI * f * k as f64))
        .sum::<Complex64>()
        .norm()
}
