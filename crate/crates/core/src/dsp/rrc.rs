//! Root-raised-cosine pulse shaping.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fir::filter_same;
use super::qam::SymbolStream;
use super::waveform::{Band, ComplexWaveform};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RrcSpec {
    pub rolloff: f64,
    pub span_symbols: usize,
    pub samples_per_symbol: f64,
}

impl Default for RrcSpec {
    fn default() -> Self {
        // Truncation ISI of a 0.01 roll-off pulse only drops below 1e-3 of the
        // main tap at about 256 symbols.
        RrcSpec { rolloff: 0.01, span_symbols: 256, samples_per_symbol: 4.0 }
    }
}

impl RrcSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(Error::invalid(format!("roll-off {} outside (0, 1]", self.rolloff)));
        }
        if self.span_symbols == 0 || !(self.samples_per_symbol > 0.0) {
            return Err(Error::invalid("span and samples per symbol must be positive"));
        }
        if self.rolloff <= 0.1 && self.span_symbols < 16 {
            return Err(Error::invalid(format!(
                "roll-off {} needs a span of at least 16 symbols, got {}",
                self.rolloff, self.span_symbols
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.span_symbols as f64 * self.samples_per_symbol).round() as usize) | 1
    }

    /// Two-sided occupied bandwidth `(1 + rolloff) * baud`.
    pub fn occupied_bandwidth(&self, baud: f64) -> f64 {
        (1.0 + self.rolloff) * baud
    }
}

/// RRC impulse response at `t` symbol periods, unnormalised.
pub fn rrc_impulse(t: f64, beta: f64) -> f64 {
    let eps = 1e-9;
    if t.abs() < eps {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let singular = 1.0 / (4.0 * beta);
    if (t.abs() - singular).abs() < eps {
        let a = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Symmetric RRC taps with unit energy, so a matched pair has unit gain at
/// the symbol instant.
pub fn rrc_taps(spec: &RrcSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.len();
    let mid = (n - 1) as f64 / 2.0;
    let mut h: Vec<f64> = (0..n)
        .map(|k| rrc_impulse((k as f64 - mid) / spec.samples_per_symbol, spec.rolloff))
        .collect();
    let energy = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    h.iter_mut().for_each(|v| *v /= energy);
    Ok(h)
}

fn integer_sps(spec: &RrcSpec) -> Result<usize> {
    let sps = spec.samples_per_symbol.round();
    if (sps - spec.samples_per_symbol).abs() > 1e-9 || sps < 1.0 {
        return Err(Error::invalid("pulse shaping needs an integer samples-per-symbol"));
    }
    Ok(sps as usize)
}

/// Upsample and shape: sample `k * sps` of the output carries symbol `k`.
pub fn pulse_shape(symbols: &SymbolStream, spec: &RrcSpec) -> Result<ComplexWaveform> {
    let sps = integer_sps(spec)?;
    let taps = rrc_taps(spec)?;
    let mut up = vec![Complex64::default(); symbols.len() * sps];
    for (k, &s) in symbols.symbols.iter().enumerate() {
        up[k * sps] = s;
    }
    let shaped = filter_same(&up, &taps);
    Ok(ComplexWaveform::new(shaped, symbols.baud * sps as f64, 0.0)?
        .with_band(Band::centered(spec.occupied_bandwidth(symbols.baud))))
}

/// Matched filter; output stays at the input rate and alignment.
pub fn matched_filter(w: &ComplexWaveform, spec: &RrcSpec) -> Result<ComplexWaveform> {
    let taps = rrc_taps(spec)?;
    let mut out = ComplexWaveform::new(filter_same(w.samples(), &taps), w.sample_rate(), w.center_offset())?;
    if let Some(b) = w.band() {
        out = out.with_band(b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct-form full convolution, independent of the FFT path.
    fn direct_autocorrelation(h: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; 2 * h.len() - 1];
        for (i, a) in h.iter().enumerate() {
            for (j, b) in h.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        c
    }

    fn symbol_spaced_isi(spec: &RrcSpec) -> (f64, f64) {
        let h = rrc_taps(spec).unwrap();
        let c = direct_autocorrelation(&h);
        let mid = c.len() / 2;
        let sps = spec.samples_per_symbol as usize;
        let worst = (1..=mid / sps)
            .flat_map(|k| [c[mid + k * sps], c[mid - k * sps]])
            .map(f64::abs)
            .fold(0.0, f64::max);
        (c[mid], worst)
    }

    #[test]
    fn taps_are_even_symmetric() {
        for spec in [
            RrcSpec::default(),
            RrcSpec { rolloff: 0.35, span_symbols: 8, samples_per_symbol: 3.7 },
        ] {
            let h = rrc_taps(&spec).unwrap();
            let n = h.len();
            for k in 0..n {
                assert_eq!(h[k], h[n - 1 - k]);
            }
        }
    }

    #[test]
    fn singular_points_use_analytic_limits() {
        // t = 1/(4 beta) lands exactly on a tap for beta = 0.25, sps = 4
        let beta = 0.25;
        let limit = rrc_impulse(1.0, beta);
        let near = rrc_impulse(1.0 + 1e-6, beta);
        assert!((limit - near).abs() < 1e-5);
        let centre = rrc_impulse(0.0, beta);
        assert!((centre - rrc_impulse(1e-7, beta)).abs() < 1e-9);
        assert!(rrc_taps(&RrcSpec { rolloff: beta, span_symbols: 8, samples_per_symbol: 4.0 })
            .unwrap()
            .iter()
            .all(|v| v.is_finite()));
    }

    #[test]
    fn matched_pair_is_nyquist_at_long_span() {
        let (centre, worst) = symbol_spaced_isi(&RrcSpec::default());
        assert!((centre - 1.0).abs() < 1e-12);
        assert!(worst < 1e-3, "worst ISI {worst}");
    }

    #[test]
    fn short_span_truncation_isi() {
        // Frozen from the direct convolution oracle: a 32-symbol span at
        // roll-off 0.01 leaves ~2.9e-2 residual ISI.
        let spec = RrcSpec { span_symbols: 32, ..RrcSpec::default() };
        let (_, worst) = symbol_spaced_isi(&spec);
        assert!((worst - 0.02927).abs() < 1e-4, "{worst}");
    }

    #[test]
    fn occupied_bandwidth_of_reference_signal() {
        let bw = RrcSpec::default().occupied_bandwidth(1.072e9);
        assert!((bw - 1.08272e9).abs() < 1.0);
    }

    #[test]
    fn short_span_for_narrow_rolloff_rejected() {
        let spec = RrcSpec { span_symbols: 8, ..RrcSpec::default() };
        assert!(rrc_taps(&spec).is_err());
    }
}
