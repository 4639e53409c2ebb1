use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::onu::ScmQamConfig;
use super::scenario::UpstreamCapture;
use crate::dsp::fft::{fast_len, fft_in_place, ifft_in_place};
use crate::dsp::fir::fractional_delay;
use crate::dsp::qam::decide;
use crate::dsp::{
    bandpass_extract, downconvert_real, matched_filter, qam_demap, qam_map, resample_complex, BitStream, ComplexWaveform,
    RealWaveform, SymbolStream,
};
use crate::error::{Error, Result};
use crate::metrics::{channel_freq, GRID_SPACING};

/// Symbols dropped at each end of a record to stay clear of filter
/// transients.
pub const EDGE_SYMBOLS: usize = 256;
/// Symbols used to resolve the quarter-turn phase ambiguity.
pub const HEADER_SYMBOLS: usize = 256;
/// Lowest normalised timing correlation accepted.
pub const MIN_SYNC_CORRELATION: f64 = 0.3;
/// Bandwidth of the lowpass that follows the subcarrier downconversion.
pub const SUBCARRIER_LOWPASS: f64 = 1.3e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemodDiagnostics {
    /// Record-to-reference offset in symbols.
    pub lag_symbols: i64,
    /// Fractional sampling offset in samples at the shaping rate.
    pub timing_offset: f64,
    pub correlation: f64,
    /// Residual carrier phase removed, radians.
    pub phase: f64,
    /// Quarter turns applied after the fourth-power estimate.
    pub quarter_turns: u8,
    /// Index in the reference of the first returned symbol.
    pub first_symbol: usize,
    pub n_symbols: usize,
    /// RMS error vector relative to the unit-energy constellation.
    pub evm_rms: f64,
}

/// `c[lag + r.len() - 1] = sum_k y[k + lag] conj(r[k])`.
fn xcorr(y: &[Complex64], r: &[Complex64]) -> Vec<Complex64> {
    let n = fast_len(y.len() + r.len());
    let mut a = vec![Complex64::default(); n];
    let mut b = vec![Complex64::default(); n];
    a[..y.len()].copy_from_slice(y);
    b[..r.len()].copy_from_slice(r);
    fft_in_place(&mut a);
    fft_in_place(&mut b);
    a.iter_mut().zip(&b).for_each(|(x, z)| *x *= z.conj());
    ifft_in_place(&mut a);
    // lags -(r.len()-1)..=y.len()-1
    let mut out = Vec::with_capacity(y.len() + r.len() - 1);
    for lag in -(r.len() as isize - 1)..y.len() as isize {
        out.push(a[lag.rem_euclid(n as isize) as usize]);
    }
    out
}

fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Data-aided recovery of the symbols carried by a complex SCM baseband
/// (subcarrier already at DC), compared against the transmitted `truth`.
pub fn recover_symbols(
    baseband: &ComplexWaveform,
    tx: &ScmQamConfig,
    truth: &BitStream,
) -> Result<(Vec<Complex64>, DemodDiagnostics)> {
    let sps = tx.samples_per_symbol;
    let reference = qam_map(truth, tx.format, tx.baud)?;
    let n_ref = reference.len();
    if n_ref < 2 * EDGE_SYMBOLS + HEADER_SYMBOLS {
        return Err(Error::Length(format!("{n_ref} symbols is too short to demodulate")));
    }
    let at_rate = resample_complex(baseband, tx.shaping_rate())?;
    let mf = matched_filter(&at_rate, &tx.rrc())?;
    let x = mf.samples();

    // coarse timing: best sampling phase and symbol lag
    let ref_energy = energy(&reference.symbols);
    let mut per_phase = Vec::with_capacity(sps);
    for p in 0..sps {
        let y: Vec<Complex64> = x.iter().skip(p).step_by(sps).copied().collect();
        let c = xcorr(&y, &reference.symbols);
        let norm = (energy(&y) * ref_energy).sqrt();
        per_phase.push((c, norm));
    }
    let (mut best_p, mut best_i, mut best_v) = (0usize, 0usize, -1.0);
    for (p, (c, norm)) in per_phase.iter().enumerate() {
        for (i, z) in c.iter().enumerate() {
            let v = z.norm() / norm.max(f64::MIN_POSITIVE);
            if v > best_v {
                best_v = v;
                best_p = p;
                best_i = i;
            }
        }
    }
    if best_v < MIN_SYNC_CORRELATION {
        return Err(Error::SyncFailure(best_v));
    }
    let lag = best_i as i64 - (n_ref as i64 - 1);
    // fractional refinement over neighbouring sampling phases
    let mag = |p: isize| -> f64 {
        let (pp, shift) = (p.rem_euclid(sps as isize) as usize, p.div_euclid(sps as isize));
        let i = best_i as isize + shift;
        let (c, norm) = &per_phase[pp];
        if i < 0 || i as usize >= c.len() {
            return 0.0;
        }
        c[i as usize].norm() / norm
    };
    let (a, b, cc) = (mag(best_p as isize - 1), best_v, mag(best_p as isize + 1));
    let den = a - 2.0 * b + cc;
    let frac = if den < 0.0 { (0.5 * (a - cc) / den).clamp(-0.5, 0.5) } else { 0.0 };
    let offset = best_p as f64 + frac;
    let aligned = fractional_delay(x, -offset);

    // symbol k of the record pairs with reference symbol k - lag
    let first = EDGE_SYMBOLS;
    let last = n_ref - EDGE_SYMBOLS;
    let mut sym = Vec::with_capacity(last - first);
    let mut kept_first = None;
    for j in first..last {
        let k = j as i64 + lag;
        let idx = k * sps as i64;
        if idx < 0 || idx as usize >= aligned.len() {
            continue;
        }
        kept_first.get_or_insert(j);
        sym.push(aligned[idx as usize]);
    }
    let first_symbol = kept_first.ok_or_else(|| Error::SyncFailure(best_v))?;
    if sym.len() < HEADER_SYMBOLS {
        return Err(Error::SyncFailure(best_v));
    }

    // gain and fourth-power phase estimate
    let rms = (energy(&sym) / sym.len() as f64).sqrt();
    let s4: Complex64 = sym.iter().map(|z| z.powi(4)).sum();
    let phase = (s4.arg() - PI) / 4.0;
    let derot = Complex64::from_polar(1.0 / rms.max(f64::MIN_POSITIVE), -phase);
    sym.iter_mut().for_each(|z| *z *= derot);

    let header = &reference.symbols[first_symbol..first_symbol + HEADER_SYMBOLS];
    let mut best_turn = (0u8, usize::MAX);
    for q in 0..4u8 {
        let rot = Complex64::new(0.0, 1.0).powi(q as i32);
        let errs = sym[..HEADER_SYMBOLS]
            .iter()
            .zip(header)
            .map(|(s, h)| {
                let a = decide(s * rot, tx.format);
                let b = decide(*h, tx.format);
                (a ^ b).count_ones() as usize
            })
            .sum::<usize>();
        if errs < best_turn.1 {
            best_turn = (q, errs);
        }
    }
    let rot = Complex64::new(0.0, 1.0).powi(best_turn.0 as i32);
    sym.iter_mut().for_each(|z| *z *= rot);
    let evm = (sym
        .iter()
        .zip(&reference.symbols[first_symbol..])
        .map(|(s, r)| (s - r).norm_sqr())
        .sum::<f64>()
        / sym.len() as f64)
        .sqrt();

    let n_symbols = sym.len();
    Ok((
        sym,
        DemodDiagnostics {
            lag_symbols: lag,
            timing_offset: offset,
            correlation: best_v,
            phase: phase + best_turn.0 as f64 * PI / 2.0,
            quarter_turns: best_turn.0,
            first_symbol,
            n_symbols,
            evm_rms: evm,
        },
    ))
}

pub fn symbols_to_bits(sym: &[Complex64], tx: &ScmQamConfig) -> BitStream {
    qam_demap(&SymbolStream { symbols: sym.to_vec(), format: tx.format, baud: tx.baud })
}

/// Real SCM waveform (subcarrier at `tx.rf_carrier`) to bits.
pub fn demodulate_scm(signal: &RealWaveform, tx: &ScmQamConfig, truth: &BitStream) -> Result<(BitStream, DemodDiagnostics)> {
    let bb = downconvert_real(signal, tx.rf_carrier, SUBCARRIER_LOWPASS)?;
    let (sym, diag) = recover_symbols(&bb, tx, truth)?;
    Ok((symbols_to_bits(&sym, tx), diag))
}

/// Extract a channel from the coherent capture, recover its intensity
/// through `|field|^2`, and demodulate it.
pub fn channel_demodulate(cap: &UpstreamCapture, channel_id: i32, tx: &ScmQamConfig) -> Result<(BitStream, DemodDiagnostics)> {
    let f = channel_freq(channel_id)?;
    let truth = cap.per_onu_truth.get(&channel_id).ok_or(Error::InvalidChannel(channel_id))?;
    let ch = bandpass_extract(&cap.waveform, f, GRID_SPACING)?;
    let mut intensity = ch.magnitude_squared().into_samples();
    let mean = intensity.iter().sum::<f64>() / intensity.len().max(1) as f64;
    intensity.iter_mut().for_each(|v| *v -= mean);
    let intensity = RealWaveform::new(intensity, ch.sample_rate())?;
    demodulate_scm(&intensity, tx, truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::mix::upconvert_real;
    use crate::dsp::{prbs_generate, pulse_shape};

    #[test]
    fn xcorr_lags() {
        let r = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)];
        let mut y = vec![Complex64::default(); 7];
        y[3..6].copy_from_slice(&r);
        let c = xcorr(&y, &r);
        let i = c.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap().0;
        assert_eq!(i as i64 - 2, 3);
        assert!((c[i] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
    }

    fn scm(tx: &ScmQamConfig, n_sym: usize) -> (RealWaveform, BitStream) {
        let bits = prbs_generate(&tx.prbs, 2 * n_sym).unwrap();
        let sym = qam_map(&bits, tx.format, tx.baud).unwrap();
        let shaped = pulse_shape(&sym, &tx.rrc()).unwrap();
        (upconvert_real(&shaped, tx.rf_carrier).unwrap(), bits)
    }

    #[test]
    fn clean_loopback_recovers_every_bit() {
        let tx = ScmQamConfig::default();
        let (s, bits) = scm(&tx, 4096);
        let (rx, d) = demodulate_scm(&s, &tx, &bits).unwrap();
        let want = &bits.bits()[2 * d.first_symbol..2 * (d.first_symbol + d.n_symbols)];
        assert_eq!(rx.bits(), want);
        assert_eq!(d.lag_symbols, 0);
        assert!(d.evm_rms < 0.05, "{}", d.evm_rms);
    }

    #[test]
    fn delay_rotation_and_gain_are_undone() {
        let tx = ScmQamConfig::default();
        let (s, bits) = scm(&tx, 4096);
        // 5.3 samples of delay, sign flip and gain
        let z: Vec<Complex64> = s.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let delayed: Vec<f64> = fractional_delay(&z, 5.3).iter().map(|c| -0.01 * c.re).collect();
        let w = RealWaveform::new(delayed, s.sample_rate()).unwrap();
        let (rx, d) = demodulate_scm(&w, &tx, &bits).unwrap();
        let want = &bits.bits()[2 * d.first_symbol..2 * (d.first_symbol + d.n_symbols)];
        assert_eq!(rx.bits(), want);
        assert_eq!(d.lag_symbols, 1);
        assert!((d.timing_offset - 1.3).abs() < 0.2, "{}", d.timing_offset);
    }

    #[test]
    fn noise_only_fails_sync() {
        use rand::Rng;
        use rand_distr::StandardNormal;
        let tx = ScmQamConfig::default();
        let (s, bits) = scm(&tx, 2048);
        let mut rng = crate::seed::rng(8);
        let n = RealWaveform::new((0..s.len()).map(|_| rng.sample(StandardNormal)).collect(), s.sample_rate()).unwrap();
        assert!(matches!(demodulate_scm(&n, &tx, &bits), Err(Error::SyncFailure(_))));
    }
}
