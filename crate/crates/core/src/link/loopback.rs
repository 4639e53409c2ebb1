use rand_distr::{Distribution, Normal};

use super::ber::ber_count;
use super::demod::{demodulate_scm, DemodDiagnostics};
use super::onu::ScmQamConfig;
use crate::dsp::RealWaveform;
use crate::error::Result;
use crate::metrics::BerResult;
use crate::seed;

/// Electrical back-to-back: the SCM drive at the DAC rate plus white
/// Gaussian noise set for `esn0_db`, through the receiver DSP. With
/// `P = mean(s^2)` and `sigma^2` the noise variance,
/// `Es/N0 = P (fs / baud) / (2 sigma^2)`.
pub fn awgn_loopback(tx: &ScmQamConfig, n_symbols: usize, esn0_db: f64, rng_seed: u64) -> Result<(BerResult, DemodDiagnostics)> {
    let (s, truth) = tx.drive(n_symbols, tx.dac_rate)?;
    let fs = s.sample_rate();
    let p = s.mean_square();
    let esn0 = 10f64.powf(esn0_db / 10.0);
    let sigma = (p * fs / tx.baud / (2.0 * esn0)).sqrt();
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut rng = seed::rng(rng_seed);
    let noisy: Vec<f64> = s.samples().iter().map(|v| v + normal.sample(&mut rng)).collect();
    let noisy = RealWaveform::new(noisy, fs)?;
    let (rx, diag) = demodulate_scm(&noisy, tx, &truth)?;
    Ok((ber_count(&rx, &truth)?, diag))
}
