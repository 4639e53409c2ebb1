use num_complex::Complex64;

use crate::dsp::fft::{fast_len, fft_in_place, ifft_in_place};
use crate::dsp::BitStream;
use crate::error::{Error, Result};
use crate::metrics::BerResult;

pub const MIN_BER_BITS: usize = 1000;
/// Lowest normalised correlation accepted as an alignment.
pub const MIN_ALIGNMENT: f64 = 0.5;

/// Align `rx` inside `truth` by maximum correlation of the +/-1 sequences,
/// then count errors over the overlap. `power_at_preamp` is left as NaN
/// for the caller to fill.
pub fn ber_count(rx: &BitStream, truth: &BitStream) -> Result<BerResult> {
    if rx.len() < MIN_BER_BITS {
        return Err(Error::Length(format!("BER needs at least {MIN_BER_BITS} bits, got {}", rx.len())));
    }
    if truth.is_empty() {
        return Err(Error::Length("empty reference".into()));
    }
    let pm = |b: &u8| Complex64::new(if *b == 1 { -1.0 } else { 1.0 }, 0.0);
    let n = fast_len(rx.len() + truth.len());
    let mut a = vec![Complex64::default(); n];
    let mut b = vec![Complex64::default(); n];
    truth.bits().iter().zip(a.iter_mut()).for_each(|(x, z)| *z = pm(x));
    rx.bits().iter().zip(b.iter_mut()).for_each(|(x, z)| *z = pm(x));
    fft_in_place(&mut a);
    fft_in_place(&mut b);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y.conj());
    ifft_in_place(&mut a);
    // c[s] = sum_k truth[k + s] rx[k], s >= 0 places rx at offset s in truth
    let mut best = (0usize, f64::MIN);
    for s in 0..truth.len() {
        let v = a[s].re;
        if v > best.1 + 1e-6 {
            best = (s, v);
        }
    }
    let overlap = rx.len().min(truth.len() - best.0);
    let corr = best.1 / overlap as f64;
    if overlap < MIN_BER_BITS || corr < MIN_ALIGNMENT {
        return Err(Error::Alignment(corr));
    }
    let errors = rx.bits()[..overlap]
        .iter()
        .zip(&truth.bits()[best.0..best.0 + overlap])
        .filter(|(x, y)| x != y)
        .count();
    BerResult::new(errors as u64, overlap as u64, f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{prbs_generate, PrbsSpec};

    fn truth() -> BitStream {
        prbs_generate(&PrbsSpec::default(), 20000).unwrap()
    }

    #[test]
    fn identical() {
        let t = truth();
        let r = ber_count(&t, &t).unwrap();
        assert_eq!((r.errors, r.bits), (0, 20000));
    }

    #[test]
    fn every_hundredth_flipped() {
        let t = truth();
        let rx = BitStream::new(t.bits().iter().enumerate().map(|(i, b)| if i % 100 == 99 { b ^ 1 } else { *b }).collect()).unwrap();
        let r = ber_count(&rx, &t).unwrap();
        assert_eq!(r.ber, 0.01);
    }

    #[test]
    fn delayed_stream_aligns() {
        let t = truth();
        let rx = BitStream::new(t.bits()[137..137 + 10000].to_vec()).unwrap();
        let r = ber_count(&rx, &t).unwrap();
        assert_eq!(r.errors, 0);
        assert_eq!(r.bits, 10000);
    }

    #[test]
    fn unrelated_stream_fails() {
        let t = truth();
        let other = prbs_generate(&PrbsSpec::standard(15).unwrap(), 5000).unwrap();
        assert!(matches!(ber_count(&other, &t), Err(Error::Alignment(_))));
    }

    #[test]
    fn too_short() {
        let t = truth();
        let rx = BitStream::new(t.bits()[..999].to_vec()).unwrap();
        assert!(matches!(ber_count(&rx, &t), Err(Error::Length(_))));
    }
}
