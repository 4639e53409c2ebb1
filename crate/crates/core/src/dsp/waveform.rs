use num_complex::Complex64;

use crate::error::{Error, Result};

/// Occupied frequency band of a waveform, relative to the array's DC, in Hz.
///
/// For a real waveform only the positive half is described (`lo >= 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Band { lo, hi }
    }

    /// Band symmetric about DC with total width `width`.
    pub fn centered(width: f64) -> Self {
        Band::new(-width / 2.0, width / 2.0)
    }

    /// Largest absolute frequency in the band.
    pub fn edge(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn shifted(&self, by: f64) -> Self {
        Band::new(self.lo + by, self.hi + by)
    }
}

fn check_rate(sample_rate: f64) -> Result<()> {
    if sample_rate.is_finite() && sample_rate > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")))
    }
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct RealWaveform {
    samples: Vec<f64>,
    sample_rate: f64,
    band: Option<Band>,
}

impl RealWaveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(RealWaveform { samples, sample_rate, band: None })
    }

    /// Attach the occupied (positive-frequency) band.
    pub fn with_band(mut self, band: Band) -> Self {
        self.band = Some(band);
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn band(&self) -> Option<Band> {
        self.band
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        self.mean_square().sqrt()
    }

    /// Scale to unit RMS. A silent waveform is returned unchanged.
    pub fn normalized_rms(mut self) -> Self {
        let rms = self.rms();
        if rms > 0.0 {
            self.samples.iter_mut().for_each(|x| *x /= rms);
        }
        self
    }

    pub fn to_complex(&self) -> ComplexWaveform {
        ComplexWaveform {
            samples: self.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            sample_rate: self.sample_rate,
            center_offset: 0.0,
            band: self.band.map(|b| Band::new(-b.hi, b.hi)),
        }
    }
}

/// Uniformly sampled complex signal whose DC sits at `center_offset` Hz from a
/// declared reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWaveform {
    samples: Vec<Complex64>,
    sample_rate: f64,
    center_offset: f64,
    band: Option<Band>,
}

impl ComplexWaveform {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, center_offset: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if let Some(i) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(ComplexWaveform { samples, sample_rate, center_offset, band: None })
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = Some(band);
        self
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn center_offset(&self) -> f64 {
        self.center_offset
    }

    pub fn band(&self) -> Option<Band> {
        self.band
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Real part as a real waveform.
    pub fn real(&self) -> RealWaveform {
        RealWaveform {
            samples: self.samples.iter().map(|z| z.re).collect(),
            sample_rate: self.sample_rate,
            band: None,
        }
    }

    /// Instantaneous power `|x|^2` as a real waveform.
    pub fn magnitude_squared(&self) -> RealWaveform {
        RealWaveform {
            samples: self.samples.iter().map(|z| z.norm_sqr()).collect(),
            sample_rate: self.sample_rate,
            band: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rate_and_non_finite_samples() {
        assert!(RealWaveform::new(vec![1.0], 0.0).is_err());
        assert!(RealWaveform::new(vec![f64::NAN], 1.0).is_err());
        let bad = vec![Complex64::new(0.0, f64::INFINITY)];
        assert!(ComplexWaveform::new(bad, 1.0, 0.0).is_err());
    }

    #[test]
    fn rms_normalisation() {
        let w = RealWaveform::new(vec![3.0, -3.0, 3.0, -3.0], 1.0).unwrap().normalized_rms();
        assert!((w.rms() - 1.0).abs() < 1e-15);
    }
}
