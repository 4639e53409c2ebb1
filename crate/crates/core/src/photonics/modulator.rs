use serde::{Deserialize, Serialize};

use super::field::OpticalField;
use crate::dsp::RealWaveform;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulatorKind {
    Eam,
    Mzm,
}

/// Intensity modulator with an ideal linear power transfer
/// `P_out = L * P_in * max(floor, 1 + m s)`. The modulation index `m` is
/// solved so that the output CSPR hits `target_cspr_db`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatorSpec {
    pub kind: ModulatorKind,
    pub insertion_loss_db: f64,
    pub target_cspr_db: f64,
    /// Lowest relative transmission; finite extinction.
    #[serde(default = "default_floor")]
    pub extinction_floor: f64,
}

fn default_floor() -> f64 {
    1e-3
}

impl ModulatorSpec {
    pub fn eam(insertion_loss_db: f64, target_cspr_db: f64) -> Self {
        ModulatorSpec { kind: ModulatorKind::Eam, insertion_loss_db, target_cspr_db, extinction_floor: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct Modulated {
    pub field: OpticalField,
    pub modulation_index: f64,
    pub cspr_db: f64,
    /// Samples that hit the extinction floor.
    pub clipped: usize,
}

/// Carrier-to-signal power ratio of `sqrt(max(floor, 1 + m s))`.
pub fn cspr_db(drive: &[f64], m: f64, floor: f64) -> f64 {
    let n = drive.len() as f64;
    let (mut amp, mut pow) = (0.0, 0.0);
    for &s in drive {
        let t = (1.0 + m * s).max(floor);
        amp += t.sqrt();
        pow += t;
    }
    let carrier = (amp / n).powi(2);
    let signal = (pow / n - carrier).max(0.0);
    if signal == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (carrier / signal).log10()
}

/// Modulation index giving the requested CSPR. Clamped at the largest index
/// tried when the target is unreachable.
pub fn solve_index(drive: &[f64], target_db: f64, floor: f64) -> f64 {
    if drive.iter().all(|&s| s == 0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while cspr_db(drive, hi, floor) > target_db && hi < 1e3 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cspr_db(drive, mid, floor) > target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn intensity_modulate(cw: &OpticalField, drive: &RealWaveform, spec: &ModulatorSpec) -> Result<Modulated> {
    if (drive.sample_rate() - cw.sample_rate).abs() > 1e-6 * cw.sample_rate {
        return Err(Error::config(format!(
            "drive at {} S/s does not match the optical grid at {} S/s",
            drive.sample_rate(),
            cw.sample_rate
        )));
    }
    if drive.len() != cw.len() {
        return Err(Error::Length(format!("drive has {} samples, carrier {}", drive.len(), cw.len())));
    }
    if !(spec.extinction_floor > 0.0 && spec.extinction_floor < 1.0) || !(spec.insertion_loss_db >= 0.0) {
        return Err(Error::invalid("extinction floor must be in (0, 1) and insertion loss >= 0"));
    }
    let rms = drive.rms();
    let s: Vec<f64> = if rms > 0.0 { drive.samples().iter().map(|x| x / rms).collect() } else { drive.samples().to_vec() };
    let m = solve_index(&s, spec.target_cspr_db, spec.extinction_floor);
    let loss = 10f64.powf(-spec.insertion_loss_db / 10.0);
    let mut clipped = 0;
    let env = cw
        .envelope
        .iter()
        .zip(&s)
        .map(|(e, &x)| {
            let t = 1.0 + m * x;
            if t < spec.extinction_floor {
                clipped += 1;
            }
            e * (loss * t.max(spec.extinction_floor)).sqrt()
        })
        .collect();
    Ok(Modulated {
        field: OpticalField::new(env, cw.sample_rate, cw.ref_offset)?,
        modulation_index: m,
        cspr_db: cspr_db(&s, m, spec.extinction_floor),
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn cw(n: usize) -> OpticalField {
        OpticalField::new(vec![Complex64::new(0.1, 0.0); n], 1e9, 0.0).unwrap()
    }

    fn gaussian(n: usize) -> RealWaveform {
        let mut rng = crate::seed::rng(5);
        RealWaveform::new((0..n).map(|_| rng.sample(StandardNormal)).collect(), 1e9).unwrap()
    }

    #[test]
    fn hits_target_cspr() {
        let d = gaussian(20000);
        for target in [8.0, 14.0, 20.0] {
            let out = intensity_modulate(&cw(20000), &d, &ModulatorSpec::eam(7.8, target)).unwrap();
            // measure on the optical field: carrier = |mean e|^2
            let e = &out.field.envelope;
            let mean: Complex64 = e.iter().sum::<Complex64>() / e.len() as f64;
            let total = out.field.mean_power();
            let measured = 10.0 * (mean.norm_sqr() / (total - mean.norm_sqr())).log10();
            assert!((measured - target).abs() < 0.01, "{target}: {measured}");
        }
    }

    #[test]
    fn small_index_is_cspr_oracle() {
        // sqrt(1 + m s) ~ 1 + m s / 2 gives CSPR ~ 4 / m^2 for unit-RMS s
        let d = gaussian(50000);
        let m = solve_index(d.samples(), 30.0, 1e-3);
        let approx = 10.0 * (4.0 / (m * m)).log10();
        assert!((approx - 30.0).abs() < 0.05);
    }

    #[test]
    fn zero_drive_is_the_carrier_attenuated() {
        let z = RealWaveform::new(vec![0.0; 100], 1e9).unwrap();
        let out = intensity_modulate(&cw(100), &z, &ModulatorSpec::eam(10.0, 14.0)).unwrap();
        assert_eq!(out.modulation_index, 0.0);
        assert!((out.field.mean_power() / 1e-3 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_mismatched_grids() {
        let d = RealWaveform::new(vec![0.0; 100], 2e9).unwrap();
        assert!(matches!(intensity_modulate(&cw(100), &d, &ModulatorSpec::eam(1.0, 14.0)), Err(Error::Config(_))));
        let d = RealWaveform::new(vec![0.0; 99], 1e9).unwrap();
        assert!(matches!(intensity_modulate(&cw(100), &d, &ModulatorSpec::eam(1.0, 14.0)), Err(Error::Length(_))));
    }

    #[test]
    fn heavy_drive_clips() {
        let d = gaussian(4000);
        let out = intensity_modulate(&cw(4000), &d, &ModulatorSpec::eam(0.0, 3.0)).unwrap();
        assert!(out.clipped > 0);
    }
}
