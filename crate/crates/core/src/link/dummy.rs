use serde::{Deserialize, Serialize};

use super::onu::ScmQamConfig;
use crate::error::{Error, Result};
use crate::photonics::{comb_generate, intensity_modulate, CombSpec, LaserSpec, ModulatorKind, ModulatorSpec, OpticalField};
use crate::seed;

/// Comb-based filler channels. One modulator drives every surviving line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DummyBankSpec {
    /// Line power in the comb spec is the power per line at the combiner.
    #[serde(default)]
    pub comb: CombSpec,
    #[serde(default)]
    pub drive: ScmQamConfig,
    #[serde(default = "default_cspr")]
    pub cspr_db: f64,
}

fn default_cspr() -> f64 {
    14.0
}

impl DummyBankSpec {
    /// Check that every live channel falls inside the notch.
    pub fn check_live(&self, live: &[i32]) -> Result<()> {
        for &ch in live {
            if !self.comb.is_notched(ch) {
                return Err(Error::config(format!("live channel {ch} is not covered by the dummy-bank notch")));
            }
        }
        Ok(())
    }

    /// Grid positions that carry a dummy: comb lines outside the notch,
    /// excluding position 0 which coincides with the LO.
    pub fn populated(&self) -> Vec<i32> {
        self.comb.line_indices().filter(|&m| m != 0 && !self.comb.is_notched(m)).collect()
    }
}

/// Dummy-bank field at `frame` (relative to the global reference). Only
/// lines whose sidebands stay inside the simulated window are generated.
#[allow(clippy::too_many_arguments)]
pub fn dummy_bank_generate(
    spec: &DummyBankSpec,
    seed_laser: &LaserSpec,
    live: &[i32],
    n_symbols: usize,
    sim_rate: f64,
    frame: f64,
    rng_seed: u64,
) -> Result<OpticalField> {
    spec.check_live(live)?;
    let (drive, _) = spec.drive.drive(n_symbols, sim_rate)?;
    let n = drive.len();
    let seed_f = seed_laser.emission_offset();
    let margin = sim_rate / 2.0 - spec.comb.spacing / 2.0;
    let lines: Vec<i32> = spec
        .populated()
        .into_iter()
        .filter(|&m| (seed_f + spec.comb.line_offset(m) - frame).abs() <= margin)
        .collect();
    let mut out = OpticalField::dark(n, sim_rate, frame);
    for m in lines {
        // one line at a time keeps every line's ripple and phase while
        // skipping notched and LO positions
        let single = CombSpec { first_line: m, n_lines: 1, ..spec.comb.clone() };
        let f = comb_generate(seed_laser, &single, n, sim_rate, frame, seed::derive(rng_seed, "comb"))?;
        out.envelope.iter_mut().zip(&f.envelope).for_each(|(a, b)| *a += b);
    }
    if out.mean_power() == 0.0 {
        return Ok(out);
    }
    let modulator = ModulatorSpec {
        kind: ModulatorKind::Mzm,
        insertion_loss_db: 0.0,
        target_cspr_db: spec.cspr_db,
        extinction_floor: 1e-3,
    };
    Ok(intensity_modulate(&out, &drive, &modulator)?.field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn bank(notch_center: f64, width: f64) -> DummyBankSpec {
        let mut drive = ScmQamConfig::default();
        drive.prbs.seed = 777;
        DummyBankSpec {
            comb: CombSpec { notch_center, notch_width: width, per_line_power_dbm: -3.0, ..Default::default() },
            drive,
            cspr_db: 14.0,
        }
    }

    #[test]
    fn live_channel_outside_notch_is_rejected() {
        let b = bank(5e9, 30e9);
        assert!(b.check_live(&[1, 2, 3]).is_ok());
        assert!(matches!(b.check_live(&[9]), Err(Error::Config(_))));
    }

    #[test]
    fn thirty_ghz_notch_leaves_twelve_positions_empty() {
        let b = bank(-1.25e9, 30e9);
        let pop = b.populated();
        let empty: Vec<i32> = (-32..32).filter(|m| !pop.contains(m)).collect();
        assert_eq!(empty, (-6..=5).collect::<Vec<_>>());
    }

    #[test]
    fn nothing_in_window_is_a_dark_field() {
        let b = bank(5e9, 30e9);
        let f = dummy_bank_generate(&b, &LaserSpec::olt(), &[1, 2, 3], 1024, 9.8e9, 5e9, 1).unwrap();
        assert_eq!(f.mean_power(), 0.0);
    }

    #[test]
    fn dummies_carry_cspr_and_sit_on_grid() {
        let b = bank(25e9, 2.5e9);
        let fs = 19.6e9;
        // a coherent seed so that each carrier can be measured by projection
        let seed = LaserSpec { linewidth: 0.0, ..LaserSpec::olt() };
        let f = dummy_bank_generate(&b, &seed, &[10], 4096, fs, 25e9, 3).unwrap();
        let total = f.mean_power();
        let carriers: f64 = (7..=13)
            .filter(|&m| m != 10)
            .map(|m| {
                let w = 2.0 * std::f64::consts::PI * (m as f64 * 2.5e9 - 25e9) / fs;
                let c: Complex64 = f.envelope.iter().enumerate().map(|(n, z)| z * Complex64::from_polar(1.0, -w * n as f64)).sum();
                (c / f.len() as f64).norm_sqr()
            })
            .sum();
        let cspr = 10.0 * (carriers / (total - carriers)).log10();
        assert!((cspr - 14.0).abs() < 1.0, "{cspr}");
        // six lines at -3 dBm each
        assert!((10.0 * (total / 1e-3).log10() - (-3.0 + 10.0 * 6f64.log10())).abs() < 0.1);
    }
}
