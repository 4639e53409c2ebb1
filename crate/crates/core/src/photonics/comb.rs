use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::field::{dbm_to_watts, OpticalField};
use super::laser::{phase_walk, LaserSpec};
use crate::error::{Error, Result};
use crate::seed;

/// Frequency comb seeded by a laser. Line `m` sits at
/// `seed + m * spacing` for `m` in `first_line .. first_line + n_lines`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CombSpec {
    pub spacing: f64,
    pub n_lines: usize,
    pub first_line: i32,
    pub per_line_power_dbm: f64,
    /// Notch position relative to the seed laser, Hz.
    pub notch_center: f64,
    /// Zero disables the notch.
    pub notch_width: f64,
    pub notch_depth_db: f64,
    /// Peak-to-peak uniform ripple across lines, dB.
    pub line_flatness_ripple_db: f64,
}

impl Default for CombSpec {
    fn default() -> Self {
        CombSpec {
            spacing: 2.5e9,
            n_lines: 64,
            first_line: -32,
            per_line_power_dbm: 0.0,
            notch_center: 0.0,
            notch_width: 0.0,
            notch_depth_db: 50.0,
            line_flatness_ripple_db: 0.0,
        }
    }
}

impl CombSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) || self.n_lines == 0 {
            return Err(Error::invalid("comb needs positive spacing and at least one line"));
        }
        if !(self.notch_width >= 0.0) || !(self.notch_depth_db >= 0.0) || !(self.line_flatness_ripple_db >= 0.0) {
            return Err(Error::invalid("comb notch and ripple must be non-negative"));
        }
        Ok(())
    }

    pub fn line_indices(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.n_lines as i32).map(move |k| self.first_line + k)
    }

    /// Line offset from the seed, Hz.
    pub fn line_offset(&self, m: i32) -> f64 {
        m as f64 * self.spacing
    }

    pub fn is_notched(&self, m: i32) -> bool {
        self.notch_width > 0.0 && (self.line_offset(m) - self.notch_center).abs() <= self.notch_width / 2.0
    }

    /// Power gain of line `m` in dB, including notch and ripple.
    pub fn line_gain_db(&self, m: i32, rng_seed: u64) -> f64 {
        let mut g = 0.0;
        if self.line_flatness_ripple_db > 0.0 {
            let mut rng = seed::rng(seed::derive(rng_seed, &format!("comb-line/{m}")));
            g += self.line_flatness_ripple_db * (rng.random::<f64>() - 0.5);
        }
        if self.is_notched(m) {
            g -= self.notch_depth_db;
        }
        g
    }

    /// Keep only lines whose offset from the seed lies within `[lo, hi]`.
    /// Ripple and phase of surviving lines are unchanged.
    pub fn restrict(&self, lo: f64, hi: f64) -> Option<CombSpec> {
        let kept: Vec<i32> = self
            .line_indices()
            .filter(|&m| (lo..=hi).contains(&self.line_offset(m)))
            .collect();
        let first = *kept.first()?;
        Some(CombSpec { first_line: first, n_lines: kept.len(), ..self.clone() })
    }
}

/// Fixed line phases: 0 on even lines, pi/2 on odd ones.
fn line_phase(m: i32) -> f64 {
    if m.rem_euclid(2) == 1 {
        PI / 2.0
    } else {
        0.0
    }
}

/// Comb field sampled at `fs` with DC at `frame_offset` from the global
/// reference. All lines share the seed laser's phase noise; the seed's own
/// power setting is ignored in favour of `per_line_power_dbm`.
pub fn comb_generate(
    seed_laser: &LaserSpec,
    spec: &CombSpec,
    n_samples: usize,
    fs: f64,
    frame_offset: f64,
    rng_seed: u64,
) -> Result<OpticalField> {
    spec.validate()?;
    seed_laser.validate()?;
    let seed_f = seed_laser.emission_offset();
    let mut lines = Vec::with_capacity(spec.n_lines);
    for m in spec.line_indices() {
        let rel = seed_f + spec.line_offset(m) - frame_offset;
        if rel.abs() >= fs / 2.0 {
            return Err(Error::Range(format!(
                "comb line {m} at {:.3} GHz is outside the {:.3} GS/s window",
                rel / 1e9,
                fs / 1e9
            )));
        }
        let p = dbm_to_watts(spec.per_line_power_dbm + spec.line_gain_db(m, rng_seed));
        lines.push((2.0 * PI * rel / fs, Complex64::from_polar(p.sqrt(), line_phase(m))));
    }
    let phase = phase_walk(seed_laser.linewidth, n_samples, fs, rng_seed);
    // Per-line phasors are advanced by recurrence and renormalised every
    // block to stop rounding drift.
    let mut rot: Vec<Complex64> = lines.iter().map(|(w, _)| Complex64::from_polar(1.0, *w)).collect();
    let mut cur: Vec<Complex64> = lines.iter().map(|(_, a)| *a).collect();
    let mut env = Vec::with_capacity(n_samples);
    for (n, &ph) in phase.iter().enumerate() {
        if n % 1024 == 0 {
            for (k, (w, a)) in lines.iter().enumerate() {
                cur[k] = a * Complex64::from_polar(1.0, w * n as f64);
                rot[k] = Complex64::from_polar(1.0, *w);
            }
        }
        let s: Complex64 = cur.iter().sum();
        env.push(s * Complex64::from_polar(1.0, ph));
        for (c, r) in cur.iter_mut().zip(&rot) {
            *c *= r;
        }
    }
    OpticalField::new(env, fs, frame_offset)
}
