use std::io::Write;

use serde::{Deserialize, Serialize};

use super::beat::measure_beat_in;
use super::pi::PiController;
use super::tec::{tec_tune, TecModel};
use crate::error::{Error, Result};
use crate::photonics::comb::{comb_generate, CombSpec};
use crate::photonics::laser::{laser_emit, LaserSpec, REFERENCE_TEMPERATURE};
use crate::photonics::receiver::{photodiode_detect, ReceiverSpec};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LockConfig {
    pub loop_rate: f64,
    pub lock_threshold: f64,
    pub settle_budget: f64,
    /// Consecutive locked steps after which the run stops early.
    pub hold_steps: usize,
    pub pi: PiController,
    pub tec: TecModel,
    pub coarse_tec: bool,
    /// Sample rate of the simulated locking photocurrent.
    pub sim_rate: f64,
    pub window: usize,
    /// Record length per loop step, in windows.
    pub windows_per_step: usize,
    /// ONU light reaching the locking photodiode, dBm.
    pub onu_power_dbm: f64,
    /// Power per comb line at the locking photodiode, dBm.
    pub comb_line_power_dbm: f64,
    /// Phase noise and receiver noise on or off.
    pub noise: bool,
    pub receiver: ReceiverSpec,
}

impl Default for LockConfig {
    fn default() -> Self {
        let loop_rate = 100e3;
        LockConfig {
            loop_rate,
            lock_threshold: 10e6,
            settle_budget: 10e-3,
            hold_steps: 20,
            pi: PiController::critically_damped(loop_rate),
            tec: TecModel::default(),
            coarse_tec: true,
            sim_rate: 10e9,
            window: 16384,
            windows_per_step: 4,
            onu_power_dbm: -10.0,
            comb_line_power_dbm: -30.0,
            noise: true,
            receiver: ReceiverSpec::locking(),
        }
    }
}

impl LockConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.loop_rate > 0.0) || !(self.lock_threshold > 0.0) || !(self.settle_budget > 0.0) {
            return Err(Error::invalid("loop rate, lock threshold and settle budget must be positive"));
        }
        if self.window < 256 || self.windows_per_step == 0 {
            return Err(Error::invalid("lock window must be >= 256 samples"));
        }
        self.pi.validate()?;
        self.receiver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockSample {
    pub t_seconds: f64,
    pub residual_hz: f64,
    pub locked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockState {
    pub target_channel: i32,
    /// Comb line nearest to the final laser frequency.
    pub settled_channel: i32,
    pub beat_estimate: f64,
    /// Laser frequency minus target line frequency, Hz.
    pub residual: f64,
    pub locked: bool,
    /// Time at which the final locked run began.
    pub settle_time: Option<f64>,
    pub tec_temperature: f64,
    /// Accumulated PI correction, Hz.
    pub correction: f64,
    pub history: Vec<LockSample>,
}

impl LockState {
    pub fn residual_rms(&self, skip: usize) -> f64 {
        let tail = &self.history[skip.min(self.history.len())..];
        if tail.is_empty() {
            return self.residual.abs();
        }
        (tail.iter().map(|s| s.residual_hz * s.residual_hz).sum::<f64>() / tail.len() as f64).sqrt()
    }

    /// Write the history as `t_seconds,residual_hz,locked`.
    pub fn write_history<W: Write>(&self, out: W) -> Result<()> {
        write_histories(std::slice::from_ref(self), out)
    }
}

/// Concatenate several histories under one header.
pub fn write_histories<W: Write>(states: &[LockState], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_seconds", "residual_hz", "locked"])?;
    for s in states {
        for h in &s.history {
            w.write_record([format!("{:.9e}", h.t_seconds), format!("{:.6e}", h.residual_hz), h.locked.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn nearest_line(comb: &CombSpec, rel: f64) -> i32 {
    let m = (rel / comb.spacing).round() as i64;
    let lo = comb.first_line as i64;
    let hi = lo + comb.n_lines as i64 - 1;
    m.clamp(lo, hi) as i32
}

/// Closed-loop acquisition of comb line `target_channel`.
///
/// The discriminator measures the beat in `(0, spacing/2]`, so the loop
/// always pulls toward whichever line is nearest. The sign of the error is
/// taken from the known geometry. A step with no detectable beat counts as
/// zero error.
pub fn acquire_lock(
    laser: &LaserSpec,
    comb_seed: &LaserSpec,
    comb: &CombSpec,
    target_channel: i32,
    cfg: &LockConfig,
    rng_seed: u64,
) -> Result<LockState> {
    cfg.validate()?;
    comb.validate()?;
    laser.validate()?;
    let last = comb.first_line + comb.n_lines as i32 - 1;
    if target_channel == 0 || target_channel < comb.first_line || target_channel > last {
        return Err(Error::InvalidChannel(target_channel));
    }
    let seed_f = comb_seed.emission_offset();
    let target_f = seed_f + comb.line_offset(target_channel);
    let mut laser = laser.clone();
    let mut tec = TecModel { temperature: laser.temperature, ..cfg.tec.clone() };
    if laser.tuning_coeff > 0.0 {
        tec.coeff = laser.tuning_coeff;
    }
    let half = comb.spacing / 2.0;
    let detuning = laser.emission_offset() - target_f;
    if cfg.coarse_tec && detuning.abs() > half {
        let dt = tec.step_for(-detuning);
        tec_tune(&mut tec, dt)?;
        laser.temperature = tec.temperature;
        laser.tuning_coeff = tec.coeff;
    }

    let dt = 1.0 / cfg.loop_rate;
    let max_steps = (cfg.settle_budget * cfg.loop_rate).round() as usize;
    let mut pi = cfg.pi.clone();
    let mut u = 0.0;
    let n = cfg.window * cfg.windows_per_step;
    let fs = cfg.sim_rate;
    let rx = if cfg.noise {
        cfg.receiver.clone()
    } else {
        ReceiverSpec { shot_noise_enabled: false, thermal_noise_psd: 0.0, ..cfg.receiver.clone() }
    };
    let quiet_comb_seed = LaserSpec {
        linewidth: if cfg.noise { comb_seed.linewidth } else { 0.0 },
        ..comb_seed.clone()
    };
    let base_comb = CombSpec { per_line_power_dbm: cfg.comb_line_power_dbm, ..comb.clone() };

    let mut history = Vec::with_capacity(max_steps + 1);
    let mut beat_estimate = 0.0;
    let mut run = 0usize;
    let mut run_start = None;
    for k in 0..=max_steps {
        let t = k as f64 * dt;
        let f_onu = laser.emission_offset() - u;
        let residual = f_onu - target_f;
        let locked = residual.abs() < cfg.lock_threshold;
        history.push(LockSample { t_seconds: t, residual_hz: residual, locked });
        if locked {
            if run == 0 {
                run_start = Some(t);
            }
            run += 1;
            if run >= cfg.hold_steps {
                break;
            }
        } else {
            run = 0;
            run_start = None;
        }
        if k == max_steps {
            break;
        }

        let step_seed = seed::derive(rng_seed, &format!("lock-step/{k}"));
        let onu = LaserSpec {
            power_dbm: cfg.onu_power_dbm,
            linewidth: if cfg.noise { laser.linewidth } else { 0.0 },
            freq_offset: f_onu,
            tuning_coeff: 0.0,
            temperature: REFERENCE_TEMPERATURE,
        };
        let mut field = laser_emit(&onu, n, fs, seed::derive(step_seed, "onu"))?;
        let near = base_comb.restrict(f_onu - seed_f - 0.45 * fs, f_onu - seed_f + 0.45 * fs);
        if let Some(sub) = near {
            let c = comb_generate(&quiet_comb_seed, &sub, n, fs, f_onu, seed::derive(step_seed, "comb"))?;
            field.envelope.iter_mut().zip(&c.envelope).for_each(|(a, b)| *a += b);
        }
        let pc = photodiode_detect(&field, &rx, seed::derive(step_seed, "pd"))?;
        let error = match measure_beat_in(&pc, cfg.window, 0.0, half) {
            Ok(b) => {
                beat_estimate = b;
                let line_f = seed_f + comb.line_offset(nearest_line(comb, f_onu - seed_f));
                if f_onu >= line_f {
                    b
                } else {
                    -b
                }
            }
            Err(Error::NoBeat { .. }) => {
                beat_estimate = 0.0;
                0.0
            }
            Err(e) => return Err(e),
        };
        u = pi.step(error, dt);
    }

    let last_sample = *history.last().expect("at least one sample");
    let f_final = target_f + last_sample.residual_hz;
    let settled = nearest_line(comb, f_final - seed_f);
    let state = LockState {
        target_channel,
        settled_channel: settled,
        beat_estimate,
        residual: last_sample.residual_hz,
        locked: last_sample.locked,
        settle_time: if last_sample.locked { run_start } else { None },
        tec_temperature: tec.temperature,
        correction: u,
        history,
    };
    if settled != target_channel {
        return Err(Error::Mislock { target: target_channel, settled, state: Box::new(state) });
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(detuning: f64, target: i32) -> (LaserSpec, LaserSpec, CombSpec) {
        let comb = CombSpec::default();
        let laser = LaserSpec::onu(target as f64 * comb.spacing + detuning);
        (laser, LaserSpec::olt(), comb)
    }

    #[test]
    fn zero_detuning_is_locked_at_once() {
        let (l, s, c) = setup(0.0, 3);
        let cfg = LockConfig { noise: false, ..Default::default() };
        let st = acquire_lock(&l, &s, &c, 3, &cfg, 1).unwrap();
        assert!(st.locked);
        assert_eq!(st.settle_time, Some(0.0));
        assert!(st.history[0].locked);
        assert!(st.residual.abs() < 1.0);
    }

    #[test]
    fn one_ghz_detuning_locks() {
        let (l, s, c) = setup(1e9, -7);
        let st = acquire_lock(&l, &s, &c, -7, &LockConfig::default(), 2).unwrap();
        assert!(st.locked);
        assert!(st.residual.abs() < 10e6);
        assert!(st.settle_time.unwrap() < 10e-3);
    }

    #[test]
    fn one_and_a_half_ghz_mislocks_without_tec() {
        let (l, s, c) = setup(1.5e9, 5);
        let cfg = LockConfig { coarse_tec: false, ..Default::default() };
        match acquire_lock(&l, &s, &c, 5, &cfg, 3) {
            Err(Error::Mislock { target, settled, state }) => {
                assert_eq!((target, settled), (5, 6));
                assert!((state.residual - 2.5e9).abs() < 10e6);
            }
            other => panic!("expected mislock, got {other:?}"),
        }
    }

    #[test]
    fn coarse_tec_rescues_large_detuning() {
        let (l, s, c) = setup(23e9, 1);
        let st = acquire_lock(&l, &s, &c, 1, &LockConfig::default(), 4).unwrap();
        assert!(st.locked);
        assert!((st.tec_temperature - 25.0 + 23e9 / (160e9 / 13.0)).abs() < 0.011);
    }

    #[test]
    fn invalid_targets() {
        let (l, s, c) = setup(0.0, 1);
        for t in [0, 32, -33] {
            assert!(matches!(
                acquire_lock(&l, &s, &c, t, &LockConfig::default(), 0),
                Err(Error::InvalidChannel(_))
            ));
        }
    }

    #[test]
    fn history_csv() {
        let (l, s, c) = setup(0.5e9, 2);
        let cfg = LockConfig { noise: false, ..Default::default() };
        let st = acquire_lock(&l, &s, &c, 2, &cfg, 0).unwrap();
        let mut buf = Vec::new();
        st.write_history(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_seconds,residual_hz,locked\n"));
        assert_eq!(text.lines().count(), st.history.len() + 1);
    }
}
