use std::path::Path;

use super::create;
use super::plot::{line_plot, Axes, Series};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::locking::{acquire_lock, write_histories, LockState};
use crate::photonics::LaserSpec;
use crate::seed;

#[derive(Debug, Clone)]
pub struct LockRun {
    pub detuning: f64,
    pub state: LockState,
    /// The loop settled on a comb line other than the target.
    pub mislock: bool,
}

/// One acquisition per configured initial detuning.
pub fn lock_demo(cfg: &Config, mode: Execution) -> Result<Vec<LockRun>> {
    let demo = &cfg.lock;
    let olt = LaserSpec::olt();
    let target_f = olt.emission_offset() + demo.comb.line_offset(demo.target_channel);
    let jobs: Vec<(usize, f64)> = demo.detunings_hz.iter().cloned().enumerate().collect();
    let runs = exec::map(&jobs, mode, |&(i, d)| {
        let laser = LaserSpec::onu(target_f + d);
        let rng = seed::derive(cfg.seed, &format!("lock/{i}"));
        match acquire_lock(&laser, &olt, &demo.comb, demo.target_channel, &demo.loop_cfg, rng) {
            Ok(state) => Ok(LockRun { detuning: d, state, mislock: false }),
            Err(Error::Mislock { state, .. }) => Ok(LockRun { detuning: d, state: *state, mislock: true }),
            Err(e) => Err(e),
        }
    });
    runs.into_iter().collect()
}

/// `lock_history.csv` (all runs, in detuning order), `lock_summary.csv` and
/// `lock_history.svg`.
pub fn write_lock_demo(runs: &[LockRun], dir: &Path) -> Result<Vec<String>> {
    let states: Vec<LockState> = runs.iter().map(|r| r.state.clone()).collect();
    write_histories(&states, create(dir, "lock_history.csv")?)?;

    let mut w = csv::Writer::from_writer(create(dir, "lock_summary.csv")?);
    w.write_record([
        "detuning_hz",
        "target_channel",
        "settled_channel",
        "locked",
        "mislock",
        "settle_time_s",
        "final_residual_hz",
        "history_rows",
    ])?;
    for r in runs {
        let s = &r.state;
        w.write_record([
            format!("{:e}", r.detuning),
            s.target_channel.to_string(),
            s.settled_channel.to_string(),
            s.locked.to_string(),
            r.mislock.to_string(),
            s.settle_time.map(|t| format!("{t:.6e}")).unwrap_or_default(),
            format!("{:.6e}", s.residual),
            s.history.len().to_string(),
        ])?;
    }
    w.flush()?;

    let series: Vec<Series> = runs
        .iter()
        .map(|r| {
            let pts = r.state.history.iter().map(|h| (h.t_seconds * 1e3, h.residual_hz / 1e6)).collect();
            Series::line(format!("start {:.2} GHz", r.detuning / 1e9), pts)
        })
        .collect();
    line_plot(
        &dir.join("lock_history.svg"),
        &Axes { title: "Frequency-lock acquisition", x_label: "time (ms)", y_label: "residual (MHz)", log_y: false },
        &series,
    )?;
    Ok(vec!["lock_history.csv".into(), "lock_summary.csv".into(), "lock_history.svg".into()])
}
