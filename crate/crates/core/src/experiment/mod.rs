//! Experiments built on the link simulator.
//!
//! Each experiment has a compute step that returns plain data and a write
//! step that turns it into CSV files (the contract) and SVG plots. Sweep
//! points are independent jobs; results are ordered by grid index, so the
//! CSVs do not depend on how the jobs were scheduled.

pub mod channels;
pub mod lock;
pub mod plot;
pub mod spectrum;
pub mod sweep;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

pub use channels::{channel_sweep, write_channel_sweep, ChannelSweepReport, ChannelVariant, SummaryRow};
pub use lock::{lock_demo, write_lock_demo, LockRun};
pub use spectrum::{spectrum, write_spectrum, SpectrumReport};
pub use sweep::{sensitivity_sweep, write_sensitivity_sweep, SweepReport};

use crate::error::{Error, Result};
use crate::link::{ber_count, channel_demodulate, scenario_run, ScenarioConfig};
use crate::metrics::{sensitivity_at_threshold, BerCurve, BerResult, FecThresholds, SensitivityResult};

/// BER of live ONU `k` with the VOA set so that it nominally arrives at
/// `power_dbm`. The result carries the power actually measured at the
/// preamp input. A receiver that cannot synchronise counts as BER 0.5.
pub fn ber_point(scenario: &ScenarioConfig, k: usize, power_dbm: f64) -> Result<BerResult> {
    let mut s = scenario.clone();
    s.set_preamp_power(k, power_dbm)?;
    let onu = &s.live_onus[k];
    let cap = scenario_run(&s)?;
    let measured = cap.applied_powers[&onu.channel_id];
    let truth = &cap.per_onu_truth[&onu.channel_id];
    let outcome = channel_demodulate(&cap, onu.channel_id, &onu.tx).and_then(|(rx, _)| ber_count(&rx, truth));
    match outcome {
        Ok(r) => BerResult::new(r.errors, r.bits, measured),
        Err(Error::SyncFailure(_) | Error::Alignment(_)) => {
            let bits = truth.len() as u64;
            BerResult::new(bits / 2, bits, measured)
        }
        Err(e) => Err(e),
    }
}

/// HD and SD sensitivities of every curve, in curve order. Curves that
/// never cross a threshold produce a warning instead of a row.
pub fn sensitivities(curves: &[BerCurve], fec: &FecThresholds, warnings: &mut Vec<String>) -> Vec<SensitivityResult> {
    let mut rows = Vec::new();
    for c in curves {
        for t in [fec.hd, fec.sd] {
            match sensitivity_at_threshold(c, t) {
                Ok(s) => {
                    if s.multiple_crossings {
                        warnings.push(format!("channel {}: BER crosses {t:e} more than once", c.channel_id));
                    }
                    if s.floor_substituted {
                        warnings.push(format!("channel {}: zero-error points floored at 1/bits", c.channel_id));
                    }
                    rows.push(s);
                }
                Err(Error::NotBracketed { .. }) => {
                    warnings.push(format!("channel {}: threshold {t:e} not crossed in the power grid", c.channel_id))
                }
                Err(e) => warnings.push(format!("channel {}: {e}", c.channel_id)),
            }
        }
    }
    warnings.dedup();
    rows
}

pub(crate) fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}
