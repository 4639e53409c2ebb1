use std::path::Path;

use super::plot::{line_plot, Axes, Series};
use super::{ber_point, create, sensitivities};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::metrics::{write_ber_curves, write_sensitivities, BerCurve, SensitivityResult};
use crate::seed;

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// One curve per live ONU, in ONU order.
    pub curves: Vec<BerCurve>,
    pub sensitivities: Vec<SensitivityResult>,
    pub warnings: Vec<String>,
}

/// BER against preamp input power for every live ONU. All power points
/// share one noise realisation, so the curves are smooth in power.
pub fn sensitivity_sweep(cfg: &Config, mode: Execution) -> Result<SweepReport> {
    let mut scenario = cfg.scenario.clone();
    scenario.rng_seed = seed::derive(cfg.seed, "sensitivity-sweep");
    let powers = &cfg.sweep.powers_dbm;
    if scenario.live_onus.is_empty() {
        return Err(Error::config("sensitivity sweep needs at least one live ONU"));
    }
    let top = powers.iter().cloned().fold(f64::MIN, f64::max);
    for k in 0..scenario.live_onus.len() {
        let mut probe = scenario.clone();
        probe
            .set_preamp_power(k, top)
            .map_err(|e| Error::config(format!("sweep.powers_dbm: ONU on channel {}: {e}", probe.live_onus[k].channel_id)))?;
    }
    let jobs: Vec<(usize, f64)> =
        (0..scenario.live_onus.len()).flat_map(|k| powers.iter().map(move |&p| (k, p))).collect();
    let results = exec::map(&jobs, mode, |&(k, p)| ber_point(&scenario, k, p));
    let mut per_onu: Vec<Vec<(f64, _)>> = vec![Vec::new(); scenario.live_onus.len()];
    for ((k, _), r) in jobs.iter().zip(results) {
        let r = r?;
        per_onu[*k].push((r.power_at_preamp, r));
    }
    let curves = per_onu
        .into_iter()
        .zip(&scenario.live_onus)
        .map(|(pts, onu)| BerCurve::new(onu.channel_id, pts))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let sens = sensitivities(&curves, &cfg.fec, &mut warnings);
    Ok(SweepReport { curves, sensitivities: sens, warnings })
}

/// `ber_curve.csv`, `sensitivity.csv` and `ber_vs_power.svg`.
pub fn write_sensitivity_sweep(report: &SweepReport, dir: &Path) -> Result<Vec<String>> {
    write_ber_curves(&report.curves, create(dir, "ber_curve.csv")?)?;
    write_sensitivities(&report.sensitivities, create(dir, "sensitivity.csv")?)?;
    let ids: Vec<String> = report.curves.iter().map(|c| c.channel_id.to_string()).collect();
    let title = format!("BER vs power at the preamp input, channels {}", ids.join(", "));
    let series: Vec<Series> = report
        .curves
        .iter()
        .map(|c| Series::marked(format!("Ch {}", c.channel_id), c.points.iter().map(|(p, r)| (*p, r.ber)).collect()))
        .collect();
    line_plot(
        &dir.join("ber_vs_power.svg"),
        &Axes { title: &title, x_label: "power at preamp input (dBm)", y_label: "BER", log_y: true },
        &series,
    )?;
    Ok(vec!["ber_curve.csv".into(), "sensitivity.csv".into(), "ber_vs_power.svg".into()])
}
