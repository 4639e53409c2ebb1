use std::path::Path;

use super::plot::{line_plot, Axes, Series};
use super::{ber_point, create, sensitivities};
use crate::config::Config;
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::link::{OnuInstance, ScenarioConfig};
use crate::metrics::{
    aggregate_capacity, channel_freq, channel_grid, mean_sensitivity, write_ber_curves, write_capacity,
    write_sensitivities, BerCurve, CapacityReport, SensitivityResult, GRID_SPACING,
};
use crate::seed;

#[derive(Debug, Clone)]
pub struct ChannelVariant {
    /// `baseline`, `rolloff_off` or `dispersion_off`.
    pub name: String,
    pub curves: Vec<BerCurve>,
    pub sensitivities: Vec<SensitivityResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub variant: String,
    pub threshold: f64,
    pub channels: usize,
    /// Arithmetic mean of the sensitivities in dBm.
    pub mean_dbm: f64,
    /// Mean of the sensitivities in linear power, expressed in dBm.
    pub linear_mean_dbm: f64,
    pub best_channel: i32,
    pub best_dbm: f64,
    pub worst_channel: i32,
    pub worst_dbm: f64,
}

impl SummaryRow {
    pub fn spread_db(&self) -> f64 {
        self.worst_dbm - self.best_dbm
    }
}

#[derive(Debug, Clone)]
pub struct ChannelSweepReport {
    pub channels: Vec<i32>,
    pub variants: Vec<ChannelVariant>,
    pub summary: Vec<SummaryRow>,
    pub capacity: CapacityReport,
    pub warnings: Vec<String>,
}

impl ChannelSweepReport {
    pub fn variant(&self, name: &str) -> Option<&ChannelVariant> {
        self.variants.iter().find(|v| v.name == name)
    }

    pub fn summary_for(&self, variant: &str, threshold: f64) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.variant == variant && s.threshold == threshold)
    }
}

/// The first live ONU (or reference ONU 1) alone on `channel`, in a window
/// centred on it.
fn single_channel(base: &ScenarioConfig, channel: i32) -> Result<ScenarioConfig> {
    let mut onu = match base.live_onus.first() {
        Some(o) => o.clone(),
        None => OnuInstance::reference(0, channel)?,
    };
    onu.channel_id = channel;
    onu.laser.freq_offset = channel_freq(channel)?;
    Ok(ScenarioConfig { live_onus: vec![onu], dummy: None, sim_center: None, sim_band: 0.0, ..base.clone() })
}

/// Sensitivity across the grid. Every channel sees the same noise
/// realisation, so differences between channels come from the channel
/// position alone.
pub fn channel_sweep(cfg: &Config, mode: Execution) -> Result<ChannelSweepReport> {
    let cs = &cfg.channel_sweep;
    let channels = cfg.sweep_channels();
    let mut base = cfg.scenario.clone();
    base.sim_rate = cs.sim_rate;
    base.rng_seed = seed::derive(cfg.seed, "channel-sweep");

    let mut variants: Vec<(String, ScenarioConfig)> = vec![("baseline".into(), base.clone())];
    if cs.compare_rolloff {
        let mut s = base.clone();
        s.receiver.rolloff_enabled = false;
        variants.push(("rolloff_off".into(), s));
    }
    if cs.compare_dispersion {
        let mut s = base.clone();
        s.distributing_fiber.dispersion_enabled = false;
        if let Some(o) = s.live_onus.first_mut() {
            o.feeder.dispersion_enabled = false;
        }
        variants.push(("dispersion_off".into(), s));
    }

    let mut jobs = Vec::new();
    for (v, (_, s)) in variants.iter().enumerate() {
        for (c, &ch) in channels.iter().enumerate() {
            let scenario = single_channel(s, ch)?;
            scenario.validate()?;
            for &p in &cs.powers_dbm {
                jobs.push((v, c, scenario.clone(), p));
            }
        }
    }
    let results = exec::map(&jobs, mode, |(_, _, s, p)| ber_point(s, 0, *p));
    let mut points = vec![vec![Vec::new(); channels.len()]; variants.len()];
    for ((v, c, _, _), r) in jobs.iter().zip(results) {
        let r = r?;
        points[*v][*c].push((r.power_at_preamp, r));
    }

    let mut warnings = Vec::new();
    let mut out = Vec::new();
    for ((name, _), per_channel) in variants.into_iter().zip(points) {
        let curves = per_channel
            .into_iter()
            .zip(&channels)
            .map(|(pts, &ch)| BerCurve::new(ch, pts))
            .collect::<Result<Vec<_>>>()?;
        let mut w = Vec::new();
        let sens = sensitivities(&curves, &cfg.fec, &mut w);
        warnings.extend(w.into_iter().map(|m| format!("{name}: {m}")));
        out.push(ChannelVariant { name, curves, sensitivities: sens });
    }

    let mut summary = Vec::new();
    for v in &out {
        for t in [cfg.fec.hd, cfg.fec.sd] {
            let rows: Vec<&SensitivityResult> = v.sensitivities.iter().filter(|s| s.threshold == t).collect();
            let vals: Vec<f64> = rows.iter().map(|s| s.sensitivity).collect();
            let Some((mean_dbm, linear_mean_dbm)) = mean_sensitivity(&vals) else { continue };
            // best is the lowest required power
            let best = rows.iter().min_by(|a, b| a.sensitivity.total_cmp(&b.sensitivity)).unwrap();
            let worst = rows.iter().max_by(|a, b| a.sensitivity.total_cmp(&b.sensitivity)).unwrap();
            summary.push(SummaryRow {
                variant: v.name.clone(),
                threshold: t,
                channels: rows.len(),
                mean_dbm,
                linear_mean_dbm,
                best_channel: best.channel_id,
                best_dbm: best.sensitivity,
                worst_channel: worst.channel_id,
                worst_dbm: worst.sensitivity,
            });
        }
    }

    // channels reaching the HD threshold somewhere in the grid, scaled to
    // the full grid when only a subset was swept
    let baseline = &out[0];
    let passing = baseline.curves.iter().filter(|c| c.points.iter().any(|(_, r)| r.ber <= cfg.fec.hd)).count();
    let grid = channel_grid().len();
    let n = if channels.len() == grid {
        passing
    } else {
        (grid as f64 * passing as f64 / channels.len() as f64).round() as usize
    };
    if passing < channels.len() {
        warnings.push(format!("{} of {} swept channels never reach the HD-FEC threshold", channels.len() - passing, channels.len()));
    }
    let tx = base.live_onus.first().map(|o| o.tx.clone()).unwrap_or_default();
    let capacity = aggregate_capacity(n as u32, tx.baud, tx.format.bits_per_symbol() as u32, cfg.fec.hd_overhead);
    Ok(ChannelSweepReport { channels, variants: out, summary, capacity, warnings })
}

fn suffix(name: &str) -> String {
    if name == "baseline" {
        String::new()
    } else {
        format!("_{name}")
    }
}

/// Per-variant `ber_curve*.csv` and `sensitivity*.csv`, plus
/// `sensitivity_summary.csv`, `capacity.csv` and
/// `sensitivity_vs_channel.svg`.
pub fn write_channel_sweep(report: &ChannelSweepReport, dir: &Path) -> Result<Vec<String>> {
    let mut files = Vec::new();
    for v in &report.variants {
        let curves = format!("ber_curve{}.csv", suffix(&v.name));
        let sens = format!("sensitivity{}.csv", suffix(&v.name));
        write_ber_curves(&v.curves, create(dir, &curves)?)?;
        write_sensitivities(&v.sensitivities, create(dir, &sens)?)?;
        files.push(curves);
        files.push(sens);
    }

    let mut w = csv::Writer::from_writer(create(dir, "sensitivity_summary.csv")?);
    w.write_record([
        "variant",
        "threshold",
        "channels",
        "mean_dbm",
        "linear_mean_dbm",
        "best_channel",
        "best_dbm",
        "worst_channel",
        "worst_dbm",
        "spread_db",
    ])?;
    for s in &report.summary {
        w.write_record([
            s.variant.clone(),
            format!("{:e}", s.threshold),
            s.channels.to_string(),
            format!("{:.4}", s.mean_dbm),
            format!("{:.4}", s.linear_mean_dbm),
            s.best_channel.to_string(),
            format!("{:.4}", s.best_dbm),
            s.worst_channel.to_string(),
            format!("{:.4}", s.worst_dbm),
            format!("{:.4}", s.spread_db()),
        ])?;
    }
    w.flush()?;
    files.push("sensitivity_summary.csv".into());

    write_capacity(&report.capacity, create(dir, "capacity.csv")?)?;
    files.push("capacity.csv".into());

    let mut series = Vec::new();
    for v in &report.variants {
        for (tag, pick_hd) in [("HD", true), ("SD", false)] {
            let mut thresholds: Vec<f64> = v.sensitivities.iter().map(|s| s.threshold).collect();
            thresholds.sort_by(f64::total_cmp);
            thresholds.dedup();
            let Some(&t) = (if pick_hd { thresholds.first() } else { thresholds.last() }) else { continue };
            if !pick_hd && thresholds.len() < 2 {
                continue;
            }
            let pts = v
                .sensitivities
                .iter()
                .filter(|s| s.threshold == t)
                .map(|s| (s.channel_id as f64 * GRID_SPACING / 1e9, s.sensitivity))
                .collect();
            series.push(Series::marked(format!("{tag}-FEC {}", v.name.replace('_', " ")), pts));
        }
    }
    line_plot(
        &dir.join("sensitivity_vs_channel.svg"),
        &Axes {
            title: "Upstream sensitivity across the grid",
            x_label: "frequency offset from LO (GHz)",
            y_label: "sensitivity (dBm)",
            log_y: false,
        },
        &series,
    )?;
    files.push("sensitivity_vs_channel.svg".into());
    Ok(files)
}
