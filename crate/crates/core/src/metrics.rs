//! BER bookkeeping, FEC-threshold sensitivity, grid mapping and capacity.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub const GRID_SPACING: f64 = 2.5e9;
pub const MAX_CHANNEL: i32 = 32;

/// Offset of channel `id` from the LO: `id * 2.5 GHz`.
pub fn channel_freq(id: i32) -> Result<f64> {
    if id == 0 || id.abs() > MAX_CHANNEL {
        return Err(Error::InvalidChannel(id));
    }
    Ok(id as f64 * GRID_SPACING)
}

/// The 64 grid positions `-32..=-1, 1..=32`.
pub fn channel_grid() -> Vec<i32> {
    (-MAX_CHANNEL..=MAX_CHANNEL).filter(|&i| i != 0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FecThresholds {
    pub hd: f64,
    pub sd: f64,
    pub hd_overhead: f64,
    pub sd_overhead: f64,
}

impl Default for FecThresholds {
    fn default() -> Self {
        FecThresholds { hd: 4.4e-3, sd: 2e-2, hd_overhead: 0.067, sd_overhead: 0.153 }
    }
}

impl FecThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.hd && self.hd < self.sd && self.sd < 0.5) {
            return Err(Error::config("FEC thresholds must satisfy 0 < hd < sd < 0.5"));
        }
        if !(self.hd_overhead >= 0.0 && self.sd_overhead >= 0.0) {
            return Err(Error::config("FEC overheads must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerResult {
    pub errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub power_at_preamp: f64,
}

impl BerResult {
    pub fn new(errors: u64, bits: u64, power_at_preamp: f64) -> Result<Self> {
        if bits == 0 || errors > bits {
            return Err(Error::invalid("BER needs bits > 0 and errors <= bits"));
        }
        Ok(BerResult { errors, bits, ber: errors as f64 / bits as f64, power_at_preamp })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub channel_id: i32,
    pub points: Vec<(f64, BerResult)>,
}

impl BerCurve {
    pub fn new(channel_id: i32, mut points: Vec<(f64, BerResult)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("BER curve powers must be distinct"));
        }
        Ok(BerCurve { channel_id, points })
    }

    /// BER at the highest power, or `None` for an empty curve.
    pub fn best(&self) -> Option<f64> {
        self.points.last().map(|p| p.1.ber)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub channel_id: i32,
    pub threshold: f64,
    pub sensitivity: f64,
    /// False when a measured point sits exactly on the threshold.
    pub interpolated: bool,
    /// More than one crossing; the highest-power one was used.
    pub multiple_crossings: bool,
    /// A zero-error point was replaced by the 1/bits floor.
    pub floor_substituted: bool,
}

/// Power at which the curve crosses `threshold`, linear in
/// (dBm, log10 BER).
pub fn sensitivity_at_threshold(curve: &BerCurve, threshold: f64) -> Result<SensitivityResult> {
    if curve.points.len() < 2 {
        return Err(Error::invalid("sensitivity needs at least two points"));
    }
    let mut floor_substituted = false;
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|(p, r)| {
            if r.errors == 0 {
                floor_substituted = true;
                (*p, (1.0 / r.bits as f64).log10())
            } else {
                (*p, r.ber.log10())
            }
        })
        .collect();
    let t = threshold.log10();
    let mut crossings = Vec::new();
    for (i, w) in pts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if a.1 == t {
            crossings.push((a.0, false, i));
        } else if (a.1 - t) * (b.1 - t) < 0.0 {
            let x = a.0 + (b.0 - a.0) * (a.1 - t) / (a.1 - b.1);
            crossings.push((x, true, i));
        }
    }
    if let Some(last) = pts.last() {
        if last.1 == t {
            crossings.push((last.0, false, pts.len() - 1));
        }
    }
    crossings.dedup_by(|a, b| a.0 == b.0);
    let &(x, interpolated, _) = crossings.last().ok_or(Error::NotBracketed { threshold })?;
    Ok(SensitivityResult {
        channel_id: curve.channel_id,
        threshold,
        sensitivity: x,
        interpolated,
        multiple_crossings: crossings.len() > 1,
        floor_substituted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub n_channels: u32,
    pub per_channel_raw: f64,
    pub aggregate_raw: f64,
    pub aggregate_net: f64,
}

pub fn aggregate_capacity(n_channels: u32, baud: f64, bits_per_symbol: u32, overhead: f64) -> CapacityReport {
    let per = baud * bits_per_symbol as f64;
    let raw = per * n_channels as f64;
    CapacityReport { n_channels, per_channel_raw: per, aggregate_raw: raw, aggregate_net: raw / (1.0 + overhead) }
}

/// Gray-coded 4QAM over AWGN: `Q(sqrt(Es/N0))`.
pub fn theory_ber_4qam(esn0_db: f64) -> f64 {
    let esn0 = 10f64.powf(esn0_db / 10.0);
    0.5 * erfc((esn0 / 2.0).sqrt())
}

/// Es/N0 in dB at which [`theory_ber_4qam`] equals `ber`.
pub fn theory_esn0_db_for(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.5) {
        return Err(Error::range(format!("BER {ber} has no finite Es/N0")));
    }
    let (mut lo, mut hi) = (-30.0, 30.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theory_ber_4qam(mid) > ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Arithmetic mean of sensitivities in dBm and the dBm value of their
/// linear-power mean.
pub fn mean_sensitivity(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let db = values.iter().sum::<f64>() / n;
    let lin = values.iter().map(|v| 10f64.powf(v / 10.0)).sum::<f64>() / n;
    Some((db, 10.0 * lin.log10()))
}

pub fn write_ber_curves<W: Write>(curves: &[BerCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["channel_id", "power_dbm", "bits", "errors", "ber"])?;
    for c in curves {
        for (p, r) in &c.points {
            w.write_record([
                c.channel_id.to_string(),
                format!("{p:.4}"),
                r.bits.to_string(),
                r.errors.to_string(),
                format!("{:.6e}", r.ber),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sensitivities<W: Write>(rows: &[SensitivityResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["channel_id", "freq_offset_ghz", "threshold", "sensitivity_dbm", "interpolated"])?;
    for s in rows {
        w.write_record([
            s.channel_id.to_string(),
            format!("{:.1}", s.channel_id as f64 * GRID_SPACING / 1e9),
            format!("{:e}", s.threshold),
            format!("{:.4}", s.sensitivity),
            s.interpolated.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_capacity<W: Write>(c: &CapacityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_channels", "per_channel_gbps", "raw_gbps", "net_gbps"])?;
    w.write_record([
        c.n_channels.to_string(),
        format!("{:.3}", c.per_channel_raw / 1e9),
        format!("{:.3}", c.aggregate_raw / 1e9),
        format!("{:.3}", c.aggregate_net / 1e9),
    ])?;
    w.flush()?;
    Ok(())
}
