use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::dummy::{dummy_bank_generate, DummyBankSpec};
use super::onu::{onu_transmit, OnuInstance, ScmQamConfig};
use crate::dsp::{BitStream, ComplexWaveform};
use crate::error::{Error, Result};
use crate::metrics::{channel_freq, GRID_SPACING};
use crate::photonics::{
    coherent_detect, combine, edfa_amplify, fiber_propagate, laser_emit, watts_to_dbm, EdfaSpec, FiberSpec, LaserSpec,
    OpticalField, ReceiverSpec,
};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub live_onus: Vec<OnuInstance>,
    pub dummy: Option<DummyBankSpec>,
    /// Optical span that must fit in the simulation, Hz. Zero derives it
    /// from the live channels.
    pub sim_band: f64,
    /// Centre of the simulated window relative to the LO. `None` centres it
    /// on the live channels.
    pub sim_center: Option<f64>,
    pub sim_rate: f64,
    pub distributing_fiber: FiberSpec,
    /// Splitting and other passive loss at the remote node, dB.
    pub remote_loss_db: f64,
    /// Variable attenuation ahead of the preamplifier, dB.
    pub voa_db: f64,
    pub preamp: EdfaSpec,
    pub receiver: ReceiverSpec,
    /// OLT laser; also seeds the dummy comb.
    pub lo: LaserSpec,
    /// Share of the OLT laser used as LO.
    pub lo_fraction: f64,
    pub n_symbols: usize,
    /// Master switch for ASE, shot and thermal noise.
    pub noise: bool,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            live_onus: vec![OnuInstance::reference(0, 1).expect("valid reference ONU")],
            dummy: None,
            sim_band: 0.0,
            sim_center: None,
            sim_rate: 9.8e9,
            distributing_fiber: FiberSpec::smf(25.0),
            remote_loss_db: 19.0,
            voa_db: 0.0,
            preamp: EdfaSpec::default(),
            receiver: ReceiverSpec::default(),
            lo: LaserSpec::olt(),
            lo_fraction: 0.7,
            n_symbols: 1 << 15,
            noise: true,
            rng_seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn live_channels(&self) -> Vec<i32> {
        self.live_onus.iter().map(|o| o.channel_id).collect()
    }

    /// Window centre relative to the LO.
    pub fn frame(&self) -> Result<f64> {
        if let Some(c) = self.sim_center {
            return Ok(c);
        }
        let f: Vec<f64> = self.live_onus.iter().map(|o| channel_freq(o.channel_id)).collect::<Result<_>>()?;
        if f.is_empty() {
            return Ok(0.0);
        }
        let lo = f.iter().cloned().fold(f64::MAX, f64::min);
        let hi = f.iter().cloned().fold(f64::MIN, f64::max);
        Ok(0.5 * (lo + hi))
    }

    /// Span covered by the live channel slots.
    pub fn required_band(&self) -> f64 {
        let ids = self.live_channels();
        match (ids.iter().min(), ids.iter().max()) {
            (Some(a), Some(b)) => (b - a) as f64 * GRID_SPACING + GRID_SPACING,
            _ => 0.0,
        }
    }

    /// Distributing fibre plus remote loss.
    pub fn link_loss_db(&self) -> f64 {
        self.distributing_fiber.loss_db() + self.remote_loss_db
    }

    /// Nominal power of live ONU `k` at the preamp input.
    pub fn nominal_preamp_power_dbm(&self, k: usize) -> f64 {
        self.live_onus[k].launch_power_at_splitter_dbm() - self.link_loss_db() - self.voa_db
    }

    /// Set the VOA so that live ONU `k` nominally arrives at `dbm`.
    pub fn set_preamp_power(&mut self, k: usize, dbm: f64) -> Result<()> {
        let onu = self.live_onus.get(k).ok_or_else(|| Error::config(format!("no live ONU {k}")))?;
        let voa = onu.launch_power_at_splitter_dbm() - self.link_loss_db() - dbm;
        if voa < 0.0 {
            return Err(Error::range(format!("{dbm} dBm at the preamp needs negative attenuation ({voa:.2} dB)")));
        }
        self.voa_db = voa;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sim_rate > 0.0) || self.n_symbols == 0 {
            return Err(Error::config("sim_rate and n_symbols must be positive"));
        }
        if !(self.remote_loss_db >= 0.0) || !(self.voa_db >= 0.0) || !(self.lo_fraction > 0.0 && self.lo_fraction <= 1.0) {
            return Err(Error::config("losses must be >= 0 and lo_fraction in (0, 1]"));
        }
        let mut ids = self.live_channels();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("two live ONUs share a channel"));
        }
        for o in &self.live_onus {
            o.validate()?;
        }
        let band = if self.sim_band > 0.0 { self.sim_band } else { self.required_band() };
        if self.sim_rate < band {
            return Err(Error::range(format!("sim rate {} S/s is below the {} Hz band", self.sim_rate, band)));
        }
        let frame = self.frame()?;
        for &id in &ids {
            let rel = channel_freq(id)? - frame;
            if rel.abs() + GRID_SPACING / 2.0 > self.sim_rate / 2.0 {
                return Err(Error::range(format!("channel {id} does not fit in the simulated window")));
            }
        }
        if let Some(d) = &self.dummy {
            d.check_live(&ids)?;
        }
        Ok(())
    }
}

/// Coherent capture plus ground truth.
#[derive(Debug, Clone)]
pub struct UpstreamCapture {
    pub waveform: ComplexWaveform,
    pub per_onu_truth: BTreeMap<i32, BitStream>,
    /// Power of each live channel at the preamp input, dBm.
    pub applied_powers: BTreeMap<i32, f64>,
}

const CAPTURE_MAGIC: &[u8; 8] = b"FDMPCAP\0";
const CAPTURE_VERSION: u32 = 1;

impl UpstreamCapture {
    /// Binary layout, little-endian: 8-byte magic, u32 version, f64 sample
    /// rate, f64 centre offset, u64 sample count, then interleaved re/im
    /// f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CAPTURE_MAGIC)?;
        w.write_all(&CAPTURE_VERSION.to_le_bytes())?;
        w.write_all(&self.waveform.sample_rate().to_le_bytes())?;
        w.write_all(&self.waveform.center_offset().to_le_bytes())?;
        w.write_all(&(self.waveform.len() as u64).to_le_bytes())?;
        for z in self.waveform.samples() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_waveform<R: Read>(mut r: R) -> Result<ComplexWaveform> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CAPTURE_MAGIC {
            return Err(Error::invalid("not a capture file"));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != CAPTURE_VERSION {
            return Err(Error::invalid("unsupported capture version"));
        }
        let mut b8 = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let rate = f64::from_le_bytes(next(&mut r)?);
        let center = f64::from_le_bytes(next(&mut r)?);
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            samples.push(num_complex::Complex64::new(re, im));
        }
        ComplexWaveform::new(samples, rate, center)
    }
}

/// Optical signal arriving at the preamplifier, before any noise.
#[derive(Debug, Clone)]
pub struct PreampInput {
    pub field: OpticalField,
    pub per_onu_truth: BTreeMap<i32, BitStream>,
    pub applied_powers: BTreeMap<i32, f64>,
}

/// Live ONUs and dummies combined and carried over the distribution
/// network to the preamp input. Only the window around the live channels is
/// simulated. With nothing to transmit the field is dark.
pub fn upstream_at_preamp(cfg: &ScenarioConfig) -> Result<PreampInput> {
    cfg.validate()?;
    let frame = cfg.frame()?;
    let fs = cfg.sim_rate;
    let mut fields: Vec<OpticalField> = Vec::new();
    let mut truth = BTreeMap::new();
    let mut launch = Vec::new();
    for (k, onu) in cfg.live_onus.iter().enumerate() {
        let (mut f, bits) = onu_transmit(onu, cfg.n_symbols, fs, seed::derive(cfg.rng_seed, &format!("onu/{k}")))?;
        launch.push((onu.channel_id, f.mean_power()));
        f.reframe(frame);
        fields.push(f);
        truth.insert(onu.channel_id, bits);
    }
    if let Some(d) = &cfg.dummy {
        let f = dummy_bank_generate(
            d,
            &cfg.lo,
            &cfg.live_channels(),
            cfg.n_symbols,
            fs,
            frame,
            seed::derive(cfg.rng_seed, "dummy"),
        )?;
        if f.mean_power() > 0.0 {
            fields.push(f);
        }
    }
    let combined = if fields.is_empty() {
        let n = (cfg.n_symbols as f64 * fs / ScmQamConfig::default().baud).floor() as usize;
        OpticalField::dark(n, fs, frame)
    } else {
        let losses = vec![0.0; fields.len()];
        combine(&fields, &losses, 0.0)?.field
    };
    let mut field = fiber_propagate(&combined, &cfg.distributing_fiber)?;
    field.apply_gain_db(-(cfg.remote_loss_db + cfg.voa_db));
    let path_loss = cfg.link_loss_db() + cfg.voa_db;
    let applied = launch.into_iter().map(|(id, p)| (id, watts_to_dbm(p) - path_loss)).collect();
    Ok(PreampInput { field, per_onu_truth: truth, applied_powers: applied })
}

/// The whole upstream path through preamplifier and coherent receiver.
pub fn scenario_run(cfg: &ScenarioConfig) -> Result<UpstreamCapture> {
    let input = upstream_at_preamp(cfg)?;
    let fs = cfg.sim_rate;
    let amplified = if cfg.noise {
        edfa_amplify(&input.field, &cfg.preamp, seed::derive(cfg.rng_seed, "preamp"))?
    } else {
        let mut f = input.field;
        f.apply_gain_db(cfg.preamp.gain_db);
        f
    };
    let lo_spec = LaserSpec { power_dbm: cfg.lo.power_dbm + 10.0 * cfg.lo_fraction.log10(), ..cfg.lo.clone() };
    let lo = laser_emit(&lo_spec, amplified.len(), fs, seed::derive(cfg.rng_seed, "lo"))?;
    let rx = if cfg.noise {
        cfg.receiver.clone()
    } else {
        ReceiverSpec { shot_noise_enabled: false, thermal_noise_psd: 0.0, ..cfg.receiver.clone() }
    };
    let waveform = coherent_detect(&amplified, &lo, &rx, seed::derive(cfg.rng_seed, "receiver"))?;
    Ok(UpstreamCapture { waveform, per_onu_truth: input.per_onu_truth, applied_powers: input.applied_powers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::ber::ber_count;
    use crate::link::demod::channel_demodulate;

    fn quiet(channels: &[i32]) -> ScenarioConfig {
        ScenarioConfig {
            live_onus: channels.iter().enumerate().map(|(k, &c)| OnuInstance::reference(k, c).unwrap()).collect(),
            n_symbols: 4096,
            noise: false,
            ..Default::default()
        }
    }

    #[test]
    fn link_budget_is_24_db() {
        assert!((ScenarioConfig::default().link_loss_db() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn lo_power() {
        let c = ScenarioConfig::default();
        assert!((c.lo.power_dbm + 10.0 * c.lo_fraction.log10() - 11.451).abs() < 1e-3);
    }

    #[test]
    fn window_checks() {
        let mut c = quiet(&[1, 2, 3]);
        c.sim_rate = 4.9e9;
        assert!(matches!(c.validate(), Err(Error::Range(_))));
        let mut c = quiet(&[1, 1]);
        c.live_onus[1].channel_id = 1;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn voa_sets_preamp_power() {
        let mut c = quiet(&[2]);
        c.set_preamp_power(0, -40.0).unwrap();
        assert!((c.voa_db - 13.0).abs() < 1e-9);
        assert!(c.set_preamp_power(0, -20.0).is_err());
    }

    #[test]
    fn noiseless_three_onus_demodulate_cleanly() {
        let mut c = quiet(&[1, 2, 3]);
        c.set_preamp_power(0, -40.0).unwrap();
        let cap = scenario_run(&c).unwrap();
        assert_eq!(cap.waveform.center_offset(), 5e9);
        for (k, id) in [1, 2, 3].iter().enumerate() {
            let p = cap.applied_powers[id];
            assert!((p - c.nominal_preamp_power_dbm(k)).abs() < 0.05, "{id}: {p}");
            let (rx, _) = channel_demodulate(&cap, *id, &c.live_onus[k].tx).unwrap();
            let r = ber_count(&rx, &cap.per_onu_truth[id]).unwrap();
            assert_eq!(r.errors, 0, "channel {id}");
        }
    }

    #[test]
    fn capture_binary_roundtrip() {
        let c = quiet(&[-4]);
        let cap = scenario_run(&ScenarioConfig { n_symbols: 600, sim_rate: 4.9e9, ..c }).unwrap();
        let mut buf = Vec::new();
        cap.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"FDMPCAP\0");
        assert_eq!(buf.len(), 8 + 4 + 8 + 8 + 8 + 16 * cap.waveform.len());
        let back = UpstreamCapture::read_waveform(&buf[..]).unwrap();
        assert_eq!(back, cap.waveform);
    }
}
