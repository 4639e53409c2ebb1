//! Experiment configuration files.
//!
//! A config file is TOML. It must declare `schema_version = 1`; everything
//! else is optional and overrides either the built-in defaults or a named
//! preset. Tables merge key by key and arrays replace wholesale. Unknown
//! keys are rejected, and every schema error names the offending field.
//!
//! ```toml
//! schema_version = 1
//! preset = "fig4-center"
//! seed = 7
//! live_channels = [1, 2, 3]
//!
//! [scenario]
//! n_symbols = 16384
//!
//! [sweep]
//! powers_dbm = [-48.0, -46.0, -44.0, -42.0, -40.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{DummyBankSpec, OnuInstance, ScenarioConfig, ScmQamConfig};
use crate::locking::LockConfig;
use crate::metrics::{channel_freq, channel_grid, FecThresholds};
use crate::photonics::CombSpec;

pub const SCHEMA_VERSION: u32 = 1;

pub const PRESETS: [&str; 7] =
    ["fig4-center", "fig4-edge", "channel-sweep", "dispersion", "lock-demo", "spectrum", "isolation"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Root of every random stream in a run.
    pub seed: u64,
    /// Shorthand for `scenario.live_onus`: reference ONUs 0, 1, 2 on these
    /// channels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub live_channels: Option<Vec<i32>>,
    pub scenario: ScenarioConfig,
    pub fec: FecThresholds,
    pub sweep: SweepConfig,
    pub channel_sweep: ChannelSweepConfig,
    pub lock: LockDemoConfig,
    pub spectrum: SpectrumConfig,
}

/// BER against preamp input power for every live ONU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub powers_dbm: Vec<f64>,
}

/// Sensitivity across the grid, one ONU retuned channel by channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSweepConfig {
    /// Explicit channel list. Empty means every `stride`-th grid position
    /// from channel -32.
    pub channels: Vec<i32>,
    pub stride: usize,
    pub powers_dbm: Vec<f64>,
    pub sim_rate: f64,
    /// Repeat the sweep with the receiver roll-off disabled.
    pub compare_rolloff: bool,
    /// Repeat the sweep with fibre dispersion disabled.
    pub compare_dispersion: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockDemoConfig {
    pub target_channel: i32,
    /// Initial laser detunings from the target line, Hz.
    pub detunings_hz: Vec<f64>,
    pub comb: CombSpec,
    #[serde(rename = "loop")]
    pub loop_cfg: LockConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Wide enough to hold the whole 160 GHz grid.
    pub sim_rate: f64,
    pub n_symbols: usize,
    pub nfft: usize,
    /// Comb as received at an ONU.
    pub comb: CombSpec,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { powers_dbm: power_grid(-50.0, -36.0, 1.0) }
    }
}

impl Default for ChannelSweepConfig {
    fn default() -> Self {
        ChannelSweepConfig {
            channels: Vec::new(),
            stride: 8,
            powers_dbm: power_grid(-48.0, -37.0, 1.0),
            sim_rate: 4.9e9,
            compare_rolloff: true,
            compare_dispersion: false,
        }
    }
}

impl Default for LockDemoConfig {
    fn default() -> Self {
        LockDemoConfig {
            target_channel: 5,
            detunings_hz: vec![0.0, 1e9, 1.5e9],
            comb: CombSpec::default(),
            loop_cfg: LockConfig::default(),
        }
    }
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            sim_rate: 200e9,
            n_symbols: 4096,
            nfft: 16384,
            comb: CombSpec { per_line_power_dbm: -20.0, ..CombSpec::default() },
        }
    }
}

impl Default for Config {
    fn default() -> Self {
        Config {
            schema_version: SCHEMA_VERSION,
            preset: None,
            seed: 1,
            live_channels: None,
            scenario: ScenarioConfig::default(),
            fec: FecThresholds::default(),
            sweep: SweepConfig::default(),
            channel_sweep: ChannelSweepConfig::default(),
            lock: LockDemoConfig::default(),
            spectrum: SpectrumConfig::default(),
        }
    }
}

/// `lo, lo + step, ...` up to and including `hi`.
pub fn power_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn reference_onus(channels: &[i32]) -> Result<Vec<OnuInstance>> {
    channels.iter().enumerate().map(|(k, &c)| OnuInstance::reference(k % 3, c)).collect()
}

/// Dummy bank around a live band, one comb line per empty grid slot.
pub fn dummy_bank(notch_center: f64, notch_width: f64, line_power_dbm: f64) -> DummyBankSpec {
    let mut drive = ScmQamConfig::default();
    drive.prbs.seed = 0x2aaa;
    DummyBankSpec {
        comb: CombSpec { notch_center, notch_width, per_line_power_dbm: line_power_dbm, ..CombSpec::default() },
        drive,
        cspr_db: 14.0,
    }
}

/// Built-in configuration for a named preset.
pub fn preset(name: &str) -> Result<Config> {
    let mut c = Config { preset: Some(name.to_string()), ..Config::default() };
    match name {
        "fig4-center" => c.scenario.live_onus = reference_onus(&[1, 2, 3])?,
        "fig4-edge" => c.scenario.live_onus = reference_onus(&[29, 30, 31])?,
        "channel-sweep" => {}
        "dispersion" => {
            c.channel_sweep.channels = vec![-32, 32];
            c.channel_sweep.compare_rolloff = false;
            c.channel_sweep.compare_dispersion = true;
        }
        "lock-demo" => c.lock.loop_cfg.coarse_tec = false,
        "spectrum" => {
            c.scenario.live_onus = reference_onus(&[1, 2, 3])?;
            c.scenario.dummy = Some(dummy_bank(5e9, 30e9, -3.0));
        }
        "isolation" => {
            // every in-window neighbour of channel 10 carries a dummy at the
            // ONU's own launch power
            c.scenario.live_onus = reference_onus(&[10])?;
            c.scenario.sim_rate = 19.6e9;
            c.scenario.dummy = Some(dummy_bank(25e9, 2.5e9, -3.0));
        }
        other => {
            return Err(Error::config(format!("unknown preset `{other}` (known: {})", PRESETS.join(", "))));
        }
    }
    Ok(c)
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_table() && v.is_table() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

fn schema_error(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::config(format!("schema v{SCHEMA_VERSION}: `{path}`: {msg}"))
}

impl Config {
    /// Parse config text. `preset_override` replaces any `preset` key in
    /// the file.
    pub fn from_toml_str(text: &str, preset_override: Option<&str>) -> Result<Config> {
        let user: toml::Value = text.parse::<toml::Table>().map(toml::Value::Table).map_err(|e| {
            Error::config(format!("TOML syntax: {}", e.message().trim()))
        })?;
        match user.get("schema_version") {
            None => return Err(schema_error("schema_version", "missing (expected 1)")),
            Some(toml::Value::Integer(v)) if *v == SCHEMA_VERSION as i64 => {}
            Some(v) => return Err(schema_error("schema_version", format!("unsupported version {v} (expected 1)"))),
        }
        let name = match (preset_override, user.get("preset")) {
            (Some(p), _) => Some(p.to_string()),
            (None, Some(toml::Value::String(p))) => Some(p.clone()),
            (None, Some(_)) => return Err(schema_error("preset", "expected a string")),
            (None, None) => None,
        };
        let base_cfg = match &name {
            Some(n) => preset(n)?,
            None => Config::default(),
        };
        let mut base = toml::Value::try_from(&base_cfg).map_err(|e| Error::config(e.to_string()))?;
        let user_sets_onus = user.get("scenario").and_then(|s| s.get("live_onus")).is_some();
        if user_sets_onus && user.get("live_channels").is_some() {
            return Err(schema_error("live_channels", "conflicts with scenario.live_onus"));
        }
        merge(&mut base, user);
        if let (Some(n), toml::Value::Table(t)) = (&name, &mut base) {
            t.insert("preset".into(), toml::Value::String(n.clone()));
        }
        let mut cfg: Config = serde_path_to_error::deserialize(base).map_err(|e| {
            let path = e.path().to_string();
            schema_error(&path, e.into_inner().message().trim())
        })?;
        if let Some(ch) = cfg.live_channels.take() {
            cfg.scenario.live_onus = reference_onus(&ch).map_err(|e| schema_error("live_channels", e))?;
            cfg.live_channels = Some(ch);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, preset_override: Option<&str>) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, preset_override)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(schema_error("schema_version", format!("unsupported version {}", self.schema_version)));
        }
        self.scenario.validate().map_err(|e| schema_error("scenario", e))?;
        self.fec.validate().map_err(|e| schema_error("fec", e))?;
        check_powers("sweep.powers_dbm", &self.sweep.powers_dbm)?;
        check_powers("channel_sweep.powers_dbm", &self.channel_sweep.powers_dbm)?;
        for &c in &self.channel_sweep.channels {
            channel_freq(c).map_err(|e| schema_error("channel_sweep.channels", e))?;
        }
        if self.channel_sweep.stride == 0 {
            return Err(schema_error("channel_sweep.stride", "must be at least 1"));
        }
        if !(self.channel_sweep.sim_rate > 0.0) {
            return Err(schema_error("channel_sweep.sim_rate", "must be positive"));
        }
        self.lock.loop_cfg.validate().map_err(|e| schema_error("lock.loop", e))?;
        self.lock.comb.validate().map_err(|e| schema_error("lock.comb", e))?;
        if self.lock.detunings_hz.iter().any(|d| !d.is_finite()) {
            return Err(schema_error("lock.detunings_hz", "must be finite"));
        }
        if self.spectrum.nfft < 16 || self.spectrum.n_symbols == 0 || !(self.spectrum.sim_rate > 0.0) {
            return Err(schema_error("spectrum", "nfft >= 16, n_symbols > 0 and sim_rate > 0 required"));
        }
        self.spectrum.comb.validate().map_err(|e| schema_error("spectrum.comb", e))
    }

    /// Channels visited by the channel sweep.
    pub fn sweep_channels(&self) -> Vec<i32> {
        if !self.channel_sweep.channels.is_empty() {
            return self.channel_sweep.channels.clone();
        }
        channel_grid().into_iter().step_by(self.channel_sweep.stride).collect()
    }
}

fn check_powers(path: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(schema_error(path, "empty power grid"));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(schema_error(path, "powers must be finite"));
    }
    let mut s = p.to_vec();
    s.sort_by(f64::total_cmp);
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(schema_error(path, "duplicate power"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config> {
        Config::from_toml_str(text, None)
    }

    #[test]
    fn minimal_file_gives_defaults() {
        let c = parse("schema_version = 1").unwrap();
        assert_eq!(c, Config::default());
    }

    #[test]
    fn fec_defaults_survive_round_trip() {
        let c = parse("schema_version = 1").unwrap();
        assert_eq!(c.fec.hd, 4.4e-3);
        assert_eq!(c.fec.sd, 2e-2);
        let text = c.to_toml_string().unwrap();
        let back = parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.fec.hd, 4.4e-3);
        assert_eq!(back.fec.sd, 2e-2);
    }

    #[test]
    fn every_preset_round_trips() {
        for name in PRESETS {
            let p = preset(name).unwrap();
            p.validate().unwrap();
            let back = parse(&p.to_toml_string().unwrap()).unwrap();
            assert_eq!(back, p, "{name}");
        }
    }

    #[test]
    fn preset_channels() {
        let c = Config::from_toml_str("schema_version = 1", Some("fig4-center")).unwrap();
        assert_eq!(c.scenario.live_channels(), vec![1, 2, 3]);
        let c = parse("schema_version = 1\npreset = \"fig4-edge\"").unwrap();
        assert_eq!(c.scenario.live_channels(), vec![29, 30, 31]);
    }

    #[test]
    fn nested_override_keeps_siblings() {
        let c = parse("schema_version = 1\n[scenario.preamp]\nnoise_figure_db = 6.0").unwrap();
        assert_eq!(c.scenario.preamp.noise_figure_db, 6.0);
        assert_eq!(c.scenario.preamp.gain_db, 30.0);
    }

    #[test]
    fn live_channel_shorthand() {
        let c = parse("schema_version = 1\nlive_channels = [6, 7]").unwrap();
        assert_eq!(c.scenario.live_channels(), vec![6, 7]);
        assert_eq!(c.scenario.live_onus[1], OnuInstance::reference(1, 7).unwrap());
    }

    #[test]
    fn stride_eight_visits_eight_channels() {
        let c = Config::default();
        assert_eq!(c.sweep_channels(), vec![-32, -24, -16, -8, 1, 9, 17, 25]);
    }

    fn config_error(r: Result<Config>) -> String {
        match r {
            Err(Error::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        let m = config_error(parse("schema_version = 1\n[scenario.preamp]\ngain = 3"));
        assert!(m.contains("scenario.preamp") && m.contains("gain"), "{m}");
        let m = config_error(parse("schema_version = 1\n[sweep]\npowers_dbm = []"));
        assert!(m.contains("sweep.powers_dbm") && m.contains("empty power grid"), "{m}");
        let m = config_error(parse("schema_version = 1\n[fec]\nhd = \"x\""));
        assert!(m.contains("fec.hd"), "{m}");
        let m = config_error(parse("schema_version = 1\nbogus = 2"));
        assert!(m.contains("bogus"), "{m}");
    }

    #[test]
    fn version_is_required_and_checked() {
        assert!(config_error(parse("seed = 3")).contains("schema_version"));
        assert!(config_error(parse("schema_version = 2")).contains("unsupported"));
    }

    #[test]
    fn unknown_preset_and_bad_syntax() {
        assert!(config_error(parse("schema_version = 1\npreset = \"nope\"")).contains("unknown preset"));
        assert!(config_error(parse("schema_version = = 1")).contains("TOML"));
    }

    #[test]
    fn shorthand_conflicts_with_explicit_onus() {
        let mut v = toml::Value::try_from(Config::default()).unwrap();
        v.as_table_mut().unwrap().insert("live_channels".into(), toml::Value::Array(vec![toml::Value::Integer(2)]));
        let m = config_error(parse(&toml::to_string(&v).unwrap()));
        assert!(m.contains("conflicts"), "{m}");
    }

    #[test]
    fn thresholds_out_of_order_rejected() {
        let m = config_error(parse("schema_version = 1\n[fec]\nhd = 0.03"));
        assert!(m.contains("fec"), "{m}");
    }
}
