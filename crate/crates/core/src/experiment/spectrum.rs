use std::path::Path;

use super::create;
use super::plot::{line_plot, Axes, Series};
use crate::config::Config;
use crate::dsp::fft::welch_psd;
use crate::error::Result;
use crate::link::{upstream_at_preamp, ScmQamConfig};
use crate::photonics::{comb_generate, LaserSpec, OpticalField};
use crate::seed;

/// Optical power spectral densities, frequencies relative to the LO.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub freqs: Vec<f64>,
    /// Comb as it reaches an ONU, W/Hz.
    pub comb: Vec<f64>,
    /// Aggregated upstream at the OLT preamp input, W/Hz.
    pub upstream: Vec<f64>,
}

fn psd(field: &OpticalField, nfft: usize) -> (Vec<f64>, Vec<f64>) {
    let (f, p) = welch_psd(&field.envelope, field.sample_rate, nfft);
    (f.into_iter().map(|x| x + field.ref_offset).collect(), p)
}

/// Comb and upstream spectra over the whole grid.
pub fn spectrum(cfg: &Config) -> Result<SpectrumReport> {
    let sp = &cfg.spectrum;
    let root = seed::derive(cfg.seed, "spectrum");
    let n = (sp.n_symbols as f64 * sp.sim_rate / ScmQamConfig::default().baud).floor() as usize;
    let comb = comb_generate(&LaserSpec::olt(), &sp.comb, n, sp.sim_rate, 0.0, seed::derive(root, "comb"))?;

    let mut scenario = cfg.scenario.clone();
    scenario.sim_rate = sp.sim_rate;
    scenario.sim_center = Some(0.0);
    scenario.n_symbols = sp.n_symbols;
    scenario.rng_seed = seed::derive(root, "upstream");
    let upstream = upstream_at_preamp(&scenario)?.field;

    let (freqs, comb_psd) = psd(&comb, sp.nfft);
    let (_, up_psd) = psd(&upstream, sp.nfft);
    Ok(SpectrumReport { freqs, comb: comb_psd, upstream: up_psd })
}

fn dbm_per_hz(p: f64) -> f64 {
    10.0 * p.log10() + 30.0
}

fn write_psd(dir: &Path, name: &str, freqs: &[f64], psd: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(dir, name)?);
    w.write_record(["freq_ghz", "psd_dbm_per_hz"])?;
    for (f, p) in freqs.iter().zip(psd) {
        w.write_record([format!("{:.6}", f / 1e9), format!("{:.3}", dbm_per_hz(*p))])?;
    }
    w.flush()?;
    Ok(())
}

/// `spectrum_comb.csv`, `spectrum_upstream.csv` and one SVG for each.
/// Zero power is written as `-inf`.
pub fn write_spectrum(report: &SpectrumReport, dir: &Path) -> Result<Vec<String>> {
    let mut files = Vec::new();
    for (name, psd, title) in [
        ("spectrum_comb", &report.comb, "Comb at the ONU"),
        ("spectrum_upstream", &report.upstream, "Upstream at the OLT preamp input"),
    ] {
        write_psd(dir, &format!("{name}.csv"), &report.freqs, psd)?;
        let pts = report.freqs.iter().zip(psd.iter()).map(|(f, p)| (f / 1e9, dbm_per_hz(*p))).collect();
        line_plot(
            &dir.join(format!("{name}.svg")),
            &Axes { title, x_label: "offset from LO (GHz)", y_label: "PSD (dBm/Hz)", log_y: false },
            &[Series::line("PSD", pts)],
        )?;
        files.push(format!("{name}.csv"));
        files.push(format!("{name}.svg"));
    }
    Ok(files)
}
