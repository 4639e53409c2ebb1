use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static thermoelectric tuning: the emission moves linearly with
/// temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TecModel {
    pub temperature: f64,
    /// Hz per degree C.
    pub coeff: f64,
    /// Width of the allowed temperature window, degrees C.
    pub range: f64,
    /// Lower edge of the window.
    pub min_temperature: f64,
    /// Setting granularity, degrees C.
    pub resolution: f64,
}

impl Default for TecModel {
    fn default() -> Self {
        TecModel {
            temperature: 25.0,
            coeff: 160e9 / 13.0,
            range: 13.0,
            min_temperature: 18.5,
            resolution: 0.01,
        }
    }
}

impl TecModel {
    pub fn max_temperature(&self) -> f64 {
        self.min_temperature + self.range
    }

    /// Quantised temperature step that moves the emission by about `df`.
    pub fn step_for(&self, df: f64) -> f64 {
        let dt = df / self.coeff;
        if self.resolution > 0.0 {
            (dt / self.resolution).round() * self.resolution
        } else {
            dt
        }
    }
}

/// Change the temperature by `delta_t`; returns the resulting frequency
/// change.
pub fn tec_tune(tec: &mut TecModel, delta_t: f64) -> Result<f64> {
    let t = tec.temperature + delta_t;
    let eps = 1e-9;
    if t < tec.min_temperature - eps || t > tec.max_temperature() + eps {
        return Err(Error::range(format!(
            "TEC temperature {t:.2} C outside [{:.2}, {:.2}] C",
            tec.min_temperature,
            tec.max_temperature()
        )));
    }
    tec.temperature = t;
    Ok(tec.coeff * delta_t)
}
