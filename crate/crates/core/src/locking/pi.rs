use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete PI controller with clamped output and integrator hold while
/// saturated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiController {
    /// Hz per Hz.
    pub kp: f64,
    /// Hz per (Hz s).
    pub ki: f64,
    #[serde(default)]
    pub integrator: f64,
    #[serde(default)]
    pub setpoint: f64,
    pub output_limit: f64,
}

impl PiController {
    /// Gains placing a double closed-loop pole at z = 0.3 for a loop that
    /// applies each correction on the next measurement.
    pub fn critically_damped(loop_rate: f64) -> Self {
        PiController { kp: 0.4, ki: 0.49 * loop_rate, integrator: 0.0, setpoint: 0.0, output_limit: 5e9 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.output_limit > 0.0) || !self.kp.is_finite() || !self.ki.is_finite() {
            return Err(Error::invalid("PI gains must be finite and the output limit positive"));
        }
        Ok(())
    }

    /// `error` is the measured value; the controller acts on
    /// `error - setpoint`. Returns the correction.
    pub fn step(&mut self, error: f64, dt: f64) -> f64 {
        debug_assert!(dt > 0.0);
        let e = error - self.setpoint;
        let u = self.kp * e + self.integrator;
        let lim = self.output_limit;
        if u.abs() > lim {
            return u.clamp(-lim, lim);
        }
        self.integrator = (self.integrator + self.ki * e * dt).clamp(-lim, lim);
        u
    }
}

pub fn pi_step(ctrl: &PiController, error: f64, dt: f64) -> Result<(PiController, f64)> {
    if !(dt > 0.0) {
        return Err(Error::invalid("PI step needs dt > 0"));
    }
    let mut c = ctrl.clone();
    let u = c.step(error, dt);
    Ok((c, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctrl(kp: f64, ki: f64, limit: f64) -> PiController {
        PiController { kp, ki, integrator: 0.0, setpoint: 0.0, output_limit: limit }
    }

    #[test]
    fn zero_error_returns_integrator() {
        let c = PiController { integrator: 3e6, ..ctrl(0.5, 10.0, 1e9) };
        let (c2, u) = pi_step(&c, 0.0, 1e-5).unwrap();
        assert_eq!(u, 3e6);
        assert_eq!(c2.integrator, 3e6);
    }

    #[test]
    fn pure_integration() {
        let mut c = ctrl(0.0, 1.0, 1e9);
        for _ in 0..10 {
            c.step(1e6, 1e-3);
        }
        assert!((c.integrator - 1e4).abs() < 1e-6);
    }

    #[test]
    fn saturation_clamps_and_freezes() {
        let mut c = ctrl(1.0, 1e5, 1e6);
        c.step(1e5, 1e-5);
        let frozen = c.integrator;
        for _ in 0..5 {
            assert_eq!(c.step(1e8, 1e-5), 1e6);
            assert_eq!(c.integrator, frozen);
        }
        // no hangover once the error flips
        let u = c.step(-1e5, 1e-5);
        assert!(u.abs() < 1e6);
    }

    #[test]
    fn bad_dt() {
        assert!(pi_step(&ctrl(1.0, 1.0, 1.0), 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn doubling_gains_doubles_corrections(errs in prop::collection::vec(-1e6f64..1e6, 1..40)) {
            let mut a = ctrl(0.3, 2e4, 1e12);
            let mut b = ctrl(0.6, 4e4, 1e12);
            for e in errs {
                let ua = a.step(e, 1e-5);
                let ub = b.step(e, 1e-5);
                prop_assert!((ub - 2.0 * ua).abs() <= 1e-9 * ua.abs().max(1.0));
            }
        }
    }
}
