use fdm_pon::locking::{acquire_lock, LockConfig};
use fdm_pon::photonics::{CombSpec, LaserSpec};
use fdm_pon::Error;

const TARGET: i32 = 4;

/// Comb line the loop ends on, starting `detuning` from the target.
fn settle(detuning: f64, cfg: &LockConfig, seed: u64) -> (i32, f64) {
    let comb = CombSpec::default();
    let laser = LaserSpec::onu(comb.line_offset(TARGET) + detuning);
    match acquire_lock(&laser, &LaserSpec::olt(), &comb, TARGET, cfg, seed) {
        Ok(s) => (s.settled_channel, s.residual),
        Err(Error::Mislock { settled, state, .. }) => (settled, state.residual),
        Err(e) => panic!("{detuning}: {e}"),
    }
}

#[test]
fn capture_range_splits_at_half_the_spacing() {
    let cfg = LockConfig { noise: false, coarse_tec: false, ..Default::default() };
    let spacing = CombSpec::default().spacing;
    for step in [-11, -6, -1, 0, 1, 6, 11] {
        let d = step as f64 * 0.1e9;
        let (ch, residual) = settle(d, &cfg, 10);
        assert_eq!(ch, TARGET, "{d} Hz");
        assert!(residual.abs() < cfg.lock_threshold, "{d} Hz: residual {residual}");
    }
    for step in [14, 18, 23] {
        for sign in [1.0, -1.0] {
            let d = sign * step as f64 * 0.1e9;
            let (ch, residual) = settle(d, &cfg, 11);
            assert_eq!(ch, TARGET + sign as i32, "{d} Hz");
            assert!((residual - sign * spacing).abs() < cfg.lock_threshold, "{d} Hz: residual {residual}");
        }
    }
}

#[test]
fn coarse_tuning_extends_capture() {
    let cfg = LockConfig { noise: false, ..Default::default() };
    for d in [1.5e9, -2.0e9, 6.0e9] {
        assert_eq!(settle(d, &cfg, 12).0, TARGET, "{d} Hz");
    }
}

#[test]
fn residual_grows_with_linewidth() {
    let rms = |linewidth: f64| {
        let comb = CombSpec::default();
        let laser = LaserSpec { linewidth, ..LaserSpec::onu(comb.line_offset(TARGET)) };
        let cfg = LockConfig { hold_steps: 150, ..Default::default() };
        let s = acquire_lock(&laser, &LaserSpec::olt(), &comb, TARGET, &cfg, 21).unwrap();
        s.residual_rms(10)
    };
    let narrow = rms(30e3);
    let wide = rms(3e6);
    assert!(narrow < wide, "30 kHz: {narrow} Hz, 3 MHz: {wide} Hz");
}
