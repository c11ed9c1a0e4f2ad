mod common;

use approx::assert_relative_eq;
use conical_chaplygin::gas::{FreeStream, Gas, GasError};
use conical_chaplygin::polar::{classify, deflect, wave_angle, PolarError, PolarRegime};
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn sound_speed_examples() {
    assert_eq!(Gas::new(1.0, 1.0).unwrap().sound_speed(1.0), 1.0);
    assert_eq!(Gas::new(4.0, 1.0).unwrap().sound_speed(2.0), 1.0);
    assert_eq!(Gas::new(1.0, 1.0).unwrap().sound_speed(0.5), 2.0);
}

#[test]
fn pressure_examples() {
    assert_eq!(Gas::new(1.0, 1.0).unwrap().pressure(1.0), 0.0);
    assert_relative_eq!(Gas::new(1.0, 1.0).unwrap().pressure(2.0), 0.5, max_relative = 1e-15);
    assert_relative_eq!(Gas::new(2.0, 1.0).unwrap().pressure(4.0), 1.5, max_relative = 1e-15);
}

#[test]
fn invalid_gas_is_rejected() {
    assert!(Gas::new(0.0, 1.0).is_err());
    assert!(Gas::new(1.0, -1.0).is_err());
}

#[test]
fn bernoulli_density_examples() {
    let fs = FreeStream::normalized(2.0, 0.1).unwrap();
    assert_relative_eq!(fs.bernoulli(), 3.0, max_relative = 1e-15);
    assert_relative_eq!(fs.density_at(4.0).unwrap(), 1.0, max_relative = 1e-15);
    assert_relative_eq!(fs.density_at(3.25).unwrap(), 2.0, max_relative = 1e-14);
    assert!(matches!(fs.density_at(3.0), Err(GasError::BelowBernoulli { .. })));
}

#[test]
fn incidence_outside_range_is_rejected() {
    assert!(FreeStream::normalized(2.0, 0.0).is_err());
    assert!(FreeStream::normalized(2.0, PI / 2.0).is_err());
}

#[test]
fn wave_angle_examples() {
    assert_relative_eq!(wave_angle(2.0, 1.0).unwrap(), PI / 6.0, max_relative = 1e-15);
    assert_relative_eq!(wave_angle(2f64.sqrt(), 1.0).unwrap(), PI / 4.0, max_relative = 1e-15);
    assert!(wave_angle(1.0, 1.0).is_err());
}

#[test]
fn deflection_examples() {
    let s = deflect(2.0, 1.0, 0.0).unwrap();
    assert_eq!((s.along, s.across, s.sound_speed), (2.0, 0.0, 1.0));

    let s = deflect(2.0, 1.0, 10f64.to_radians()).unwrap();
    assert!(common::rel(s.along, 1.815206) < 1e-5);
    assert!(common::rel(s.across, 0.320072) < 1e-5);
    assert!(common::rel(s.sound_speed, 0.630416) < 1e-5);

    let s = deflect(2.0, 1.0, (-10f64).to_radians()).unwrap();
    assert!(common::rel(s.along, 2.226680) < 1e-5);
    assert!(common::rel(s.across, -0.392624) < 1e-5);
    assert!(common::rel(s.sound_speed, 1.453352) < 1e-5);
}

#[test]
fn classification_examples() {
    assert_eq!(classify(2.0, 1.0, 30f64.to_radians()).unwrap(), PolarRegime::Concentration);
    assert_eq!(classify(2.0, 1.0, 10f64.to_radians()).unwrap(), PolarRegime::Regular);
    assert_eq!(classify(2.0, 1.0, (-60f64).to_radians()).unwrap(), PolarRegime::Cavitation);
    assert!(matches!(deflect(2.0, 1.0, PI / 6.0), Err(PolarError::Concentration { .. })));
    assert!(matches!(deflect(2.0, 1.0, -PI / 3.0), Err(PolarError::Cavitation { .. })));
}

#[test]
fn limits_approach_degenerate_states() {
    let beta = wave_angle(2.0, 1.0).unwrap();
    assert!(deflect(2.0, 1.0, beta - 1e-6).unwrap().sound_speed < 1e-4);
    assert!(deflect(2.0, 1.0, beta - PI / 2.0 + 1e-6).unwrap().sound_speed > 1e4);
    let c: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|d| deflect(2.0, 1.0, beta - d).unwrap().sound_speed).collect();
    assert!(c[0] > c[1] && c[1] > c[2]);
}

proptest! {
    #[test]
    fn sound_speed_times_density_is_root_stiffness(a in 0.1f64..10.0, rho in 1e-3f64..1e3) {
        let gas = Gas::new(a, 1.0).unwrap();
        prop_assert!(common::rel(gas.sound_speed(rho) * rho, a.sqrt()) < 1e-14);
    }

    #[test]
    fn pressure_rises_and_sound_speed_falls(r1 in 1e-3f64..1e3, f in 1.001f64..10.0) {
        let gas = Gas::new(1.3, 0.7).unwrap();
        prop_assert!(gas.pressure(r1 * f) > gas.pressure(r1));
        prop_assert!(gas.sound_speed(r1 * f) < gas.sound_speed(r1));
    }

    #[test]
    fn free_stream_round_trips(q in 1.01f64..5.0, alpha in 0.01f64..1.5) {
        let fs = FreeStream::normalized(q, alpha).unwrap();
        prop_assert!(common::rel(fs.density_at(q * q).unwrap(), fs.density()) < 1e-13);
    }

    #[test]
    fn post_wave_circle_touches_wave_line(u0 in 1.05f64..6.0, c0 in 0.2f64..2.0, t in 0.01f64..0.99) {
        let u0 = u0 * c0;
        let beta = wave_angle(u0, c0).unwrap();
        // spans both the compressive and the expansive branch
        let alpha = beta - t * PI / 2.0;
        let s = deflect(u0, c0, alpha).unwrap();
        let (sb, cb) = beta.sin_cos();
        prop_assert!(common::rel((s.along * sb - s.across * cb).abs(), s.sound_speed) < 1e-10);
        // the tangential component is untouched, so the state lies on the
        // normal half-line through the upstream tangency point
        prop_assert!(common::rel(s.along * cb + s.across * sb, u0 * cb) < 1e-10);
        if alpha != 0.0 {
            prop_assert!(common::rel(s.across / s.along, alpha.tan()) < 1e-9);
        }
        if alpha > 0.0 {
            prop_assert!(s.sound_speed < c0);
        } else {
            prop_assert!(s.sound_speed > c0);
        }
    }
}
