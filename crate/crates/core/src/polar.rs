//! Oblique shock and rarefaction polar for a Chaplygin gas.
//!
//! A uniform stream of speed `u0` and sound speed `c0` is turned through the
//! angle `alpha`; positive angles compress, negative angles expand.

use thiserror::Error;

/// Relative slack when deciding whether a turn sits on a limiting angle.
pub const LIMIT_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarError {
    #[error("invalid polar input `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("upstream speed {speed} is not supersonic (sound speed {sound})")]
    Subsonic { speed: f64, sound: f64 },
    #[error("turn {alpha} reaches the concentration limit {limit}")]
    Concentration { alpha: f64, limit: f64 },
    #[error("turn {alpha} reaches the cavitation limit {limit}")]
    Cavitation { alpha: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarRegime {
    Regular,
    Concentration,
    Cavitation,
}

/// State behind the wave, in the frame aligned with the upstream velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectedState {
    /// Velocity component along the upstream direction.
    pub along: f64,
    /// Velocity component normal to the upstream direction.
    pub across: f64,
    pub sound_speed: f64,
}

impl DeflectedState {
    pub fn speed(&self) -> f64 {
        self.along.hypot(self.across)
    }
}

fn check_inputs(u0: f64, c0: f64) -> Result<(), PolarError> {
    if !(c0.is_finite() && c0 > 0.0) {
        return Err(PolarError::InvalidParameter { name: "c0", value: c0 });
    }
    if !u0.is_finite() {
        return Err(PolarError::InvalidParameter { name: "u0", value: u0 });
    }
    if u0 <= c0 {
        return Err(PolarError::Subsonic { speed: u0, sound: c0 });
    }
    Ok(())
}

/// Angle of the wave relative to the upstream direction, `asin(c0/u0)`.
pub fn wave_angle(u0: f64, c0: f64) -> Result<f64, PolarError> {
    check_inputs(u0, c0)?;
    Ok((c0 / u0).asin())
}

pub fn classify(u0: f64, c0: f64, alpha: f64) -> Result<PolarRegime, PolarError> {
    check_inputs(u0, c0)?;
    if !(alpha.is_finite() && alpha.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(PolarError::InvalidParameter { name: "alpha", value: alpha });
    }
    let threshold = c0 * (1.0 - LIMIT_SLACK);
    if alpha > 0.0 && u0 * alpha.sin() >= threshold {
        Ok(PolarRegime::Concentration)
    } else if alpha < 0.0 && u0 * alpha.cos() <= c0 * (1.0 + LIMIT_SLACK) {
        Ok(PolarRegime::Cavitation)
    } else {
        Ok(PolarRegime::Regular)
    }
}

/// Turn a supersonic stream through `alpha` radians.
pub fn deflect(u0: f64, c0: f64, alpha: f64) -> Result<DeflectedState, PolarError> {
    let beta = wave_angle(u0, c0)?;
    match classify(u0, c0, alpha)? {
        PolarRegime::Concentration => {
            return Err(PolarError::Concentration { alpha, limit: beta });
        }
        PolarRegime::Cavitation => {
            return Err(PolarError::Cavitation { alpha, limit: beta - std::f64::consts::FRAC_PI_2 });
        }
        PolarRegime::Regular => {}
    }
    let s = (u0 * u0 - c0 * c0).sqrt();
    let t = alpha.tan();
    let denom = s + c0 * t;
    let along = u0 * s / denom;
    Ok(DeflectedState {
        along,
        across: along * t,
        sound_speed: s * (c0 - t * s) / denom,
    })
}
