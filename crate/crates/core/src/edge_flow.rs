//! Uniform states behind the planar waves attached to a swept leading edge.
//!
//! The wing lies in the plane `x1 = 0` (flat) or is a thin wedge of half-angle
//! `|theta|` about the root chord; its leading edge runs along
//! `(0, cos(sweep), sin(sweep))`. Velocity components along the edge are
//! continuous across the attached wave, so the jump is a two-dimensional
//! polar problem in the plane normal to the edge.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas::FreeStream;
use crate::polar::{self, PolarError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid wing parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("incidence outside the regime: {0}")]
    Regime(String),
    #[error("wave detached from the leading edge: {0}")]
    Detached(String),
    #[error(transparent)]
    Polar(#[from] PolarError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Windward side, where the stream is compressed by a shock.
    Shock,
    /// Leeward side, where the stream expands.
    Rarefaction,
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shock" => Ok(Side::Shock),
            "rarefaction" => Ok(Side::Rarefaction),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

/// Delta wing with leading-edge sweep and an optional wedge half-angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wing {
    sweep: f64,
    wedge: f64,
}

impl Wing {
    pub fn flat(sweep: f64) -> Result<Self, FlowError> {
        Self::thin(sweep, 0.0)
    }

    /// `wedge` is the signed surface slope angle, `<= 0` on the windward side.
    pub fn thin(sweep: f64, wedge: f64) -> Result<Self, FlowError> {
        if !(sweep.is_finite() && (0.0..FRAC_PI_2).contains(&sweep)) {
            return Err(FlowError::InvalidParameter { name: "sigma", value: sweep });
        }
        if !(wedge.is_finite() && wedge > -FRAC_PI_2 && wedge <= 0.0) {
            return Err(FlowError::InvalidParameter { name: "theta", value: wedge });
        }
        Ok(Self { sweep, wedge })
    }

    pub fn sweep(&self) -> f64 {
        self.sweep
    }

    pub fn wedge(&self) -> f64 {
        self.wedge
    }

    pub fn is_flat(&self) -> bool {
        self.wedge == 0.0
    }

    /// Wedge angle seen in the plane normal to the leading edge.
    pub fn normal_wedge(&self) -> f64 {
        (self.wedge.tan() / self.sweep.cos()).atan()
    }

    /// Unit vector along the leading edge.
    pub fn edge_direction(&self) -> [f64; 3] {
        let (s, c) = self.sweep.sin_cos();
        [0.0, c, s]
    }

    /// Unit vector in the wing plane normal to the edge, pointing downstream.
    pub fn chordwise_direction(&self) -> [f64; 3] {
        let (s, c) = self.sweep.sin_cos();
        [0.0, -s, c]
    }
}

/// Limiting incidences and sweeps of the attached-wave regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalAngles {
    /// Largest incidence admitting an attached shock.
    pub shock_incidence: f64,
    /// Largest incidence admitting an attached rarefaction.
    pub rarefaction_incidence: f64,
    /// Largest sweep with an attached shock, if the incidence allows one.
    pub shock_sweep: Option<f64>,
    /// Largest sweep with an attached rarefaction, if the incidence allows one.
    pub rarefaction_sweep: Option<f64>,
}

impl CriticalAngles {
    pub fn shock_sweep(&self) -> Result<f64, FlowError> {
        self.shock_sweep.ok_or_else(|| {
            FlowError::Regime(format!(
                "incidence must stay below {} for an attached shock",
                self.shock_incidence
            ))
        })
    }

    pub fn rarefaction_sweep(&self) -> Result<f64, FlowError> {
        self.rarefaction_sweep.ok_or_else(|| {
            FlowError::Regime(format!(
                "incidence must stay below {} for an attached rarefaction",
                self.rarefaction_incidence
            ))
        })
    }
}

pub fn critical_angles(fs: &FreeStream) -> CriticalAngles {
    let q = fs.speed();
    let c = fs.sound_speed();
    let alpha = fs.incidence();
    let axial = fs.velocity()[2];
    let shock_incidence = (c / q).asin();
    let rarefaction_incidence = (c / q).acos();
    let shock_sweep = (alpha > 0.0 && alpha < shock_incidence)
        .then(|| (fs.bernoulli().sqrt() / axial).min(1.0).asin());
    let rarefaction_sweep =
        (alpha > 0.0 && alpha < rarefaction_incidence).then(|| (c / axial).min(1.0).acos());
    CriticalAngles { shock_incidence, rarefaction_incidence, shock_sweep, rarefaction_sweep }
}

/// The free stream seen in the plane normal to the leading edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedIncidence {
    pub speed: f64,
    pub incidence: f64,
    pub wave_angle: f64,
}

pub fn projected_incidence(fs: &FreeStream, wing: &Wing) -> Result<ProjectedIncidence, FlowError> {
    let [v1, _, v3] = fs.velocity();
    let cs = wing.sweep().cos();
    let speed = (v1 * v1 + (v3 * cs).powi(2)).sqrt();
    let incidence = (fs.incidence().tan() / cs).atan();
    let c = fs.sound_speed();
    if speed <= c {
        return Err(FlowError::Detached(format!(
            "normal Mach number {} does not exceed one",
            speed / c
        )));
    }
    Ok(ProjectedIncidence { speed, incidence, wave_angle: (c / speed).asin() })
}

/// Uniform state between the planar wave and the wing surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownstreamState {
    pub side: Side,
    /// Velocity in the wing-fixed frame.
    pub velocity: [f64; 3],
    /// Speed normal to the edge just behind the wave.
    pub normal_speed: f64,
    pub sound_speed: f64,
}

pub fn downstream_state(fs: &FreeStream, wing: &Wing, side: Side) -> Result<DownstreamState, FlowError> {
    let proj = projected_incidence(fs, wing)?;
    let c = fs.sound_speed();
    let turn = match side {
        Side::Shock => proj.incidence - wing.normal_wedge(),
        Side::Rarefaction => {
            if !wing.is_flat() {
                return Err(FlowError::Regime(
                    "the leeward side is only modelled for flat wings".into(),
                ));
            }
            -proj.incidence
        }
    };
    let jumped = polar::deflect(proj.speed, c, turn)?;
    let normal_speed = jumped.speed();
    let theta_n = wing.normal_wedge();
    let edge = wing.edge_direction();
    let chord = wing.chordwise_direction();
    let along_edge = fs.velocity()[2] * wing.sweep().sin();
    let (sn, cn) = theta_n.sin_cos();
    let mut velocity = [0.0; 3];
    for k in 0..3 {
        velocity[k] = along_edge * edge[k] + normal_speed * cn * chord[k];
    }
    velocity[0] += normal_speed * sn;
    let speed_sq: f64 = velocity.iter().map(|v| v * v).sum();
    let sound_speed = (speed_sq - fs.bernoulli()).max(0.0).sqrt();
    Ok(DownstreamState { side, velocity, normal_speed, sound_speed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideRegime {
    Attached,
    /// Sweep equals the critical sweep; the wave degenerates to a cone.
    Critical,
    Detached,
    /// Incidence outside the range where the side is modelled.
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attachment {
    pub shock: SideRegime,
    pub rarefaction: SideRegime,
}

/// Absolute tolerance when comparing a sweep with its critical value.
pub const SWEEP_TOLERANCE: f64 = 1e-12;

fn side_regime(limit: Option<f64>, sweep: f64) -> SideRegime {
    match limit {
        None => SideRegime::Invalid,
        Some(s0) if (sweep - s0).abs() <= SWEEP_TOLERANCE => SideRegime::Critical,
        Some(s0) if sweep < s0 => SideRegime::Attached,
        Some(_) => SideRegime::Detached,
    }
}

pub fn attachment(fs: &FreeStream, wing: &Wing) -> Attachment {
    let crit = critical_angles(fs);
    let mut shock = side_regime(crit.shock_sweep, wing.sweep());
    if !wing.is_flat() && shock == SideRegime::Attached && downstream_state(fs, wing, Side::Shock).is_err() {
        shock = SideRegime::Detached;
    }
    let rarefaction = if wing.is_flat() {
        side_regime(crit.rarefaction_sweep, wing.sweep())
    } else {
        SideRegime::Invalid
    };
    Attachment { shock, rarefaction }
}
