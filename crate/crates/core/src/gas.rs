//! Chaplygin gas state relations and the uniform supersonic free stream.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GasError {
    #[error("invalid gas parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("free stream is not supersonic: speed {speed} <= sound speed {sound}")]
    Subsonic { speed: f64, sound: f64 },
    #[error("speed squared {speed_sq} does not exceed the Bernoulli constant {bernoulli}")]
    BelowBernoulli { speed_sq: f64, bernoulli: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<f64, GasError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GasError::InvalidParameter { name, value })
    }
}

/// Chaplygin gas with pressure `p = A (1/rho_ref - 1/rho)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gas {
    stiffness: f64,
    reference_density: f64,
}

impl Gas {
    pub fn new(stiffness: f64, reference_density: f64) -> Result<Self, GasError> {
        Ok(Self {
            stiffness: positive("A", stiffness)?,
            reference_density: positive("rho_ref", reference_density)?,
        })
    }

    /// The constant `A` of the state law.
    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    pub fn reference_density(&self) -> f64 {
        self.reference_density
    }

    pub fn pressure(&self, density: f64) -> f64 {
        self.stiffness * (1.0 / self.reference_density - 1.0 / density)
    }

    pub fn sound_speed(&self, density: f64) -> f64 {
        self.stiffness.sqrt() / density
    }

    pub fn density_for_sound_speed(&self, sound: f64) -> f64 {
        self.stiffness.sqrt() / sound
    }
}

/// Uniform supersonic stream approaching the wing at incidence `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeStream {
    gas: Gas,
    density: f64,
    speed: f64,
    incidence: f64,
}

impl FreeStream {
    /// `incidence` is in radians and must lie in `(0, pi/2)`.
    pub fn new(gas: Gas, density: f64, speed: f64, incidence: f64) -> Result<Self, GasError> {
        let density = positive("rho_inf", density)?;
        let speed = positive("q_inf", speed)?;
        if !(incidence > 0.0 && incidence < std::f64::consts::FRAC_PI_2) {
            return Err(GasError::InvalidParameter { name: "alpha", value: incidence });
        }
        let sound = gas.sound_speed(density);
        if speed <= sound {
            return Err(GasError::Subsonic { speed, sound });
        }
        Ok(Self { gas, density, speed, incidence })
    }

    /// Stream with `A = 1`, `rho_inf = 1`, so the sound speed is one.
    pub fn normalized(speed: f64, incidence: f64) -> Result<Self, GasError> {
        Self::new(Gas::new(1.0, 0.5)?, 1.0, speed, incidence)
    }

    pub fn gas(&self) -> Gas {
        self.gas
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn incidence(&self) -> f64 {
        self.incidence
    }

    pub fn sound_speed(&self) -> f64 {
        self.gas.sound_speed(self.density)
    }

    /// `q^2 - c^2`, shared by every state of the flow.
    pub fn bernoulli(&self) -> f64 {
        let c = self.sound_speed();
        self.speed * self.speed - c * c
    }

    /// Free-stream velocity `(q sin(alpha), 0, q cos(alpha))`.
    pub fn velocity(&self) -> [f64; 3] {
        let (s, c) = self.incidence.sin_cos();
        [self.speed * s, 0.0, self.speed * c]
    }

    /// Density of a state with squared speed `speed_sq`.
    pub fn density_at(&self, speed_sq: f64) -> Result<f64, GasError> {
        let bernoulli = self.bernoulli();
        if !(speed_sq > bernoulli) {
            return Err(GasError::BelowBernoulli { speed_sq, bernoulli });
        }
        Ok(self.gas.stiffness.sqrt() / (speed_sq - bernoulli).sqrt())
    }

    /// Sound speed of a state with squared speed `speed_sq`.
    pub fn sound_speed_at(&self, speed_sq: f64) -> Result<f64, GasError> {
        let bernoulli = self.bernoulli();
        if !(speed_sq > bernoulli) {
            return Err(GasError::BelowBernoulli { speed_sq, bernoulli });
        }
        Ok((speed_sq - bernoulli).sqrt())
    }
}
