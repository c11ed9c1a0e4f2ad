//! Flat `key = value` case files and their validation.

use std::path::{Path, PathBuf};

use conical_chaplygin::edge_flow::{Side, Wing};
use conical_chaplygin::gas::{FreeStream, Gas};
use conical_chaplygin::solver::Schedule;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Grid resolution, as a mesh width or a node count across the region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Resolution {
    Step(f64),
    Across(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseConfig {
    pub case: String,
    pub stiffness: f64,
    pub rho_star: f64,
    pub rho_inf: f64,
    pub q_inf: f64,
    pub alpha_deg: f64,
    pub sigma_deg: f64,
    pub theta_deg: f64,
    pub side: Side,
    pub resolution: Resolution,
    pub eps_min: f64,
    pub mu_steps: Option<Vec<f64>>,
    pub eps_steps: Option<Vec<f64>>,
    pub max_refinements: Option<usize>,
    pub newton_tolerance: Option<f64>,
    pub comparison_shift: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for CaseConfig {
    fn default() -> Self {
        Self {
            case: "reference".into(),
            stiffness: 1.0,
            rho_star: 0.5,
            rho_inf: 1.0,
            q_inf: 2.0,
            alpha_deg: 10.0,
            sigma_deg: 30.0,
            theta_deg: 0.0,
            side: Side::Shock,
            resolution: Resolution::Step(0.01),
            eps_min: 1e-3,
            mu_steps: None,
            eps_steps: None,
            max_refinements: None,
            newton_tolerance: None,
            comparison_shift: None,
            seed: 42,
            out: PathBuf::from("."),
        }
    }
}

fn invalid(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key} = {value:?}: {why}"))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| invalid(key, value, e))).collect()
}

impl CaseConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        let real = || value.parse::<f64>().map_err(|e| invalid(key, value, e));
        match key.trim() {
            "case" => self.case = value.to_string(),
            "A" | "stiffness" => self.stiffness = real()?,
            "rho_star" => self.rho_star = real()?,
            "rho_inf" => self.rho_inf = real()?,
            "q_inf" => self.q_inf = real()?,
            "alpha_deg" => self.alpha_deg = real()?,
            "sigma_deg" => self.sigma_deg = real()?,
            "theta_deg" => self.theta_deg = real()?,
            "side" => self.side = value.parse().map_err(|e| invalid(key, value, e))?,
            "h" => self.resolution = Resolution::Step(real()?),
            "n" => self.resolution = Resolution::Across(value.parse().map_err(|e| invalid(key, value, e))?),
            "eps_min" => self.eps_min = real()?,
            "mu_steps" => self.mu_steps = Some(list(key, value)?),
            "eps_steps" => self.eps_steps = Some(list(key, value)?),
            "max_refinements" => {
                self.max_refinements = Some(value.parse().map_err(|e| invalid(key, value, e))?)
            }
            "newton_tolerance" => self.newton_tolerance = Some(real()?),
            "comparison_shift" => self.comparison_shift = Some(real()?),
            "seed" => self.seed = value.parse().map_err(|e| invalid(key, value, e))?,
            "out" => self.out = PathBuf::from(value),
            other => return Err(CliError::Validation(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a case file; `[section]` headers and `#`/`;` comments are
    /// ignored.
    pub fn load(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with(['#', ';']) || line.starts_with('[') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn free_stream(&self) -> Result<FreeStream, CliError> {
        let gas = Gas::new(self.stiffness, self.rho_star).map_err(validation)?;
        FreeStream::new(gas, self.rho_inf, self.q_inf, self.alpha_deg.to_radians()).map_err(validation)
    }

    pub fn wing(&self) -> Result<Wing, CliError> {
        let sweep = self.sigma_deg.to_radians();
        if self.theta_deg == 0.0 {
            Wing::flat(sweep)
        } else {
            Wing::thin(sweep, self.theta_deg.to_radians())
        }
        .map_err(validation)
    }

    pub fn schedule(&self) -> Schedule {
        let mut s = Schedule::down_to(self.eps_min);
        if let Some(mu) = &self.mu_steps {
            s.mu_steps = mu.clone();
        }
        if let Some(eps) = &self.eps_steps {
            s.eps_steps = eps.clone();
        }
        if let Some(m) = self.max_refinements {
            s.max_refinements = m;
        }
        if let Some(t) = self.newton_tolerance {
            s.newton.tolerance = t;
        }
        s
    }

    /// Checks everything that can be checked without building a grid.
    pub fn validate(&self) -> Result<(), CliError> {
        self.free_stream()?;
        self.wing()?;
        if self.theta_deg != 0.0 && self.side != Side::Shock {
            return Err(CliError::Validation("thin wings are solved on the shock side only".into()));
        }
        match self.resolution {
            Resolution::Step(h) if !(h.is_finite() && h > 0.0) => {
                return Err(invalid("h", &h.to_string(), "must be positive"))
            }
            Resolution::Across(0) => return Err(invalid("n", "0", "must be positive")),
            _ => {}
        }
        if !(self.eps_min.is_finite() && self.eps_min > 0.0) {
            return Err(invalid("eps_min", &self.eps_min.to_string(), "must be positive"));
        }
        self.schedule().validate().map_err(validation)?;
        Ok(())
    }
}

pub fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}
