//! Thin delta wings: a wedge of small half-angle about the root chord.
//!
//! Everything is computed in the frame rotated about `x2` so that the root
//! chord becomes the `x3` axis. There the root chord sits at the origin of
//! the conical plane and both the symmetry plane and the wing surface are
//! lines through it, carrying homogeneous Neumann conditions.

use crate::conic_geometry::{build_pattern, dot, GeometryError, Point, WavePattern};
use crate::edge_flow::{FlowError, Side, Wing};
use crate::gas::FreeStream;
use crate::grid::WedgeDomain;
use crate::solver::{Problem, Solution};

/// Left side of the attachment inequality; the wing is admissible when it
/// stays below the free-stream sound speed.
pub fn admissibility_margin(fs: &FreeStream, wing: &Wing) -> f64 {
    let q = fs.speed();
    let alpha = fs.incidence();
    let tn = wing.normal_wedge();
    fs.sound_speed() - (q * (alpha - tn).sin() + q * alpha.cos() * tn.sin() * (1.0 - wing.sweep().cos()))
}

pub fn admissible(fs: &FreeStream, wing: &Wing) -> bool {
    admissibility_margin(fs, wing) > 0.0
}

/// Windward pattern of a thin wing, in the rotated frame.
pub fn pattern(fs: &FreeStream, wing: &Wing) -> Result<WavePattern, GeometryError> {
    if !admissible(fs, wing) {
        return Err(FlowError::Regime(format!(
            "wedge {} at incidence {} violates the attachment inequality",
            wing.wedge(),
            fs.incidence()
        ))
        .into());
    }
    build_pattern(fs, wing, Side::Shock)
}

pub fn domain(fs: &FreeStream, wing: &Wing) -> Result<WedgeDomain, GeometryError> {
    Ok(WedgeDomain::new(pattern(fs, wing)?))
}

/// Interior angle of the elliptic region at the root chord.
pub fn corner_angle(pattern: &WavePattern) -> f64 {
    dot(pattern.symmetry_direction, pattern.wing_direction).clamp(-1.0, 1.0).acos()
}

/// Sector of the projection `(eta1, eta2)` of an exact-solution vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Between the wing ray and the symmetry ray, across the elliptic region.
    Inward,
    /// Opposite sector, pointing away from both Neumann lines.
    Outward,
}

/// Sector of `eta`, or `None` if its projection lies in neither.
pub fn sector(pattern: &WavePattern, eta: [f64; 3]) -> Option<Sector> {
    let e = [eta[0], eta[1]];
    let ns = pattern.symmetry_normal();
    let nw = pattern.wing_normal();
    let (a, b) = (dot(e, ns), dot(e, nw));
    if a > 0.0 && b > 0.0 {
        Some(Sector::Outward)
    } else if a < 0.0 && b < 0.0 {
        Some(Sector::Inward)
    } else {
        None
    }
}

/// Largest normal derivative of the even extension across the wing,
/// sampled on `samples` points between the root chord and the downstream
/// cone.
pub fn wing_flux(problem: &Problem, solution: &Solution, pattern: &WavePattern, samples: usize) -> f64 {
    let grid = problem.disc.grid();
    let delta = 0.5 * grid.h();
    let n = pattern.wing_normal();
    let end = pattern.points.p4;
    let mut worst = 0.0f64;
    for k in 1..samples {
        let t = k as f64 / samples as f64;
        let s = [end[0] * t, end[1] * t];
        let out = [s[0] + delta * n[0], s[1] + delta * n[1]];
        let inn = [s[0] - delta * n[0], s[1] - delta * n[1]];
        if let (Some(a), Some(b)) = (
            grid.sample(out, &solution.psi, &solution.boundary),
            grid.sample(inn, &solution.psi, &solution.boundary),
        ) {
            worst = worst.max(((a - b) / (2.0 * delta)).abs());
        }
    }
    worst
}

/// Discrete gradient at the root-chord node.
pub fn corner_gradient(problem: &Problem, solution: &Solution) -> Option<Point> {
    let grid = problem.disc.grid();
    match grid.slot([0, 0]) {
        crate::grid::Slot::Unknown(k) => Some(problem.disc.jet(k, &solution.psi, &solution.boundary).grad),
        _ => None,
    }
}
