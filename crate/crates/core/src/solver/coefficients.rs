//! Pointwise coefficients of the homotopy operator and their derivatives.
//!
//! With `chi = psi - p . xi`, `q = p - chi xi` and `a2 = |p|^2 + chi^2 - 1`,
//! the operator is `A : D^2 psi` where
//! `A = a2 (I + xi xi^T) - mu q q^T`.

use crate::conic_geometry::Point;

/// Lower bound applied to `a2` while iterating.
pub const SOUND_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    /// Squared scaled sound speed, after flooring.
    pub sound_sq: f64,
}

impl Coefficients {
    pub fn apply(&self, hess: [f64; 3]) -> f64 {
        self.a11 * hess[0] + 2.0 * self.a12 * hess[1] + self.a22 * hess[2]
    }
}

/// Coefficients together with their partial derivatives with respect to
/// `psi`, `p1` and `p2`, each stored as `(a11, a12, a22)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientJet {
    pub value: Coefficients,
    pub d_psi: [f64; 3],
    pub d_p1: [f64; 3],
    pub d_p2: [f64; 3],
}

pub fn pseudo_velocity(xi: Point, psi: f64, grad: Point) -> [f64; 2] {
    let chi = psi - grad[0] * xi[0] - grad[1] * xi[1];
    [grad[0] - chi * xi[0], grad[1] - chi * xi[1]]
}

/// Unfloored `|p|^2 + chi^2 - 1`.
pub fn sound_sq(xi: Point, psi: f64, grad: Point) -> f64 {
    let chi = psi - grad[0] * xi[0] - grad[1] * xi[1];
    grad[0] * grad[0] + grad[1] * grad[1] + chi * chi - 1.0
}

pub fn coefficients(xi: Point, psi: f64, grad: Point, mu: f64) -> Coefficients {
    coefficient_jet(xi, psi, grad, mu).value
}

pub fn coefficient_jet(xi: Point, psi: f64, grad: Point, mu: f64) -> CoefficientJet {
    let chi = psi - grad[0] * xi[0] - grad[1] * xi[1];
    let q = [grad[0] - chi * xi[0], grad[1] - chi * xi[1]];
    let raw = grad[0] * grad[0] + grad[1] * grad[1] + chi * chi - 1.0;
    let floored = raw < SOUND_FLOOR;
    let a2 = if floored { SOUND_FLOOR } else { raw };
    let (da_psi, da_p) = if floored { (0.0, [0.0, 0.0]) } else { (2.0 * chi, [2.0 * q[0], 2.0 * q[1]]) };
    let m = [1.0 + xi[0] * xi[0], xi[0] * xi[1], 1.0 + xi[1] * xi[1]];
    let value = Coefficients {
        a11: a2 * m[0] - mu * q[0] * q[0],
        a12: a2 * m[1] - mu * q[0] * q[1],
        a22: a2 * m[2] - mu * q[1] * q[1],
        sound_sq: a2,
    };
    // derivative of (a11, a12, a22) given da2 and dq
    let diff = |da: f64, dq: [f64; 2]| {
        [
            da * m[0] - mu * 2.0 * q[0] * dq[0],
            da * m[1] - mu * (dq[0] * q[1] + q[0] * dq[1]),
            da * m[2] - mu * 2.0 * q[1] * dq[1],
        ]
    };
    let d_psi = diff(da_psi, [-xi[0], -xi[1]]);
    let d_p1 = diff(da_p[0], [1.0 + xi[0] * xi[0], xi[1] * xi[0]]);
    let d_p2 = diff(da_p[1], [xi[0] * xi[1], 1.0 + xi[1] * xi[1]]);
    CoefficientJet { value, d_psi, d_p1, d_p2 }
}

/// Squared pseudo-Mach number of the full equation; below one is elliptic.
pub fn ellipticity(xi: Point, psi: f64, grad: Point) -> f64 {
    let a2 = sound_sq(xi, psi, grad);
    if !(a2 > 0.0) {
        return f64::INFINITY;
    }
    (a2 + 1.0 - psi * psi / (1.0 + xi[0] * xi[0] + xi[1] * xi[1])) / a2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_matches_finite_differences() {
        let xi = [0.2, -0.3];
        let (psi, g) = (1.4, [0.1, 0.25]);
        let mu = 0.7;
        let jet = coefficient_jet(xi, psi, g, mu);
        let flat = |c: Coefficients| [c.a11, c.a12, c.a22];
        let e = 1e-6;
        let fd = |f: &dyn Fn(f64) -> Coefficients| {
            let (p, m) = (flat(f(e)), flat(f(-e)));
            [(p[0] - m[0]) / (2.0 * e), (p[1] - m[1]) / (2.0 * e), (p[2] - m[2]) / (2.0 * e)]
        };
        let d_psi = fd(&|t| coefficients(xi, psi + t, g, mu));
        let d_p1 = fd(&|t| coefficients(xi, psi, [g[0] + t, g[1]], mu));
        let d_p2 = fd(&|t| coefficients(xi, psi, [g[0], g[1] + t], mu));
        for k in 0..3 {
            assert!((jet.d_psi[k] - d_psi[k]).abs() < 1e-8);
            assert!((jet.d_p1[k] - d_p1[k]).abs() < 1e-8);
            assert!((jet.d_p2[k] - d_p2[k]).abs() < 1e-8);
        }
    }
}
