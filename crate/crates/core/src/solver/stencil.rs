//! Finite-difference stencils on the lattice and the discrete operator.

use faer::sparse::Triplet;

use super::coefficients::{coefficient_jet, coefficients};
use crate::conic_geometry::Point;
use crate::grid::{Combo, Grid, NodeKind, ValueRef, DIAGONALS};

/// Derivative stencils at one unknown, each a combination that includes the
/// centre value.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStencil {
    pub d1: Combo,
    pub d2: Combo,
    pub d11: Combo,
    pub d12: Combo,
    pub d22: Combo,
    /// Every stencil is centred to second order.
    pub second_order: bool,
}

/// Value, gradient and Hessian `(h11, h12, h22)` at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Point,
    pub hess: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Grid,
    stencils: Vec<NodeStencil>,
}

fn axis_stencils(centre: ValueRef, h: f64, plus: (&Combo, f64), minus: (&Combo, f64)) -> (Combo, Combo) {
    let (fp, a) = plus;
    let (fm, b) = minus;
    let mut d1 = Combo::default();
    d1.add_scaled(fp, b / (h * a * (a + b)));
    d1.add_scaled(fm, -a / (h * b * (a + b)));
    d1.push(centre, (a - b) / (h * a * b));
    let mut d2 = Combo::default();
    d2.add_scaled(fp, 2.0 / (h * h * a * (a + b)));
    d2.add_scaled(fm, 2.0 / (h * h * b * (a + b)));
    d2.push(centre, -2.0 / (h * h * a * b));
    (d1.compact(), d2.compact())
}

impl Discretization {
    pub fn new(grid: Grid) -> Self {
        let h = grid.h();
        let stencils = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, node)| {
                let centre = ValueRef::Unknown(k);
                let arm = |a: usize| (&node.arms[a].value, node.arms[a].fraction);
                let (d1, d11) = axis_stencils(centre, h, arm(0), arm(2));
                let (d2, d22) = axis_stencils(centre, h, arm(1), arm(3));
                let quadrants: Vec<Option<Combo>> = DIAGONALS
                    .iter()
                    .enumerate()
                    .map(|(q, d)| {
                        let xa = if d[0] > 0 { 0 } else { 2 };
                        let ya = if d[1] > 0 { 1 } else { 3 };
                        let diag = node.diagonals[q].as_ref()?;
                        if node.arms[xa].fraction != 1.0 || node.arms[ya].fraction != 1.0 {
                            return None;
                        }
                        let w = (d[0] * d[1]) as f64 / (h * h);
                        let mut c = Combo::default();
                        c.add_scaled(diag, w);
                        c.add_scaled(&node.arms[xa].value, -w);
                        c.add_scaled(&node.arms[ya].value, -w);
                        c.push(centre, w);
                        Some(c)
                    })
                    .collect();
                // opposite quadrants cancel the first-order error
                let pairs: Vec<&Combo> = [(0, 2), (1, 3)]
                    .iter()
                    .filter_map(|&(a, b)| match (&quadrants[a], &quadrants[b]) {
                        (Some(x), Some(y)) => Some([x, y]),
                        _ => None,
                    })
                    .flatten()
                    .collect();
                let second_order = !pairs.is_empty() && node.kind == NodeKind::Interior;
                let chosen: Vec<&Combo> =
                    if pairs.is_empty() { quadrants.iter().flatten().collect() } else { pairs };
                let mut d12 = Combo::default();
                for c in &chosen {
                    d12.add_scaled(c, 1.0 / chosen.len() as f64);
                }
                let d12 = d12.compact();
                NodeStencil { d1, d2, d11, d12, d22, second_order }
            })
            .collect();
        Self { grid, stencils }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn stencils(&self) -> &[NodeStencil] {
        &self.stencils
    }

    pub fn jet(&self, k: usize, psi: &[f64], boundary: &[f64]) -> Jet {
        let s = &self.stencils[k];
        Jet {
            value: psi[k],
            grad: [s.d1.eval(psi, boundary), s.d2.eval(psi, boundary)],
            hess: [s.d11.eval(psi, boundary), s.d12.eval(psi, boundary), s.d22.eval(psi, boundary)],
        }
    }

    /// Discrete `F(mu, psi)` at every unknown.
    pub fn residual(&self, psi: &[f64], boundary: &[f64], mu: f64) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, node)| {
                let j = self.jet(k, psi, boundary);
                coefficients(node.xi, j.value, j.grad, mu).apply(j.hess)
            })
            .collect()
    }

    /// Exact Jacobian of [`Self::residual`] with respect to the unknowns.
    pub fn jacobian(&self, psi: &[f64], boundary: &[f64], mu: f64) -> Vec<Triplet<usize, usize, f64>> {
        let mut out = Vec::with_capacity(self.stencils.len() * 16);
        for (k, node) in self.grid.nodes().iter().enumerate() {
            let j = self.jet(k, psi, boundary);
            let jet = coefficient_jet(node.xi, j.value, j.grad, mu);
            let c = jet.value;
            let contract = |d: [f64; 3]| d[0] * j.hess[0] + 2.0 * d[1] * j.hess[1] + d[2] * j.hess[2];
            let s = &self.stencils[k];
            let parts = [
                (&s.d11, c.a11),
                (&s.d12, 2.0 * c.a12),
                (&s.d22, c.a22),
                (&s.d1, contract(jet.d_p1)),
                (&s.d2, contract(jet.d_p2)),
            ];
            for (combo, w) in parts {
                for &(r, v) in &combo.terms {
                    if let ValueRef::Unknown(m) = r {
                        out.push(Triplet::new(k, m, w * v));
                    }
                }
            }
            out.push(Triplet::new(k, k, contract(jet.d_psi)));
        }
        out
    }

    /// Matrix and right-hand side of `(I + xi xi^T) : D^2 psi = 0`.
    pub fn linear_system(&self, boundary: &[f64]) -> (Vec<Triplet<usize, usize, f64>>, Vec<f64>) {
        let mut trip = Vec::with_capacity(self.stencils.len() * 10);
        let mut rhs = vec![0.0; self.stencils.len()];
        for (k, node) in self.grid.nodes().iter().enumerate() {
            let x = node.xi;
            let s = &self.stencils[k];
            let parts = [(&s.d11, 1.0 + x[0] * x[0]), (&s.d12, 2.0 * x[0] * x[1]), (&s.d22, 1.0 + x[1] * x[1])];
            for (combo, w) in parts {
                for &(r, v) in &combo.terms {
                    match r {
                        ValueRef::Unknown(m) => trip.push(Triplet::new(k, m, w * v)),
                        ValueRef::Boundary(b) => rhs[k] -= w * v * boundary[b],
                    }
                }
            }
        }
        (trip, rhs)
    }
}
