//! Exact solutions, sub- and super-solution envelopes and the audit of a
//! converged field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conic_geometry::{dot, Conic, Point, WavePattern};
use crate::grid::{BoundarySource, Domain, ExtendedDomain, NodeKind, WedgeDomain};
use crate::solver::coefficients::ellipticity;
use crate::grid::ValueRef;
use crate::solver::{
    continuation_solve, solve_sparse, BoundaryData, Discretization, Problem, Schedule, SolveError, Solution,
};
use crate::thin_wing::{self, Sector};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("no admissible {0} envelope direction was sampled")]
    EmptyEnvelope(&'static str),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn lift(xi: Point) -> f64 {
    (1.0 + dot(xi, xi)).sqrt()
}

/// `eta . (xi, 1) / sqrt(1 + |xi|^2)`, an exact solution of the w-form.
pub fn exact_w(eta: [f64; 3], xi: Point) -> f64 {
    (eta[0] * xi[0] + eta[1] * xi[1] + eta[2]) / lift(xi)
}

pub fn exact_w_gradient(eta: [f64; 3], xi: Point) -> Point {
    let r = lift(xi);
    let w = exact_w(eta, xi);
    let r2 = r * r;
    [(r * eta[0] - w * xi[0]) / r2, (r * eta[1] - w * xi[1]) / r2]
}

/// `N_mu w` at one point from its value, gradient and Hessian.
pub fn w_operator(xi: Point, w: f64, grad: Point, hess: [f64; 3], mu: f64) -> f64 {
    let r2 = 1.0 + dot(xi, xi);
    let radial = dot(grad, xi);
    let a2 = w * w - 1.0 + r2 * (dot(grad, grad) + radial * radial);
    let m = [grad[0] + radial * xi[0], grad[1] + radial * xi[1]];
    let quad = |u: Point, v: Point| hess[0] * u[0] * v[0] + hess[1] * (u[0] * v[1] + u[1] * v[0]) + hess[2] * u[1] * v[1];
    a2 * (hess[0] + hess[2] + quad(xi, xi)) - mu * r2 * quad(m, m)
        + 2.0 * ((1.0 - mu) * a2 + mu * (w * w - 1.0)) * radial
        + ((2.0 - mu) * a2 + mu * (w * w - 1.0)) * w / r2
}

/// Discrete `N_mu w` at unknowns whose stencils are all centred; `None`
/// elsewhere.
pub fn w_equation_residual(disc: &Discretization, w: &[f64], boundary_w: &[f64], mu: f64) -> Vec<Option<f64>> {
    disc.grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, node)| {
            if !disc.stencils()[k].second_order {
                return None;
            }
            let j = disc.jet(k, w, boundary_w);
            Some(w_operator(node.xi, j.value, j.grad, j.hess, mu))
        })
        .collect()
}

/// Smooth random field of max-norm `amplitude` vanishing on the Dirichlet
/// boundary: the discrete Poisson solution for seeded uniform forcing.
pub fn smooth_perturbation(disc: &Discretization, amplitude: f64, seed: u64) -> Result<Vec<f64>, SolveError> {
    let n = disc.grid().unknown_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forcing: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let mut trip = Vec::new();
    for (k, s) in disc.stencils().iter().enumerate() {
        for combo in [&s.d11, &s.d22] {
            for &(r, w) in &combo.terms {
                if let ValueRef::Unknown(m) = r {
                    trip.push(faer::sparse::Triplet::new(k, m, -w));
                }
            }
        }
    }
    let u = solve_sparse(n, &trip, &forcing)?;
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(u.iter().map(|v| amplitude * v / peak).collect())
}

/// Observed convergence order from errors on meshes `ratio` apart.
pub fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// Region a field was computed on.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    Extended(&'a ExtendedDomain),
    Wedge(&'a WedgeDomain),
}

impl Region<'_> {
    pub fn pattern(&self) -> &WavePattern {
        match self {
            Region::Extended(d) => d.pattern(),
            Region::Wedge(d) => d.pattern(),
        }
    }

    pub fn dirichlet_boundary(&self, samples: usize) -> Vec<Point> {
        match self {
            Region::Extended(d) => d.dirichlet_boundary(samples),
            Region::Wedge(d) => d.dirichlet_boundary(samples),
        }
    }

    /// Samples of the Neumann lines, empty for the reflected flat region.
    pub fn neumann_boundary(&self, samples: usize) -> Vec<Point> {
        match self {
            Region::Extended(_) => Vec::new(),
            Region::Wedge(d) => {
                let p = d.pattern();
                let (a, b) = (p.points.p2, p.points.p4);
                (0..=samples)
                    .flat_map(|k| {
                        let t = k as f64 / samples as f64;
                        [[a[0] * t, a[1] * t], [b[0] * t, b[1] * t]]
                    })
                    .collect()
            }
        }
    }

    /// Bounding cone at `xi`, with `xi` and `grad` mapped into the physical
    /// quadrant.
    fn cone_at(&self, xi: Point, grad: Point) -> (Conic, Point, Point) {
        match self {
            Region::Extended(d) => {
                let f = d.fold(xi);
                let s = [
                    if xi[0] == 0.0 { 1.0 } else { f[0] / xi[0] },
                    if xi[1] == 0.0 { 1.0 } else { f[1] / xi[1] },
                ];
                let g = [grad[0] * s[0], grad[1] * s[1]];
                (*d.pattern().bounding_cone(f), f, g)
            }
            Region::Wedge(d) => (*d.pattern().bounding_cone(xi), xi, grad),
        }
    }

    fn upper_allowed(&self, eta: [f64; 3]) -> bool {
        match self {
            Region::Extended(_) => true,
            Region::Wedge(d) => thin_wing::sector(d.pattern(), eta) == Some(Sector::Outward),
        }
    }

    fn lower_needs_neumann(&self, eta: [f64; 3]) -> bool {
        match self {
            Region::Extended(_) => false,
            Region::Wedge(d) => thin_wing::sector(d.pattern(), eta) != Some(Sector::Inward),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeOptions {
    pub boundary_anchors: usize,
    pub interior_anchors: usize,
    pub random: usize,
    pub seed: u64,
    /// Boundary samples on which membership is tested.
    pub boundary_samples: usize,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { boundary_anchors: 64, interior_anchors: 256, random: 512, seed: 42, boundary_samples: 2048 }
    }
}

/// Finite families of exact solutions lying above or below the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelopes {
    pub upper: Vec<[f64; 3]>,
    pub lower: Vec<[f64; 3]>,
}

const SCALE_SLACK: f64 = 1e-12;

impl Envelopes {
    /// Directions come from anchors `xi0` via `(xi0, 1)`; each is scaled to
    /// the tightest member of the family on the sampled boundary.
    pub fn sample(
        region: &Region,
        data: &BoundaryData,
        eps: f64,
        interior: &[Point],
        opts: &EnvelopeOptions,
    ) -> Result<Self, VerifyError> {
        let dirichlet = region.dirichlet_boundary(opts.boundary_samples);
        let neumann = region.neumann_boundary(opts.boundary_samples / 4);
        let data_w = |b: Point| data.value(b, eps) / lift(b);
        let mut anchors: Vec<Point> = Vec::new();
        let bstep = (dirichlet.len() / opts.boundary_anchors.max(1)).max(1);
        anchors.extend(dirichlet.iter().step_by(bstep).take(opts.boundary_anchors));
        let istep = (interior.len() / opts.interior_anchors.max(1)).max(1);
        anchors.extend(interior.iter().step_by(istep).take(opts.interior_anchors));
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &dirichlet {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.random {
            let p = [0, 1].map(|k| {
                let (c, r) = (0.5 * (lo[k] + hi[k]), hi[k] - lo[k]);
                c + r * (rng.random::<f64>() * 2.0 - 1.0)
            });
            anchors.push(p);
        }

        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for a in anchors {
            let r = lift(a);
            let n = [a[0] / r, a[1] / r, 1.0 / r];
            let cosines = |pts: &[Point]| -> Vec<(f64, f64)> {
                pts.iter().map(|&b| (exact_w(n, b), data_w(b))).collect()
            };
            let on_dirichlet = cosines(&dirichlet);
            if region.upper_allowed(n) && on_dirichlet.iter().all(|&(c, _)| c > 0.0) {
                let s = on_dirichlet.iter().map(|&(c, d)| d / c).fold(0.0f64, f64::max);
                upper.push(n.map(|v| v * s * (1.0 + SCALE_SLACK)));
            }
            let mut checked = on_dirichlet;
            if region.lower_needs_neumann(n) {
                checked.extend(cosines(&neumann));
            }
            let s = checked
                .iter()
                .filter(|&&(c, _)| c > 0.0)
                .map(|&(c, d)| d / c)
                .fold(f64::INFINITY, f64::min);
            if s.is_finite() {
                lower.push(n.map(|v| v * s * (1.0 - SCALE_SLACK)));
            }
        }
        if upper.is_empty() {
            return Err(VerifyError::EmptyEnvelope("upper"));
        }
        if lower.is_empty() {
            return Err(VerifyError::EmptyEnvelope("lower"));
        }
        Ok(Self { upper, lower })
    }

    /// Largest violation of the defining boundary inequalities; positive
    /// values mean a member is on the wrong side of the data.
    pub fn self_check(&self, region: &Region, data: &BoundaryData, eps: f64, samples: usize) -> f64 {
        region
            .dirichlet_boundary(samples)
            .into_iter()
            .map(|b| {
                let d = data.value(b, eps) / lift(b);
                (d - self.upper_at(b)).max(self.lower_at(b) - d)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn upper_at(&self, xi: Point) -> f64 {
        self.upper.iter().map(|&e| exact_w(e, xi)).fold(f64::INFINITY, f64::min)
    }

    pub fn lower_at(&self, xi: Point) -> f64 {
        self.lower.iter().map(|&e| exact_w(e, xi)).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    /// Where the worst value occurred, when it belongs to a point.
    pub location: Option<Point>,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value <= limit, value, limit, location: None }
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value > limit, value, limit, location: None }
    }

    pub fn at(mut self, xi: Point) -> Self {
        self.location = Some(xi);
        self
    }
}

/// Running extremum with its location.
#[derive(Debug, Clone, Copy)]
struct Worst {
    value: f64,
    at: Point,
}

impl Worst {
    fn max() -> Self {
        Self { value: f64::NEG_INFINITY, at: [f64::NAN; 2] }
    }

    fn min() -> Self {
        Self { value: f64::INFINITY, at: [f64::NAN; 2] }
    }

    fn raise(&mut self, v: f64, at: Point) {
        if v > self.value {
            *self = Self { value: v, at };
        }
    }

    fn lower(&mut self, v: f64, at: Point) {
        if v < self.value {
            *self = Self { value: v, at };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<Check>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    /// Required gap below one of the squared pseudo-Mach number.
    pub ellipticity_gap: f64,
    pub sandwich: bool,
    pub sandwich_tolerance: f64,
    /// Allowed excess of the interior gradient maximum, in mesh widths.
    pub gradient_slack: f64,
    pub sonic_normal: bool,
    pub sonic_tolerance: f64,
    /// Shift of the boundary data for the comparison solve; off when `None`.
    pub comparison_shift: Option<f64>,
    pub envelope: EnvelopeOptions,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            ellipticity_gap: 1e-6,
            sandwich: true,
            sandwich_tolerance: 1e-3,
            gradient_slack: 5.0,
            sonic_normal: true,
            sonic_tolerance: 0.05,
            comparison_shift: None,
            envelope: EnvelopeOptions::default(),
        }
    }
}

/// Ratio of the normal velocity to the sound speed at each Dirichlet
/// crossing, using the gradient of the node the crossing belongs to.
pub fn sonic_ratios(problem: &Problem, solution: &Solution, region: &Region) -> Vec<(usize, f64)> {
    let grid = problem.disc.grid();
    grid.boundary()
        .iter()
        .enumerate()
        .filter_map(|(b, bp)| {
            let BoundarySource::Crossing { node, .. } = bp.source else { return None };
            let grad = problem.disc.jet(node, &solution.psi, &solution.boundary).grad;
            let psi = solution.boundary[b];
            let (cone, xi, p) = region.cone_at(bp.xi, grad);
            let chi = psi - dot(p, xi);
            let a2 = dot(p, p) + chi * chi - 1.0;
            if !(a2 > 0.0) {
                return Some((b, f64::INFINITY));
            }
            let g = cone.implicit_gradient(xi);
            let q = [p[0] - chi * xi[0], p[1] - chi * xi[1]];
            let gx = dot(g, xi);
            Some((b, dot(g, q).abs() / (a2.sqrt() * (dot(g, g) + gx * gx).sqrt())))
        })
        .collect()
}

/// Every enabled check appears once in the report; the comparison check
/// runs a second solve and is the only one that can error.
pub fn audit(
    problem: &Problem,
    solution: &Solution,
    region: &Region,
    opts: &AuditOptions,
) -> Result<AuditReport, VerifyError> {
    let disc = &problem.disc;
    let grid = disc.grid();
    let h = grid.h();
    let mut checks = Vec::new();

    let mut margin = Worst::min();
    let mut worst_l2 = Worst::max();
    let (mut grad_inner, mut grad_band) = (Worst::max(), Worst::max());
    let jets: Vec<_> = (0..grid.unknown_count()).map(|k| disc.jet(k, &solution.psi, &solution.boundary)).collect();
    for (node, j) in grid.nodes().iter().zip(&jets) {
        margin.lower(j.value - lift(node.xi), node.xi);
        worst_l2.raise(ellipticity(node.xi, j.value, j.grad), node.xi);
        let g = j.grad[0].hypot(j.grad[1]);
        match node.kind {
            NodeKind::Interior => grad_inner.raise(g, node.xi),
            _ => grad_band.raise(g, node.xi),
        }
    }
    checks.push(Check::above("supersonic_margin", margin.value, 0.0).at(margin.at));
    if let BoundaryData::Sonic { shift } = problem.data {
        let mut gap = Worst::min();
        for (b, v) in grid.boundary().iter().zip(&solution.boundary) {
            gap.lower(v - lift(b.xi), b.xi);
        }
        let expected = solution.eps + shift;
        checks.push(Check::above("boundary_lift", gap.value - expected, -1e-12 * (1.0 + expected)).at(gap.at));
    }
    checks.push(Check::at_most("ellipticity", worst_l2.value, 1.0 - opts.ellipticity_gap).at(worst_l2.at));
    checks.push(
        Check::at_most("gradient_maximum", grad_inner.value - grad_band.value, opts.gradient_slack * h)
            .at(grad_inner.at),
    );

    if opts.sandwich {
        let interior: Vec<Point> = grid.nodes().iter().map(|n| n.xi).collect();
        let env = Envelopes::sample(region, &problem.data, solution.eps, &interior, &opts.envelope)?;
        let mut violation = Worst::max();
        for (node, j) in grid.nodes().iter().zip(&jets) {
            let w = j.value / lift(node.xi);
            violation.raise((env.lower_at(node.xi) - w).max(w - env.upper_at(node.xi)), node.xi);
        }
        checks.push(Check::at_most("sandwich", violation.value, opts.sandwich_tolerance).at(violation.at));
    }

    if opts.sonic_normal && matches!(problem.data, BoundaryData::Sonic { .. }) {
        let mut worst = Worst::max();
        for (b, r) in sonic_ratios(problem, solution, region) {
            worst.raise((r - 1.0).abs(), grid.boundary()[b].xi);
        }
        checks.push(Check::at_most("sonic_normal", worst.value.max(0.0), opts.sonic_tolerance).at(worst.at));
    }

    if let Region::Wedge(d) = region {
        let flux = thin_wing::wing_flux(problem, solution, d.pattern(), 64);
        let scale = solution.psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        checks.push(Check::at_most("wing_flux", flux, 1e-6 * scale));
    }

    if let Some(shift) = opts.comparison_shift {
        let raised = Problem::new(disc.clone(), problem.data.shifted(shift));
        let upper = continuation_solve(&raised, &Schedule::down_to(solution.eps))?.solution;
        checks.push(ordered(solution, &upper, 1e-8));
    }
    Ok(AuditReport { checks })
}

/// Pointwise ordering `lower <= upper` within `tol`, on the same grid.
pub fn ordered(lower: &Solution, upper: &Solution, tol: f64) -> Check {
    let gap = lower.psi.iter().zip(&upper.psi).map(|(l, u)| u - l).fold(f64::INFINITY, f64::min);
    Check { name: "comparison".into(), passed: gap >= -tol, value: gap, limit: -tol, location: None }
}

/// Fields on a decreasing `eps` ladder must decrease pointwise.
pub fn eps_monotone(ladder: &[Solution], tol: f64) -> Check {
    let worst = ladder
        .windows(2)
        .map(|w| {
            debug_assert!(w[1].eps < w[0].eps);
            w[1].psi.iter().zip(&w[0].psi).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Check { name: "eps_monotone".into(), passed: worst <= tol, value: worst, limit: tol, location: None }
}

pub fn max_difference(a: &Solution, b: &Solution) -> f64 {
    a.psi.iter().zip(&b.psi).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
