//! Damped Newton solver with continuation in the homotopy parameter `mu`
//! and the boundary lift `eps`.

pub mod coefficients;
pub mod stencil;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use log::{debug, info};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic_geometry::Point;
use crate::grid::{BoundaryPoint, GridError};
pub use stencil::{Discretization, Jet, NodeStencil};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid continuation schedule: {0}")]
    InvalidSchedule(String),
    #[error("Newton failed at mu = {mu}, eps = {eps} after {iterations} iterations (residual {residual:e})")]
    NonConvergence { mu: f64, eps: f64, iterations: usize, residual: f64 },
    #[error("sparse factorisation failed: {0}")]
    Linear(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Dirichlet data on the sonic boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryData {
    /// `sqrt(1 + |xi|^2) + eps + shift`.
    Sonic { shift: f64 },
    /// Trace of the exact solution `eta . (xi, 1)`; ignores `eps`.
    Linear { eta: [f64; 3] },
}

impl BoundaryData {
    pub fn value(&self, xi: Point, eps: f64) -> f64 {
        match *self {
            BoundaryData::Sonic { shift } => (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt() + eps + shift,
            BoundaryData::Linear { eta } => eta[0] * xi[0] + eta[1] * xi[1] + eta[2],
        }
    }

    /// The same data raised by a constant.
    pub fn shifted(&self, by: f64) -> Self {
        match *self {
            BoundaryData::Sonic { shift } => BoundaryData::Sonic { shift: shift + by },
            BoundaryData::Linear { eta } => BoundaryData::Linear { eta: [eta[0], eta[1], eta[2] + by] },
        }
    }

    fn eps_slope(&self) -> f64 {
        match self {
            BoundaryData::Sonic { .. } => 1.0,
            BoundaryData::Linear { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub disc: Discretization,
    pub data: BoundaryData,
}

impl Problem {
    pub fn new(disc: Discretization, data: BoundaryData) -> Self {
        Self { disc, data }
    }

    pub fn boundary_values(&self, eps: f64) -> Vec<f64> {
        self.disc.grid().boundary().iter().map(|b: &BoundaryPoint| self.data.value(b.xi, eps)).collect()
    }

    pub fn h(&self) -> f64 {
        self.disc.grid().h()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Bound on `h^2 |F|_inf`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping_min: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 50, damping_min: 2f64.powi(-20) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub mu_steps: Vec<f64>,
    pub eps_steps: Vec<f64>,
    pub newton: NewtonOptions,
    /// Step bisections allowed over the whole run.
    pub max_refinements: usize,
}

pub const DEFAULT_MU_STEPS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
pub const DEFAULT_EPS_STEPS: [f64; 7] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

impl Default for Schedule {
    fn default() -> Self {
        Self {
            mu_steps: DEFAULT_MU_STEPS.to_vec(),
            eps_steps: DEFAULT_EPS_STEPS.to_vec(),
            newton: NewtonOptions::default(),
            max_refinements: 10,
        }
    }
}

impl Schedule {
    /// Default ladder cut off at `eps_min`, which becomes the last rung.
    pub fn down_to(eps_min: f64) -> Self {
        let mut s = Self::default();
        s.eps_steps.retain(|&e| e > eps_min * (1.0 + 1e-12));
        s.eps_steps.push(eps_min);
        s
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::InvalidSchedule(m.into()));
        let mu = &self.mu_steps;
        if mu.is_empty() || mu[0] != 0.0 || *mu.last().unwrap() != 1.0 {
            return bad("mu steps must start at 0 and end at 1");
        }
        if mu.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("mu steps must increase");
        }
        let eps = &self.eps_steps;
        if eps.is_empty() || eps.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
            return bad("eps steps must be positive");
        }
        if eps.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("eps steps must decrease");
        }
        let n = &self.newton;
        if !(n.tolerance > 0.0 && n.max_iterations > 0 && n.damping_min > 0.0 && n.damping_min <= 1.0) {
            return bad("Newton options out of range");
        }
        Ok(())
    }
}

/// Converged discrete field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Values at the unknown nodes.
    pub psi: Vec<f64>,
    /// Dirichlet values at the grid boundary points.
    pub boundary: Vec<f64>,
    pub mu: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub mu: f64,
    pub eps: f64,
    pub iteration: usize,
    /// `h^2 |F|_inf` before the step.
    pub residual: f64,
    /// Damping of the step taken, zero on the converged entry.
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<IterationRecord>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

pub fn solve_sparse(n: usize, triplets: &[Triplet<usize, usize, f64>], rhs: &[f64]) -> Result<Vec<f64>, SolveError> {
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, triplets)
        .map_err(|e| SolveError::Linear(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| SolveError::Linear(format!("{e:?}")))?;
    let b = Col::<f64>::from_fn(n, |i| rhs[i]);
    let x = lu.solve(&b);
    let out: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::Linear("non-finite solution".into()));
    }
    Ok(out)
}

/// Solve the `mu = 0` problem, which is linear.
pub fn solve_linear(problem: &Problem, eps: f64) -> Result<Solution, SolveError> {
    let boundary = problem.boundary_values(eps);
    let (trip, rhs) = problem.disc.linear_system(&boundary);
    let psi = solve_sparse(problem.disc.grid().unknown_count(), &trip, &rhs)?;
    Ok(Solution { psi, boundary, mu: 0.0, eps })
}

/// `h^2 |F(mu, psi)|_inf`.
pub fn scaled_residual(problem: &Problem, psi: &[f64], boundary: &[f64], mu: f64) -> f64 {
    let h = problem.h();
    h * h * inf_norm(&problem.disc.residual(psi, boundary, mu))
}

/// Damped Newton iteration from `start` at fixed `mu` and `eps`.
pub fn newton(
    problem: &Problem,
    start: &[f64],
    eps: f64,
    mu: f64,
    options: &NewtonOptions,
) -> Result<(Solution, NewtonReport), SolveError> {
    let boundary = problem.boundary_values(eps);
    let n = problem.disc.grid().unknown_count();
    let h2 = problem.h() * problem.h();
    let mut psi = start.to_vec();
    let mut r = problem.disc.residual(&psi, &boundary, mu);
    let mut norm = h2 * inf_norm(&r);
    let mut history = Vec::new();
    for iteration in 0..=options.max_iterations {
        if norm <= options.tolerance {
            history.push(IterationRecord { mu, eps, iteration, residual: norm, damping: 0.0 });
            debug!("newton mu={mu} eps={eps} converged in {iteration} iterations, residual {norm:e}");
            return Ok((
                Solution { psi, boundary, mu, eps },
                NewtonReport { iterations: iteration, residual: norm, history },
            ));
        }
        if iteration == options.max_iterations || !norm.is_finite() {
            break;
        }
        let jac = problem.disc.jacobian(&psi, &boundary, mu);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = solve_sparse(n, &jac, &rhs)?;
        let mut lambda = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = psi.iter().zip(&step).map(|(p, d)| p + lambda * d).collect();
            let tr = problem.disc.residual(&trial, &boundary, mu);
            let tn = h2 * inf_norm(&tr);
            if tn < norm {
                break Some((trial, tr, tn));
            }
            lambda *= 0.5;
            if lambda < options.damping_min {
                break None;
            }
        };
        history.push(IterationRecord { mu, eps, iteration, residual: norm, damping: lambda });
        match accepted {
            Some((p, tr, tn)) => {
                psi = p;
                r = tr;
                norm = tn;
            }
            None => {
                return Err(SolveError::NonConvergence { mu, eps, iterations: iteration + 1, residual: norm });
            }
        }
    }
    Err(SolveError::NonConvergence { mu, eps, iterations: options.max_iterations, residual: norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub mu: f64,
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub solution: Solution,
    pub stages: Vec<StageRecord>,
    pub history: Vec<IterationRecord>,
    /// Converged `mu = 1` fields, one per rung of the `eps` ladder.
    pub ladder: Vec<Solution>,
}

/// March `mu` from 0 to 1 at the largest `eps`, then lower `eps` at `mu = 1`.
/// Failed steps are bisected.
pub fn continuation_solve(problem: &Problem, schedule: &Schedule) -> Result<SolveOutcome, SolveError> {
    schedule.validate()?;
    let eps0 = schedule.eps_steps[0];
    let mut current = solve_linear(problem, eps0)?;
    let mut stages = vec![StageRecord { mu: 0.0, eps: eps0, iterations: 1, residual: 0.0 }];
    let mut history = Vec::new();
    let mut refinements = 0usize;
    let opts = &schedule.newton;

    for &target in &schedule.mu_steps[1..] {
        let mut pending = vec![target];
        while let Some(&next) = pending.last() {
            match newton(problem, &current.psi, eps0, next, opts) {
                Ok((sol, rep)) => {
                    stages.push(StageRecord { mu: next, eps: eps0, iterations: rep.iterations, residual: rep.residual });
                    history.extend(rep.history);
                    current = sol;
                    pending.pop();
                }
                Err(e) => {
                    refinements += 1;
                    if refinements > schedule.max_refinements || matches!(e, SolveError::Linear(_)) {
                        return Err(e);
                    }
                    info!("bisecting mu step {} -> {next}", current.mu);
                    pending.push(0.5 * (current.mu + next));
                }
            }
        }
    }

    let mut ladder = vec![current.clone()];
    for &target in &schedule.eps_steps[1..] {
        let mut pending = vec![target];
        while let Some(&next) = pending.last() {
            let shift = problem.data.eps_slope() * (next - current.eps);
            let start: Vec<f64> = current.psi.iter().map(|p| p + shift).collect();
            match newton(problem, &start, next, 1.0, opts) {
                Ok((sol, rep)) => {
                    stages.push(StageRecord { mu: 1.0, eps: next, iterations: rep.iterations, residual: rep.residual });
                    history.extend(rep.history);
                    current = sol;
                    ladder.push(current.clone());
                    pending.pop();
                }
                Err(e) => {
                    refinements += 1;
                    if refinements > schedule.max_refinements || matches!(e, SolveError::Linear(_)) {
                        return Err(e);
                    }
                    info!("bisecting eps step {} -> {next}", current.eps);
                    pending.push((current.eps * next).sqrt());
                }
            }
        }
    }
    Ok(SolveOutcome { solution: current, stages, history, ladder })
}
