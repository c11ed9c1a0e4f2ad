#![allow(dead_code)]

use conical_chaplygin::conic_geometry::{build_pattern, WavePattern};
use conical_chaplygin::edge_flow::{Side, Wing};
use conical_chaplygin::gas::FreeStream;
use conical_chaplygin::grid::{ExtendedDomain, Grid, GridOptions};
use conical_chaplygin::solver::{BoundaryData, Discretization, Problem};

/// `q = 2`, `c = 1`, incidence 10 degrees.
pub fn reference_stream() -> FreeStream {
    FreeStream::normalized(2.0, 10f64.to_radians()).unwrap()
}

/// Flat wing swept 30 degrees.
pub fn reference_wing() -> Wing {
    Wing::flat(30f64.to_radians()).unwrap()
}

pub fn reference_pattern(side: Side) -> WavePattern {
    build_pattern(&reference_stream(), &reference_wing(), side).unwrap()
}

pub fn reference_domain() -> ExtendedDomain {
    ExtendedDomain::new(reference_pattern(Side::Shock)).unwrap()
}

pub fn reference_problem(h: f64, data: BoundaryData) -> Problem {
    let grid = Grid::build(&reference_domain(), GridOptions::new(h)).unwrap();
    Problem::new(Discretization::new(grid), data)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn lift(xi: [f64; 2]) -> f64 {
    (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}
