//! Supersonic conical flow of a Chaplygin gas past flat and thin delta wings.
//!
//! The crate computes the attached planar waves at the leading edge, the
//! elliptic region they bound in conical coordinates, and the potential
//! inside that region by a continuation Newton method on a Cartesian grid.

pub mod conic_geometry;
pub mod edge_flow;
pub mod gas;
pub mod grid;
pub mod polar;
pub mod post;
pub mod solver;
pub mod thin_wing;
pub mod verify;
