//! Physical fields from a converged potential, and their export.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conic_geometry::{dot, unrotate, Point};
use crate::gas::FreeStream;
use crate::grid::Slot;
use crate::solver::coefficients::ellipticity;
use crate::solver::{Problem, Solution};

#[derive(Debug, thiserror::Error)]
pub enum PostError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PostError + '_ {
    move |source| PostError::Io { path: path.to_path_buf(), source }
}

/// Axes the velocity components refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Frame {
    /// Free-stream axes, with `x3` along the plane of symmetry.
    Plain,
    /// Rotated about `x2` by the wedge half-angle so the root chord is `x3`.
    Rotated { wedge: f64 },
}

/// Thermodynamic and kinematic state at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointState {
    pub density: f64,
    pub velocity: [f64; 3],
    pub pressure: f64,
    pub sound_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint {
    pub index: [i64; 2],
    pub xi: Point,
    pub psi: f64,
    pub w: f64,
    /// `None` where the point is not strictly supersonic in the conical
    /// sense and no density can be assigned.
    pub state: Option<PointState>,
    pub l2: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowField {
    pub frame: Frame,
    pub h: f64,
    pub points: Vec<FlowPoint>,
}

/// State from the scaled potential `psi` and its gradient at `xi`, in the
/// frame `psi` was computed in.
pub fn state_at(fs: &FreeStream, xi: Point, psi: f64, grad: Point) -> Option<PointState> {
    let chi = psi - dot(grad, xi);
    let a2 = dot(grad, grad) + chi * chi - 1.0;
    if !(a2 > 0.0) {
        return None;
    }
    let rb = fs.bernoulli().sqrt();
    let gas = fs.gas();
    let sound_speed = rb * a2.sqrt();
    let density = gas.density_for_sound_speed(sound_speed);
    Some(PointState {
        density,
        velocity: [rb * grad[0], rb * grad[1], rb * chi],
        pressure: gas.pressure(density),
        sound_speed,
    })
}

/// Reconstructs every unknown of `solution`, using the solver stencils for
/// the gradient. `wedge` is the rotation of the computational frame.
pub fn reconstruct(problem: &Problem, solution: &Solution, fs: &FreeStream, wedge: f64, frame: Frame) -> FlowField {
    let disc = &problem.disc;
    let points = disc
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, node)| {
            let j = disc.jet(k, &solution.psi, &solution.boundary);
            let lift = (1.0 + dot(node.xi, node.xi)).sqrt();
            let mut state = state_at(fs, node.xi, j.value, j.grad);
            if let (Some(s), Frame::Plain) = (state.as_mut(), frame) {
                s.velocity = unrotate(s.velocity, wedge);
            }
            FlowPoint {
                index: node.index,
                xi: node.xi,
                psi: j.value,
                w: j.value / lift,
                state,
                l2: ellipticity(node.xi, j.value, j.grad),
                margin: j.value - lift,
            }
        })
        .collect();
    let frame = match frame {
        Frame::Plain => Frame::Plain,
        Frame::Rotated { .. } => Frame::Rotated { wedge },
    };
    FlowField { frame, h: disc.grid().h(), points }
}

pub const CSV_HEADER: &str = "xi1,xi2,psi,w,rho,v1,v2,v3,p,L2,margin";

/// `<case>_<eps>_<h>.csv`
pub fn csv_name(case: &str, eps: f64, h: f64) -> String {
    format!("{case}_{eps:e}_{h}.csv")
}

fn num(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("nan");
    } else {
        let _ = write!(out, "{:.16e}", v + 0.0);
    }
}

pub fn to_csv(field: &FlowField) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &field.points {
        let (rho, v, pr) = match p.state {
            Some(s) => (s.density, s.velocity, s.pressure),
            None => (f64::NAN, [f64::NAN; 3], f64::NAN),
        };
        let row = [p.xi[0], p.xi[1], p.psi, p.w, rho, v[0], v[1], v[2], pr, p.l2, p.margin];
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            num(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(field: &FlowField, path: &Path) -> Result<(), PostError> {
    fs::write(path, to_csv(field)).map_err(io_error(path))
}

/// Rows of a CSV written by [`write_csv`], one array per data line.
pub fn read_csv(path: &Path) -> Result<Vec<[f64; 11]>, PostError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let bad = |line: usize, message: String| PostError::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(bad(1, "missing header".into())),
    }
    lines
        .map(|(n, line)| {
            let cells: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| bad(n + 1, e.to_string())))
                .collect::<Result<_, _>>()?;
            cells.try_into().map_err(|c: Vec<f64>| bad(n + 1, format!("{} columns", c.len())))
        })
        .collect()
}

/// Legacy VTK structured points over the lattice bounding box; points
/// outside the region hold NaN and a zero mask.
pub fn to_vtk(field: &FlowField, slots: impl Fn([i64; 2]) -> Slot, bounds: ([i64; 2], [i64; 2])) -> String {
    let (lo, hi) = bounds;
    let (nx, ny) = ((hi[0] - lo[0] + 1) as usize, (hi[1] - lo[1] + 1) as usize);
    let at = |ij: [i64; 2]| match slots(ij) {
        Slot::Unknown(k) => field.points.get(k),
        _ => None,
    };
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0\nconical potential\nASCII\nDATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {nx} {ny} 1");
    let _ = writeln!(out, "ORIGIN {:e} {:e} 0", lo[0] as f64 * field.h, lo[1] as f64 * field.h);
    let _ = writeln!(out, "SPACING {:e} {:e} 1", field.h, field.h);
    let _ = writeln!(out, "POINT_DATA {}", nx * ny);
    let lattice = || (lo[1]..=hi[1]).flat_map(move |j| (lo[0]..=hi[0]).map(move |i| [i, j]));
    let scalars: [(&str, fn(&FlowPoint) -> f64); 5] = [
        ("psi", |p| p.psi),
        ("rho", |p| p.state.map_or(f64::NAN, |s| s.density)),
        ("pressure", |p| p.state.map_or(f64::NAN, |s| s.pressure)),
        ("L2", |p| p.l2),
        ("margin", |p| p.margin),
    ];
    for (name, get) in scalars {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for ij in lattice() {
            num(&mut out, at(ij).map_or(f64::NAN, get));
            out.push('\n');
        }
    }
    let _ = writeln!(out, "SCALARS mask int 1\nLOOKUP_TABLE default");
    for ij in lattice() {
        out.push_str(if at(ij).is_some() { "1\n" } else { "0\n" });
    }
    let _ = writeln!(out, "VECTORS velocity double");
    for ij in lattice() {
        let v = at(ij).and_then(|p| p.state).map_or([f64::NAN; 3], |s| s.velocity);
        for (c, x) in v.iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            num(&mut out, *x);
        }
        out.push('\n');
    }
    out
}

pub fn write_vtk(field: &FlowField, problem: &Problem, path: &Path) -> Result<(), PostError> {
    let grid = problem.disc.grid();
    let text = to_vtk(field, |ij| grid.slot(ij), grid.index_bounds());
    fs::write(path, text).map_err(io_error(path))
}

/// Labelled points as `label,xi1,xi2` rows.
pub fn geometry_csv(points: &[(&str, Point)]) -> String {
    let mut out = String::from("label,xi1,xi2\n");
    for (label, p) in points {
        out.push_str(label);
        for v in p {
            out.push(',');
            num(&mut out, *v);
        }
        out.push('\n');
    }
    out
}
