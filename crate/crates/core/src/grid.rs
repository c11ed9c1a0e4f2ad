//! Cartesian lattice over a convex conical domain.
//!
//! Nodes sit at `(i h, j h)`. Inside nodes are unknowns; an arm towards an
//! outside neighbour ends on the Dirichlet boundary at a fraction of `h`
//! found by bisection. Neumann lines through the origin are handled by
//! mirror ghosts whose values interpolate the field at the reflected point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic_geometry::{dot, GeometryError, Point, WavePattern};
use crate::edge_flow::Side;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid mesh width {0}")]
    InvalidStep(f64),
    #[error("mesh width {h} leaves {across:.1} nodes across a domain of width {width}; need {required}")]
    Resolution { h: f64, width: f64, across: f64, required: usize },
    #[error("no lattice node falls inside the domain")]
    Empty,
    #[error("mirror ghost at {0:?} has no usable interpolation stencil")]
    Ghost(Point),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub trait Domain {
    fn contains(&self, p: Point) -> bool;

    /// Outward unit normals of Neumann lines through the origin.
    fn mirrors(&self) -> Vec<Point> {
        Vec::new()
    }

    /// Ordered samples of the Dirichlet part of the boundary.
    fn dirichlet_boundary(&self, samples: usize) -> Vec<Point>;

    fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        let mut pts = self.dirichlet_boundary(4096);
        if !self.mirrors().is_empty() {
            pts.push([0.0, 0.0]);
        }
        for p in pts {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

/// Open disk about the origin, mainly for checks of the discretisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub radius: f64,
}

impl Domain for Disk {
    fn contains(&self, p: Point) -> bool {
        dot(p, p) < self.radius * self.radius
    }

    fn dirichlet_boundary(&self, samples: usize) -> Vec<Point> {
        (0..samples)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / samples as f64;
                [self.radius * t.cos(), self.radius * t.sin()]
            })
            .collect()
    }
}

/// Flat-wing region reflected evenly across both coordinate axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedDomain {
    pattern: WavePattern,
}

impl ExtendedDomain {
    pub fn new(pattern: WavePattern) -> Result<Self, GeometryError> {
        if pattern.wedge != 0.0 {
            return Err(GeometryError::Inconsistent("only flat-wing regions can be reflected".into()));
        }
        Ok(Self { pattern })
    }

    pub fn pattern(&self) -> &WavePattern {
        &self.pattern
    }

    /// Image of `p` in the physical quadrant.
    pub fn fold(&self, p: Point) -> Point {
        let x = p[0].abs();
        match self.pattern.side {
            Side::Shock => [-x, p[1].abs()],
            Side::Rarefaction => [x, p[1].abs()],
        }
    }
}

impl Domain for ExtendedDomain {
    fn contains(&self, p: Point) -> bool {
        self.pattern.contains(self.fold(p))
    }

    fn dirichlet_boundary(&self, samples: usize) -> Vec<Point> {
        (0..samples)
            .filter_map(|k| {
                let t = std::f64::consts::TAU * k as f64 / samples as f64;
                let d = [t.cos(), t.sin()];
                let r = self.pattern.boundary_radius(self.fold(d))?;
                Some([r * d[0], r * d[1]])
            })
            .collect()
    }
}

/// Region between the symmetry line and the wing, with Neumann conditions
/// on both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeDomain {
    pattern: WavePattern,
}

impl WedgeDomain {
    pub fn new(pattern: WavePattern) -> Self {
        Self { pattern }
    }

    pub fn pattern(&self) -> &WavePattern {
        &self.pattern
    }
}

impl Domain for WedgeDomain {
    fn contains(&self, p: Point) -> bool {
        self.pattern.contains(p)
    }

    fn mirrors(&self) -> Vec<Point> {
        vec![self.pattern.symmetry_normal(), self.pattern.wing_normal()]
    }

    fn dirichlet_boundary(&self, samples: usize) -> Vec<Point> {
        let (a, b) = self.pattern.wedge_angles();
        let n = samples.max(2);
        (0..n)
            .filter_map(|k| {
                let t = b + (a - b) * k as f64 / (n - 1) as f64;
                let d = [t.cos(), t.sin()];
                let r = self.pattern.boundary_radius(d)?;
                Some([r * d[0], r * d[1]])
            })
            .collect()
    }
}

pub(crate) fn fold_into(p: Point, mirrors: &[Point]) -> Point {
    let mut q = p;
    for _ in 0..8 {
        let mut moved = false;
        for n in mirrors {
            let d = dot(*n, q);
            if d > 0.0 {
                q = [q[0] - 2.0 * d * n[0], q[1] - 2.0 * d * n[1]];
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    /// All four arms reach full-step unknowns or mirror ghosts.
    Interior,
    /// At least one arm ends on the Dirichlet boundary.
    NearBoundary,
    /// Inside, but so close to the boundary that it carries boundary data.
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueRef {
    Unknown(usize),
    Boundary(usize),
}

/// Linear combination of unknowns and boundary values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Combo {
    pub terms: Vec<(ValueRef, f64)>,
}

impl Combo {
    pub fn single(r: ValueRef) -> Self {
        Self { terms: vec![(r, 1.0)] }
    }

    pub fn add_scaled(&mut self, other: &Combo, w: f64) {
        self.terms.extend(other.terms.iter().map(|&(r, c)| (r, c * w)));
    }

    pub fn push(&mut self, r: ValueRef, w: f64) {
        self.terms.push((r, w));
    }

    /// Merge repeated references and drop zero weights.
    pub fn compact(mut self) -> Self {
        self.terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(ValueRef, f64)> = Vec::with_capacity(self.terms.len());
        for (r, w) in self.terms {
            match out.last_mut() {
                Some(last) if last.0 == r => last.1 += w,
                _ => out.push((r, w)),
            }
        }
        out.retain(|&(_, w)| w != 0.0);
        Self { terms: out }
    }

    pub fn eval(&self, unknowns: &[f64], boundary: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(r, w)| {
                w * match r {
                    ValueRef::Unknown(k) => unknowns[k],
                    ValueRef::Boundary(b) => boundary[b],
                }
            })
            .sum()
    }
}

/// Arm of the five-point stencil: neighbour value at `fraction * h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub fraction: f64,
    pub value: Combo,
}

/// Axis directions in arm order: east, north, west, south.
pub const AXES: [[i64; 2]; 4] = [[1, 0], [0, 1], [-1, 0], [0, -1]];
/// Diagonal directions: north-east, north-west, south-west, south-east.
pub const DIAGONALS: [[i64; 2]; 4] = [[1, 1], [-1, 1], [-1, -1], [1, -1]];

#[derive(Debug, Clone, PartialEq)]
pub struct GridNode {
    pub index: [i64; 2],
    pub xi: Point,
    pub kind: NodeKind,
    pub arms: [Arm; 4],
    pub diagonals: [Option<Combo>; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundarySource {
    /// Where the arm `axis` of unknown `node` meets the boundary.
    Crossing { node: usize, axis: usize },
    /// Lattice node snapped onto the boundary.
    Snapped([i64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub xi: Point,
    pub source: BoundarySource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Exterior,
    Unknown(usize),
    Boundary(usize),
    /// Outside the wedge; value mirrors the field at the reflected point.
    Ghost(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub h: f64,
    /// Minimum number of steps across the narrower bounding-box side.
    pub min_nodes_across: usize,
    /// Nodes with an arm shorter than this fraction of `h` are snapped.
    pub snap_fraction: f64,
}

impl GridOptions {
    pub fn new(h: f64) -> Self {
        Self { h, min_nodes_across: 10, snap_fraction: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    h: f64,
    lo: [i64; 2],
    dims: [usize; 2],
    slots: Vec<Slot>,
    nodes: Vec<GridNode>,
    boundary: Vec<BoundaryPoint>,
    ghosts: Vec<Combo>,
    mirrors: Vec<Point>,
}

type Recurse<'a> = Option<&'a dyn Fn(&Grid, [i64; 2]) -> bool>;

#[derive(Clone, Copy)]
enum RawArm {
    Node([i64; 2]),
    Ghost([i64; 2]),
    Crossing(f64),
}

const BISECTION_STEPS: usize = 64;
const GHOST_DEPTH: usize = 4;

impl Grid {
    pub fn build<D: Domain + ?Sized>(domain: &D, options: GridOptions) -> Result<Self, GridError> {
        let h = options.h;
        if !(h.is_finite() && h > 0.0) {
            return Err(GridError::InvalidStep(h));
        }
        let (lo_pt, hi_pt) = domain.bounding_box();
        let width = (hi_pt[0] - lo_pt[0]).min(hi_pt[1] - lo_pt[1]);
        if width / h < options.min_nodes_across as f64 {
            return Err(GridError::Resolution {
                h,
                width,
                across: width / h,
                required: options.min_nodes_across,
            });
        }
        let lo = [(lo_pt[0] / h).floor() as i64 - 1, (lo_pt[1] / h).floor() as i64 - 1];
        let hi = [(hi_pt[0] / h).ceil() as i64 + 1, (hi_pt[1] / h).ceil() as i64 + 1];
        let dims = [(hi[0] - lo[0] + 1) as usize, (hi[1] - lo[1] + 1) as usize];
        let mirrors = domain.mirrors();
        let mut grid = Grid {
            h,
            lo,
            dims,
            slots: vec![Slot::Exterior; dims[0] * dims[1]],
            nodes: Vec::new(),
            boundary: Vec::new(),
            ghosts: Vec::new(),
            mirrors,
        };

        let inside: Vec<bool> = (0..grid.slots.len()).map(|k| domain.contains(grid.xi(grid.unflat(k)))).collect();
        let is_inside = |g: &Grid, ij: [i64; 2]| g.flat(ij).map_or(false, |k| inside[k]);
        let contains_ext = |g: &Grid, p: Point| {
            domain.contains(p) || (!g.mirrors.is_empty() && domain.contains(fold_into(p, &g.mirrors)))
        };
        let ghostable = |g: &Grid, ij: [i64; 2]| {
            if g.mirrors.is_empty() {
                return false;
            }
            let p = g.xi(ij);
            let q = fold_into(p, &g.mirrors);
            q != p && domain.contains(q)
        };

        // raw arms of every inside node
        let mut raw: Vec<([i64; 2], [RawArm; 4])> = Vec::new();
        for k in 0..grid.slots.len() {
            if !inside[k] {
                continue;
            }
            let ij = grid.unflat(k);
            let x = grid.xi(ij);
            let mut arms = [RawArm::Crossing(1.0); 4];
            for (a, d) in AXES.iter().enumerate() {
                let nb = [ij[0] + d[0], ij[1] + d[1]];
                arms[a] = if is_inside(&grid, nb) {
                    RawArm::Node(nb)
                } else if ghostable(&grid, nb) {
                    RawArm::Ghost(nb)
                } else {
                    let dir = [d[0] as f64 * h, d[1] as f64 * h];
                    let (mut t_in, mut t_out) = (0.0f64, 1.0f64);
                    for _ in 0..BISECTION_STEPS {
                        let t = 0.5 * (t_in + t_out);
                        if contains_ext(&grid, [x[0] + t * dir[0], x[1] + t * dir[1]]) {
                            t_in = t;
                        } else {
                            t_out = t;
                        }
                    }
                    RawArm::Crossing(0.5 * (t_in + t_out))
                };
            }
            raw.push((ij, arms));
        }
        if raw.is_empty() {
            return Err(GridError::Empty);
        }

        for (ij, arms) in &raw {
            let snapped = arms
                .iter()
                .any(|a| matches!(a, RawArm::Crossing(t) if *t < options.snap_fraction));
            let k = grid.flat(*ij).expect("inside node on lattice");
            grid.slots[k] = if snapped {
                grid.boundary.push(BoundaryPoint { xi: grid.xi(*ij), source: BoundarySource::Snapped(*ij) });
                Slot::Boundary(grid.boundary.len() - 1)
            } else {
                grid.nodes.push(GridNode {
                    index: *ij,
                    xi: grid.xi(*ij),
                    kind: NodeKind::Interior,
                    arms: std::array::from_fn(|_| Arm { fraction: 1.0, value: Combo::default() }),
                    diagonals: Default::default(),
                });
                Slot::Unknown(grid.nodes.len() - 1)
            };
        }

        if !grid.mirrors.is_empty() {
            let mut found = Vec::new();
            for k in 0..grid.slots.len() {
                let ij = grid.unflat(k);
                if grid.slots[k] == Slot::Exterior && ghostable(&grid, ij) {
                    let p = fold_into(grid.xi(ij), &grid.mirrors);
                    if let Some(combo) = grid.interpolate(p, 0, Some(&ghostable)) {
                        found.push((k, combo));
                    }
                }
            }
            for (k, combo) in found {
                grid.ghosts.push(combo);
                grid.slots[k] = Slot::Ghost(grid.ghosts.len() - 1);
            }
        }

        for (ij, arms) in &raw {
            let m = match grid.slot(*ij) {
                Slot::Unknown(m) => m,
                _ => continue,
            };
            let x = grid.xi(*ij);
            let mut kind = NodeKind::Interior;
            for (a, raw_arm) in arms.iter().enumerate() {
                let arm = match *raw_arm {
                    RawArm::Node(nb) => match grid.slot(nb) {
                        Slot::Unknown(u) => Arm { fraction: 1.0, value: Combo::single(ValueRef::Unknown(u)) },
                        Slot::Boundary(b) => {
                            kind = NodeKind::NearBoundary;
                            Arm { fraction: 1.0, value: Combo::single(ValueRef::Boundary(b)) }
                        }
                        Slot::Exterior | Slot::Ghost(_) => unreachable!("inside neighbour without a slot"),
                    },
                    RawArm::Ghost(nb) => {
                        let value = grid.node_value(nb, 0, None).ok_or(GridError::Ghost(grid.xi(nb)))?;
                        Arm { fraction: 1.0, value }
                    }
                    RawArm::Crossing(t) => {
                        kind = NodeKind::NearBoundary;
                        let d = AXES[a];
                        grid.boundary.push(BoundaryPoint {
                            xi: [x[0] + t * h * d[0] as f64, x[1] + t * h * d[1] as f64],
                            source: BoundarySource::Crossing { node: m, axis: a },
                        });
                        Arm { fraction: t, value: Combo::single(ValueRef::Boundary(grid.boundary.len() - 1)) }
                    }
                };
                grid.nodes[m].arms[a] = arm;
            }
            for (a, d) in DIAGONALS.iter().enumerate() {
                let nb = [ij[0] + d[0], ij[1] + d[1]];
                grid.nodes[m].diagonals[a] = grid.node_value(nb, 0, None);
            }
            grid.nodes[m].kind = kind;
        }
        Ok(grid)
    }

    fn node_value(&self, ij: [i64; 2], depth: usize, recurse: Recurse) -> Option<Combo> {
        match self.slot(ij) {
            Slot::Unknown(u) => Some(Combo::single(ValueRef::Unknown(u))),
            Slot::Boundary(b) => Some(Combo::single(ValueRef::Boundary(b))),
            Slot::Ghost(g) => Some(self.ghosts[g].clone()),
            Slot::Exterior => match recurse {
                Some(f) if depth < GHOST_DEPTH && f(self, ij) => {
                    self.interpolate(fold_into(self.xi(ij), &self.mirrors), depth + 1, recurse)
                }
                _ => None,
            },
        }
    }

    /// Interpolation weights for the field at `p`: bilinear, then linear on
    /// a cell triangle, then the nearest usable corner.
    fn interpolate(&self, p: Point, depth: usize, recurse: Recurse) -> Option<Combo> {
        const TINY: f64 = 1e-12;
        let (fi, fj) = (p[0] / self.h, p[1] / self.h);
        let (i0, j0) = (fi.floor(), fj.floor());
        let (fx, fy) = (fi - i0, fj - j0);
        let base = [i0 as i64, j0 as i64];
        let corner = |dx: i64, dy: i64| [base[0] + dx, base[1] + dy];
        let try_weights = |ws: &[([i64; 2], f64)]| -> Option<Combo> {
            let mut out = Combo::default();
            for &(c, w) in ws {
                if w.abs() <= TINY {
                    continue;
                }
                out.add_scaled(&self.node_value(c, depth, recurse)?, w);
            }
            Some(out.compact())
        };
        let bilinear = [
            (corner(0, 0), (1.0 - fx) * (1.0 - fy)),
            (corner(1, 0), fx * (1.0 - fy)),
            (corner(0, 1), (1.0 - fx) * fy),
            (corner(1, 1), fx * fy),
        ];
        if let Some(c) = try_weights(&bilinear) {
            return Some(c);
        }
        let mut triangles = Vec::with_capacity(2);
        if fy <= fx {
            triangles.push(vec![(corner(0, 0), 1.0 - fx), (corner(1, 0), fx - fy), (corner(1, 1), fy)]);
        } else {
            triangles.push(vec![(corner(0, 0), 1.0 - fy), (corner(0, 1), fy - fx), (corner(1, 1), fx)]);
        }
        if fx + fy <= 1.0 {
            triangles.push(vec![(corner(0, 0), 1.0 - fx - fy), (corner(1, 0), fx), (corner(0, 1), fy)]);
        } else {
            triangles.push(vec![(corner(1, 0), 1.0 - fy), (corner(0, 1), 1.0 - fx), (corner(1, 1), fx + fy - 1.0)]);
        }
        for t in &triangles {
            if let Some(c) = try_weights(t) {
                return Some(c);
            }
        }
        let mut by_distance: Vec<([i64; 2], f64)> = bilinear
            .iter()
            .map(|&(c, _)| {
                let x = self.xi(c);
                (c, (x[0] - p[0]).hypot(x[1] - p[1]))
            })
            .collect();
        by_distance.sort_by(|a, b| a.1.total_cmp(&b.1));
        by_distance.into_iter().find_map(|(c, _)| self.node_value(c, depth, recurse))
    }

    /// Field at an arbitrary point, reflected into the wedge and
    /// interpolated from the lattice.
    pub fn sample(&self, p: Point, unknowns: &[f64], boundary: &[f64]) -> Option<f64> {
        let q = fold_into(p, &self.mirrors);
        self.interpolate(q, 0, None).map(|c| c.eval(unknowns, boundary))
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn mirrors(&self) -> &[Point] {
        &self.mirrors
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn boundary(&self) -> &[BoundaryPoint] {
        &self.boundary
    }

    pub fn unknown_count(&self) -> usize {
        self.nodes.len()
    }

    /// Lattice index bounds, inclusive.
    pub fn index_bounds(&self) -> ([i64; 2], [i64; 2]) {
        (self.lo, [self.lo[0] + self.dims[0] as i64 - 1, self.lo[1] + self.dims[1] as i64 - 1])
    }

    pub fn xi(&self, ij: [i64; 2]) -> Point {
        [ij[0] as f64 * self.h, ij[1] as f64 * self.h]
    }

    fn flat(&self, ij: [i64; 2]) -> Option<usize> {
        let a = ij[0] - self.lo[0];
        let b = ij[1] - self.lo[1];
        if a < 0 || b < 0 || a as usize >= self.dims[0] || b as usize >= self.dims[1] {
            return None;
        }
        Some(b as usize * self.dims[0] + a as usize)
    }

    fn unflat(&self, k: usize) -> [i64; 2] {
        [self.lo[0] + (k % self.dims[0]) as i64, self.lo[1] + (k / self.dims[0]) as i64]
    }

    pub fn slot(&self, ij: [i64; 2]) -> Slot {
        self.flat(ij).map_or(Slot::Exterior, |k| self.slots[k])
    }

    pub fn kind(&self, ij: [i64; 2]) -> NodeKind {
        match self.slot(ij) {
            Slot::Exterior | Slot::Ghost(_) => NodeKind::Exterior,
            Slot::Boundary(_) => NodeKind::Boundary,
            Slot::Unknown(m) => self.nodes[m].kind,
        }
    }

    /// Every lattice index in row-major order.
    pub fn lattice(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        (0..self.slots.len()).map(move |k| self.unflat(k))
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.lattice().filter(|&ij| self.kind(ij) == kind).count()
    }

    /// Lattice value of a field given by its unknowns and boundary values.
    pub fn value_at(&self, ij: [i64; 2], unknowns: &[f64], boundary: &[f64]) -> Option<f64> {
        match self.slot(ij) {
            Slot::Exterior | Slot::Ghost(_) => None,
            Slot::Unknown(m) => Some(unknowns[m]),
            Slot::Boundary(b) => Some(boundary[b]),
        }
    }
}
