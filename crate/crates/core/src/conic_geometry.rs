//! Conical coordinates, sonic cones of uniform states and the wave pattern.
//!
//! Points are conical coordinates `(x1/x3, x2/x3)`. A uniform state with
//! velocity `v` has the scaled conical potential `(v . (xi, 1)) / sqrt(B)`;
//! its sonic cone is where that potential equals `sqrt(1 + |xi|^2)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edge_flow::{self, FlowError, Side, SideRegime, Wing};
use crate::gas::FreeStream;

pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point with x3 = {0} has no conical coordinates")]
    BehindApex(f64),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("inconsistent wave pattern: {0}")]
    Inconsistent(String),
}

pub fn conical_coordinates(x: [f64; 3]) -> Result<Point, GeometryError> {
    if !(x[2] > 0.0) {
        return Err(GeometryError::BehindApex(x[2]));
    }
    Ok([x[0] / x[2], x[1] / x[2]])
}

/// Rotation about the `x2` axis taking the root chord of a wedge of slope
/// angle `wedge` onto the `x3` axis.
pub fn rotate(x: [f64; 3], wedge: f64) -> [f64; 3] {
    let (s, c) = wedge.sin_cos();
    [x[0] * c - x[2] * s, x[1], x[0] * s + x[2] * c]
}

pub fn unrotate(x: [f64; 3], wedge: f64) -> [f64; 3] {
    rotate(x, -wedge)
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

/// Sonic cone of a uniform state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conic {
    velocity: [f64; 3],
    bernoulli: f64,
}

impl Conic {
    pub fn new(velocity: [f64; 3], bernoulli: f64) -> Self {
        Self { velocity, bernoulli }
    }

    pub fn velocity(&self) -> [f64; 3] {
        self.velocity
    }

    fn linear(&self, p: Point) -> f64 {
        let v = self.velocity;
        v[0] * p[0] + v[1] * p[1] + v[2]
    }

    /// Scaled conical potential of the uniform state.
    pub fn potential(&self, p: Point) -> f64 {
        self.linear(p) / self.bernoulli.sqrt()
    }

    /// Positive strictly inside the cone, zero on it.
    pub fn level(&self, p: Point) -> f64 {
        self.potential(p) - (1.0 + dot(p, p)).sqrt()
    }

    /// Quadratic form whose zero set is the cone.
    pub fn implicit(&self, p: Point) -> f64 {
        let l = self.linear(p);
        l * l - self.bernoulli * (1.0 + dot(p, p))
    }

    pub fn implicit_gradient(&self, p: Point) -> Point {
        let l = self.linear(p);
        let v = self.velocity;
        [2.0 * l * v[0] - 2.0 * self.bernoulli * p[0], 2.0 * l * v[1] - 2.0 * self.bernoulli * p[1]]
    }

    /// Quadratic `a t^2 + b t + c` of the implicit form along `base + t dir`.
    fn along(&self, base: Point, dir: Point) -> (f64, f64, f64, f64, f64) {
        let v = self.velocity;
        let vd = v[0] * dir[0] + v[1] * dir[1];
        let vb = self.linear(base);
        let a = vd * vd - self.bernoulli * dot(dir, dir);
        let b = 2.0 * vd * vb - 2.0 * self.bernoulli * dot(base, dir);
        let c = vb * vb - self.bernoulli * (1.0 + dot(base, base));
        (a, b, c, vd, vb)
    }

    /// Distance from the origin to the cone along the unit direction `dir`.
    pub fn ray_hit(&self, dir: Point) -> Option<f64> {
        let (a, b, c, vd, vb) = self.along([0.0, 0.0], dir);
        let roots = quadratic_roots(a, b, c);
        roots
            .into_iter()
            .flatten()
            .filter(|&t| t > 0.0 && vb + vd * t > 0.0)
            .min_by(|x, y| x.total_cmp(y))
    }

    /// Touching point of `line` and the relative discriminant there.
    pub fn tangency(&self, line: &Line) -> Option<(Point, f64)> {
        let base = line.foot();
        let dir = line.direction();
        let (a, b, c, _, _) = self.along(base, dir);
        if a == 0.0 {
            return None;
        }
        let t = -b / (2.0 * a);
        let disc = b * b - 4.0 * a * c;
        let rel = disc / (b * b).max((4.0 * a * c).abs()).max(f64::MIN_POSITIVE);
        Some(([base[0] + t * dir[0], base[1] + t * dir[1]], rel))
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> [Option<f64>; 2] {
    if a == 0.0 {
        return [(b != 0.0).then(|| -c / b), None];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return [None, None];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return [Some(0.0), None];
    }
    [Some(q / a), Some(c / q)]
}

/// Line `normal . p = offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub normal: Point,
    pub offset: f64,
}

impl Line {
    /// Where two uniform states carry the same conical potential.
    pub fn between(a: &Conic, b: &Conic) -> Self {
        let (va, vb) = (a.velocity(), b.velocity());
        Line { normal: [va[0] - vb[0], va[1] - vb[1]], offset: vb[2] - va[2] }
    }

    pub fn foot(&self) -> Point {
        scale(self.normal, self.offset / dot(self.normal, self.normal))
    }

    pub fn direction(&self) -> Point {
        [-self.normal[1], self.normal[0]]
    }

    /// `d xi2 / d xi1`; infinite when the line is parallel to the `xi2` axis.
    pub fn slope(&self) -> f64 {
        -self.normal[0] / self.normal[1]
    }

    /// `xi2` where the line crosses the `xi2` axis.
    pub fn xi2_intercept(&self) -> Option<f64> {
        (self.normal[1] != 0.0).then(|| self.offset / self.normal[1])
    }

    /// `xi1` where the line crosses the `xi1` axis.
    pub fn xi1_intercept(&self) -> Option<f64> {
        (self.normal[0] != 0.0).then(|| self.offset / self.normal[0])
    }

    pub fn is_parallel_to_xi2_axis(&self) -> bool {
        self.normal[1] == 0.0
    }

    pub fn residual(&self, p: Point) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

/// Labelled corners of the elliptic region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternPoints {
    /// Free-stream cone on the wing line.
    pub p0: Point,
    /// Where the planar wave touches both cones.
    pub p1: Point,
    /// Free-stream cone on the symmetry line.
    pub p2: Point,
    /// Root chord.
    pub p3: Point,
    /// Downstream cone on the wing line.
    pub p4: Point,
    /// Leading edge; absent for an unswept edge.
    pub p5: Option<Point>,
    /// Planar wave on the symmetry line.
    pub p6: Option<Point>,
}

impl PatternPoints {
    pub fn labelled(&self) -> Vec<(&'static str, Point)> {
        let mut out = vec![
            ("P0", self.p0),
            ("P1", self.p1),
            ("P2", self.p2),
            ("P3", self.p3),
            ("P4", self.p4),
        ];
        if let Some(p) = self.p5 {
            out.push(("P5", p));
        }
        if let Some(p) = self.p6 {
            out.push(("P6", p));
        }
        out
    }
}

/// Maximum relative discriminant accepted as a tangency.
pub const TANGENCY_TOLERANCE: f64 = 1e-8;

/// Uniform states, cones and corners of the conical flow near one side of
/// the wing, in the frame where the root chord is the `x3` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePattern {
    pub side: Side,
    pub wedge: f64,
    pub bernoulli: f64,
    pub free_stream: Conic,
    /// Absent when the sweep is critical and the planar wave degenerates.
    pub downstream: Option<Conic>,
    pub wave_line: Option<Line>,
    /// Unit direction of the symmetry line leaving the root chord.
    pub symmetry_direction: Point,
    /// Unit direction of the wing surface leaving the root chord.
    pub wing_direction: Point,
    pub points: PatternPoints,
}

pub fn build_pattern(fs: &FreeStream, wing: &Wing, side: Side) -> Result<WavePattern, GeometryError> {
    let regime = edge_flow::attachment(fs, wing);
    let side_regime = match side {
        Side::Shock => regime.shock,
        Side::Rarefaction => regime.rarefaction,
    };
    match side_regime {
        SideRegime::Invalid => {
            return Err(FlowError::Regime(format!(
                "incidence {} admits no attached {side:?} pattern",
                fs.incidence()
            ))
            .into())
        }
        SideRegime::Detached => {
            return Err(FlowError::Detached(format!("sweep {} exceeds the critical sweep", wing.sweep())).into())
        }
        SideRegime::Critical if !wing.is_flat() => {
            return Err(FlowError::Detached("critical sweep on a thin wing".into()).into())
        }
        _ => {}
    }
    let wedge = wing.wedge();
    let bernoulli = fs.bernoulli();
    let free_stream = Conic::new(rotate(fs.velocity(), wedge), bernoulli);
    let symmetry_direction = match side {
        Side::Shock => [-1.0, 0.0],
        Side::Rarefaction => [1.0, 0.0],
    };
    let lean = -wedge.sin() * wing.sweep().tan();
    let wing_direction = scale([lean, 1.0], 1.0 / lean.hypot(1.0));
    let hit = |cone: &Conic, dir: Point, what: &str| {
        cone.ray_hit(dir)
            .map(|r| scale(dir, r))
            .ok_or_else(|| GeometryError::Inconsistent(format!("{what} does not meet the cone")))
    };
    let p0 = hit(&free_stream, wing_direction, "wing line")?;
    let p2 = hit(&free_stream, symmetry_direction, "symmetry line")?;
    let p3 = [0.0, 0.0];
    let p5 = (wing.sweep() > 0.0).then(|| [-wedge.tan(), 1.0 / (wing.sweep().tan() * wedge.cos())]);

    if side_regime == SideRegime::Critical {
        return Ok(WavePattern {
            side,
            wedge,
            bernoulli,
            free_stream,
            downstream: None,
            wave_line: None,
            symmetry_direction,
            wing_direction,
            points: PatternPoints { p0, p1: p0, p2, p3, p4: p0, p5, p6: None },
        });
    }

    let state = edge_flow::downstream_state(fs, wing, side)?;
    let downstream = Conic::new(rotate(state.velocity, wedge), bernoulli);
    let wave_line = Line::between(&free_stream, &downstream);
    let (p1, rel) = free_stream
        .tangency(&wave_line)
        .ok_or_else(|| GeometryError::Inconsistent("wave line parallel to a cone asymptote".into()))?;
    if rel.abs() > TANGENCY_TOLERANCE {
        return Err(GeometryError::Inconsistent(format!(
            "wave line is not tangent to the free-stream cone (relative discriminant {rel:e})"
        )));
    }
    let p4 = hit(&downstream, wing_direction, "wing line")?;
    let p6 = wave_line.xi1_intercept().map(|x| [x, 0.0]);

    let (r0, r4) = (norm(p0), norm(p4));
    let ordered = match side {
        Side::Shock => r4 < r0,
        Side::Rarefaction => r0 < r4,
    };
    let below_edge = p5.map_or(true, |p| r0.max(r4) < norm(p));
    if !(ordered && below_edge) {
        return Err(GeometryError::Inconsistent(format!(
            "cone crossings out of order on the wing line: |P0| = {r0}, |P4| = {r4}"
        )));
    }
    let pattern = WavePattern {
        side,
        wedge,
        bernoulli,
        free_stream,
        downstream: Some(downstream),
        wave_line: Some(wave_line),
        symmetry_direction,
        wing_direction,
        points: PatternPoints { p0, p1, p2, p3, p4, p5, p6 },
    };
    if !pattern.in_wedge(p1, 1e-12) {
        return Err(GeometryError::Inconsistent("tangency point outside the wing-symmetry wedge".into()));
    }
    Ok(pattern)
}

impl WavePattern {
    /// Outward unit normal of the symmetry line.
    pub fn symmetry_normal(&self) -> Point {
        [0.0, -1.0]
    }

    /// Outward unit normal of the wing surface.
    pub fn wing_normal(&self) -> Point {
        let d = self.wing_direction;
        let n = [d[1], -d[0]];
        if dot(n, self.symmetry_direction) > 0.0 {
            [-n[0], -n[1]]
        } else {
            n
        }
    }

    pub fn in_wedge(&self, p: Point, slack: f64) -> bool {
        dot(self.symmetry_normal(), p) <= slack && dot(self.wing_normal(), p) <= slack
    }

    /// Whether the ray through `p` ends on the free-stream cone rather than
    /// on the downstream cone.
    pub fn on_free_stream_arc(&self, p: Point) -> bool {
        if self.downstream.is_none() {
            return true;
        }
        let p1 = self.points.p1;
        cross(p1, p) * cross(p1, self.symmetry_direction) >= 0.0
    }

    /// Cone bounding the elliptic region along the ray through `p`.
    pub fn bounding_cone(&self, p: Point) -> &Conic {
        match (&self.downstream, self.on_free_stream_arc(p)) {
            (Some(d), false) => d,
            _ => &self.free_stream,
        }
    }

    /// Elliptic region between the wing, the symmetry plane and the cones.
    pub fn contains(&self, p: Point) -> bool {
        self.in_wedge(p, 0.0) && self.bounding_cone(p).level(p) > 0.0
    }

    /// Distance from the root chord to the sonic boundary along `dir`.
    pub fn boundary_radius(&self, dir: Point) -> Option<f64> {
        self.bounding_cone(dir).ray_hit(dir)
    }

    /// Scaled potential of the uniform state outside the elliptic region
    /// next to `p`.
    pub fn outer_potential(&self, p: Point) -> f64 {
        self.bounding_cone(p).potential(p)
    }

    /// Polar angles of the symmetry and wing rays, increasing from the
    /// former to the latter.
    pub fn wedge_angles(&self) -> (f64, f64) {
        let a = self.symmetry_direction[1].atan2(self.symmetry_direction[0]);
        let b = self.wing_direction[1].atan2(self.wing_direction[0]);
        (a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_hit_unit_circle() {
        // velocity (0,0,sqrt(2)) with B = 1 gives the circle |xi| = 1
        let cone = Conic::new([0.0, 0.0, 2f64.sqrt()], 1.0);
        let r = cone.ray_hit([0.6, 0.8]).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_round_trips() {
        let x = [0.3, -1.2, 2.0];
        let y = unrotate(rotate(x, -0.2), -0.2);
        for k in 0..3 {
            assert!((x[k] - y[k]).abs() < 1e-15);
        }
    }
}
