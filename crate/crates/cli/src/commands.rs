use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use conical_chaplygin::conic_geometry::{build_pattern, WavePattern};
use conical_chaplygin::edge_flow::{self, Side};
use conical_chaplygin::gas::FreeStream;
use conical_chaplygin::grid::{Domain, ExtendedDomain, Grid, GridError, GridOptions, WedgeDomain};
use conical_chaplygin::post::{self, Frame};
use conical_chaplygin::solver::{continuation_solve, BoundaryData, Discretization, Problem, SolveError, Solution};
use conical_chaplygin::verify::{self, AuditOptions, AuditReport, Region, VerifyError};
use conical_chaplygin::{polar, thin_wing};
use log::info;
use serde::{Deserialize, Serialize};

use crate::config::{validation, CaseConfig, Resolution};
use crate::CliError;

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, text).map_err(io(path))
}

fn emit(config: &CaseConfig, name: &str, text: &str, save: bool) -> Result<(), CliError> {
    print!("{text}");
    if save {
        write(&config.out.join(name), text)?;
    }
    Ok(())
}

fn deg(x: f64) -> f64 {
    x.to_degrees()
}

fn optional(v: Result<f64, impl std::fmt::Display>) -> String {
    match v {
        Ok(x) => format!("{:.6}", deg(x)),
        Err(e) => format!("none ({e})"),
    }
}

pub fn regimes(config: &CaseConfig, save: bool) -> Result<(), CliError> {
    config.validate()?;
    let fs = config.free_stream()?;
    let wing = config.wing()?;
    let crit = edge_flow::critical_angles(&fs);
    let mut out = String::new();
    let _ = writeln!(out, "c_inf = {:.12}", fs.sound_speed());
    let _ = writeln!(out, "B_inf = {:.12}", fs.bernoulli());
    let _ = writeln!(out, "alpha0_deg = {:.6}", deg(crit.shock_incidence));
    let _ = writeln!(out, "alpha0_prime_deg = {:.6}", deg(crit.rarefaction_incidence));
    let _ = writeln!(out, "sigma0_deg = {}", optional(crit.shock_sweep()));
    let _ = writeln!(out, "sigma0_prime_deg = {}", optional(crit.rarefaction_sweep()));
    match edge_flow::projected_incidence(&fs, &wing) {
        Ok(p) => {
            let _ = writeln!(out, "alpha_n_deg = {:.6}", deg(p.incidence));
            let _ = writeln!(out, "beta_n_deg = {:.6}", deg(p.wave_angle));
        }
        Err(e) => {
            let _ = writeln!(out, "alpha_n_deg = none ({e})");
        }
    }
    let att = edge_flow::attachment(&fs, &wing);
    let _ = writeln!(out, "shock = {:?}", att.shock);
    let _ = writeln!(out, "rarefaction = {:?}", att.rarefaction);
    if !wing.is_flat() {
        let _ = writeln!(out, "thin_admissible = {}", thin_wing::admissible(&fs, &wing));
    }
    for side in [Side::Shock, Side::Rarefaction] {
        let name = format!("{side:?}").to_lowercase();
        match edge_flow::downstream_state(&fs, &wing, side) {
            Ok(d) => {
                let v = d.velocity;
                let _ = writeln!(
                    out,
                    "{name}_downstream = velocity ({:.9}, {:.9}, {:.9}) normal_speed {:.9} sound_speed {:.9}",
                    v[0], v[1], v[2], d.normal_speed, d.sound_speed
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{name}_downstream = none ({e})");
            }
        }
    }
    emit(config, "regimes.txt", &out, save)
}

pub fn polar(config: &CaseConfig, save: bool) -> Result<(), CliError> {
    config.validate()?;
    let fs = config.free_stream()?;
    let (u0, c0, alpha) = (fs.speed(), fs.sound_speed(), fs.incidence());
    let mut out = String::new();
    let beta = polar::wave_angle(u0, c0).map_err(validation)?;
    let _ = writeln!(out, "wave_angle_deg = {:.9}", deg(beta));
    let _ = writeln!(out, "regime = {:?}", polar::classify(u0, c0, alpha).map_err(validation)?);
    let s = polar::deflect(u0, c0, alpha).map_err(validation)?;
    let _ = writeln!(out, "u1 = {:.12}\nv1 = {:.12}\nc1 = {:.12}", s.along, s.across, s.sound_speed);
    emit(config, "polar.txt", &out, save)
}

pub fn pattern(config: &CaseConfig) -> Result<WavePattern, CliError> {
    config.validate()?;
    let fs = config.free_stream()?;
    let wing = config.wing()?;
    if wing.is_flat() {
        build_pattern(&fs, &wing, config.side)
    } else {
        thin_wing::pattern(&fs, &wing)
    }
    .map_err(validation)
}

pub fn geometry(config: &CaseConfig, save: bool) -> Result<(), CliError> {
    let p = pattern(config)?;
    let text = post::geometry_csv(&p.points.labelled());
    emit(config, "geometry.csv", &text, save)
}

enum Built {
    Extended(ExtendedDomain),
    Wedge(WedgeDomain),
}

impl Built {
    fn region(&self) -> Region<'_> {
        match self {
            Built::Extended(d) => Region::Extended(d),
            Built::Wedge(d) => Region::Wedge(d),
        }
    }

    fn domain(&self) -> &dyn Domain {
        match self {
            Built::Extended(d) => d,
            Built::Wedge(d) => d,
        }
    }
}

/// Everything needed to solve or audit one case.
pub struct Case {
    pub config: CaseConfig,
    pub fs: FreeStream,
    built: Built,
    pub problem: Problem,
}

impl Case {
    pub fn new(config: &CaseConfig) -> Result<Self, CliError> {
        let pattern = pattern(config)?;
        let built = if pattern.wedge == 0.0 {
            Built::Extended(ExtendedDomain::new(pattern).map_err(validation)?)
        } else {
            Built::Wedge(WedgeDomain::new(pattern))
        };
        let h = match config.resolution {
            Resolution::Step(h) => h,
            Resolution::Across(n) => {
                let (lo, hi) = built.domain().bounding_box();
                (hi[0] - lo[0]).max(hi[1] - lo[1]) / n as f64
            }
        };
        let grid = Grid::build(built.domain(), GridOptions::new(h)).map_err(|e| match e {
            GridError::Resolution { .. } | GridError::InvalidStep(_) => validation(e),
            other => CliError::Validation(format!("grid: {other}")),
        })?;
        info!("grid h={h} unknowns={}", grid.unknown_count());
        let problem = Problem::new(Discretization::new(grid), BoundaryData::Sonic { shift: 0.0 });
        Ok(Self { config: config.clone(), fs: config.free_stream()?, built, problem })
    }

    pub fn region(&self) -> Region<'_> {
        self.built.region()
    }

    fn wedge(&self) -> f64 {
        self.region().pattern().wedge
    }

    fn stem(&self, eps: f64) -> String {
        let name = post::csv_name(&self.config.case, eps, self.problem.h());
        name.trim_end_matches(".csv").to_string()
    }

    fn audit(&self, solution: &Solution) -> Result<AuditReport, CliError> {
        let mut opts = AuditOptions::default();
        opts.envelope.seed = self.config.seed;
        opts.comparison_shift = self.config.comparison_shift;
        verify::audit(&self.problem, solution, &self.region(), &opts).map_err(|e| match e {
            VerifyError::Solve(s) => solve_error(s),
            other => CliError::Audit(other.to_string()),
        })
    }
}

pub fn solve_error(e: SolveError) -> CliError {
    match e {
        SolveError::NonConvergence { .. } | SolveError::Linear(_) => CliError::NonConvergence(e.to_string()),
        other => validation(other),
    }
}

/// Saved converged field: the case it came from and one `(i, j, psi)`
/// triple per unknown.
#[derive(Debug, Serialize, Deserialize)]
pub struct FieldFile {
    pub config: CaseConfig,
    pub h: f64,
    pub mu: f64,
    pub eps: f64,
    pub nodes: Vec<(i64, i64, f64)>,
    pub boundary: Vec<f64>,
}

impl FieldFile {
    fn new(case: &Case, solution: &Solution) -> Self {
        let nodes = case
            .problem
            .disc
            .grid()
            .nodes()
            .iter()
            .zip(&solution.psi)
            .map(|(n, &v)| (n.index[0], n.index[1], v))
            .collect();
        Self {
            config: case.config.clone(),
            h: case.problem.h(),
            mu: solution.mu,
            eps: solution.eps,
            nodes,
            boundary: solution.boundary.clone(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    /// Rebuilds the case and checks the stored nodes against its grid.
    fn restore(self, path: &Path) -> Result<(Case, Solution), CliError> {
        let mut config = self.config;
        config.resolution = Resolution::Step(self.h);
        let case = Case::new(&config)?;
        let grid = case.problem.disc.grid();
        let mismatch = || CliError::Io(format!("{}: field does not match the grid of its case", path.display()));
        if grid.nodes().len() != self.nodes.len() || grid.boundary().len() != self.boundary.len() {
            return Err(mismatch());
        }
        if grid.nodes().iter().zip(&self.nodes).any(|(n, &(i, j, _))| n.index != [i, j]) {
            return Err(mismatch());
        }
        let solution = Solution {
            psi: self.nodes.iter().map(|n| n.2).collect(),
            boundary: self.boundary,
            mu: self.mu,
            eps: self.eps,
        };
        Ok((case, solution))
    }
}

fn report_text(report: &AuditReport) -> String {
    let mut out = String::from("check,passed,value,limit,xi1,xi2\n");
    for c in &report.checks {
        let (x, y) = c.location.map_or((f64::NAN, f64::NAN), |p| (p[0], p[1]));
        let _ = writeln!(out, "{},{},{:e},{:e},{:e},{:e}", c.name, c.passed, c.value, c.limit, x, y);
    }
    let _ = writeln!(out, "overall,{},,,,", report.passed());
    out
}

fn export_files(case: &Case, solution: &Solution, dir: &Path, frame: Frame) -> Result<Vec<PathBuf>, CliError> {
    let field = post::reconstruct(&case.problem, solution, &case.fs, case.wedge(), frame);
    let stem = case.stem(solution.eps);
    let csv = dir.join(format!("{stem}.csv"));
    let vtk = dir.join(format!("{stem}.vtk"));
    fs::create_dir_all(dir).map_err(io(dir))?;
    post::write_csv(&field, &csv).map_err(|e| CliError::Io(e.to_string()))?;
    post::write_vtk(&field, &case.problem, &vtk).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(vec![csv, vtk])
}

pub fn solve(config: &CaseConfig) -> Result<(), CliError> {
    let case = Case::new(config)?;
    let outcome = continuation_solve(&case.problem, &config.schedule()).map_err(solve_error)?;
    let solution = &outcome.solution;
    let stem = case.stem(solution.eps);
    let dir = &config.out;

    let field = serde_json::to_string(&FieldFile::new(&case, solution)).expect("field serializes");
    write(&dir.join(format!("{stem}.field.json")), &field)?;
    let mut log = String::from("mu,eps,iteration,residual,damping\n");
    for r in &outcome.history {
        let _ = writeln!(log, "{},{:e},{},{:e},{}", r.mu, r.eps, r.iteration, r.residual, r.damping);
    }
    write(&dir.join(format!("{stem}.convergence.csv")), &log)?;
    export_files(&case, solution, dir, Frame::Plain)?;

    let report = case.audit(solution)?;
    let text = report_text(&report);
    write(&dir.join(format!("{stem}.audit.csv")), &text)?;
    print!("{text}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Audit("audit failed".into()))
    }
}

pub fn verify(field: &Path, config: &CaseConfig, save: bool) -> Result<(), CliError> {
    let mut file = FieldFile::read(field)?;
    file.config.seed = config.seed;
    let (case, solution) = file.restore(field)?;
    let report = case.audit(&solution)?;
    let text = report_text(&report);
    emit(config, &format!("{}.audit.csv", case.stem(solution.eps)), &text, save)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Audit("audit failed".into()))
    }
}

pub fn export(field: &Path, config: &CaseConfig, rotated: bool) -> Result<(), CliError> {
    let (case, solution) = FieldFile::read(field)?.restore(field)?;
    let frame = if rotated { Frame::Rotated { wedge: case.wedge() } } else { Frame::Plain };
    for p in export_files(&case, &solution, &config.out, frame)? {
        println!("{}", p.display());
    }
    Ok(())
}
