//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on failure.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::{lift, reference_domain, reference_pattern, reference_problem, reference_stream, rel};
use conical_chaplygin::edge_flow::{critical_angles, Side, Wing};
use conical_chaplygin::grid::{Grid, GridOptions};
use conical_chaplygin::polar::{deflect, wave_angle};
use conical_chaplygin::solver::{
    continuation_solve, newton, BoundaryData, Discretization, NewtonOptions, Problem, Schedule, Solution,
};
use conical_chaplygin::thin_wing;
use conical_chaplygin::verify::{
    audit, eps_monotone, exact_w, exact_w_gradient, max_difference, observed_order, ordered, smooth_perturbation,
    w_equation_residual, w_operator, AuditOptions, AuditReport, Region,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ETA: [f64; 3] = [0.2, -0.1, 1.7];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn failed_checks(report: &AuditReport) -> String {
    let bad: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if bad.is_empty() { "all checks pass".into() } else { format!("failing: {}", bad.join(", ")) }
}

fn shock_polar() -> Outcome {
    let s = deflect(2.0, 1.0, 0.0).unwrap();
    let identity = (s.along - 2.0).abs() < 1e-12 && s.across.abs() < 1e-12 && (s.sound_speed - 1.0).abs() < 1e-12;
    let s = deflect(2.0, 1.0, 10f64.to_radians()).unwrap();
    let errs = [rel(s.along, 1.815206), rel(s.across, 0.320072), rel(s.sound_speed, 0.630416)];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(
        identity && worst < 1e-5,
        format!("(u1, v1, c1) = ({:.9}, {:.9}, {:.9}), worst relative error {worst:.2e}", s.along, s.across, s.sound_speed),
    )
}

fn thresholds() -> Outcome {
    let beta = wave_angle(2.0, 1.0).unwrap();
    let low = deflect(2.0, 1.0, beta - 1e-6).unwrap().sound_speed;
    let high = deflect(2.0, 1.0, beta - PI / 2.0 + 1e-6).unwrap().sound_speed;
    outcome(low < 1e-4 && high > 1e4, format!("c1 near concentration {low:.3e}, near cavitation {high:.3e}"))
}

fn critical() -> Outcome {
    let angles = critical_angles(&reference_stream());
    let (s0, s0p) = (angles.shock_sweep().unwrap().to_degrees(), angles.rarefaction_sweep().unwrap().to_degrees());
    let passed = (angles.shock_incidence - PI / 6.0).abs() < 1e-12
        && (angles.rarefaction_incidence - PI / 3.0).abs() < 1e-12
        && (s0 - 61.56).abs() < 0.01
        && (s0p - 59.49).abs() < 0.01;
    outcome(passed, format!("sigma0 = {s0:.6} deg, sigma0' = {s0p:.6} deg"))
}

fn geometry() -> Outcome {
    let pat = reference_pattern(Side::Shock);
    let (inf, sig, line) = (pat.free_stream, pat.downstream.unwrap(), pat.wave_line.unwrap());
    let p = pat.points;
    let through_p5 = line.residual([0.0, 3f64.sqrt()]).abs();
    let (_, disc) = inf.tangency(&line).unwrap();
    let scale = pat.bernoulli * lift(p.p1).powi(2);
    let on_cones = (inf.implicit(p.p1).abs() / scale).max(sig.implicit(p.p1).abs() / scale);
    let near = (p.p1[0] + 0.3507).abs() < 1e-4 && (p.p1[1] - 0.1230).abs() < 1e-4;
    let order = p.p4[1] < p.p0[1] && (p.p4[1] - 0.4058).abs() < 1e-4 && (p.p0[1] - 0.5414).abs() < 1e-4;
    outcome(
        through_p5 < 1e-9 && disc.abs() < 1e-6 && on_cones < 1e-6 && near && order,
        format!(
            "P5 residual {through_p5:.1e}, discriminant {disc:.1e}, P1 = ({:.6}, {:.6}) residual {on_cones:.1e}, P4 = {:.6} < P0 = {:.6}",
            p.p1[0], p.p1[1], p.p4[1], p.p0[1]
        ),
    )
}

fn exact_recovery() -> Outcome {
    let linear = |xi: [f64; 2]| ETA[0] * xi[0] + ETA[1] * xi[1] + ETA[2];
    let mut worst = 0.0f64;
    for h in [0.04, 0.02, 0.01] {
        let problem = reference_problem(h, BoundaryData::Linear { eta: ETA });
        let s = continuation_solve(&problem, &Schedule::down_to(1e-3)).unwrap().solution;
        for (n, v) in problem.disc.grid().nodes().iter().zip(&s.psi) {
            worst = worst.max((v - linear(n.xi)).abs());
        }
    }
    let problem = reference_problem(0.01, BoundaryData::Linear { eta: ETA });
    let nodes = problem.disc.grid().nodes();
    let opts = NewtonOptions::default();
    let bump = smooth_perturbation(&problem.disc, 1e-3, 42).unwrap();
    let start: Vec<f64> = nodes.iter().zip(&bump).map(|(n, d)| linear(n.xi) + d).collect();
    let smooth = newton(&problem, &start, 0.0, 1.0, &opts).unwrap().1.iterations;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let noisy: Vec<f64> = nodes.iter().map(|n| linear(n.xi) + 1e-3 * (2.0 * rng.random::<f64>() - 1.0)).collect();
    let white = newton(&problem, &noisy, 0.0, 1.0, &opts).map(|r| r.1.iterations.to_string()).unwrap_or("-".into());
    outcome(
        worst < 1e-9 && smooth <= 3,
        format!(
            "max error {worst:.1e} over h = 0.04, 0.02, 0.01; Newton from a smooth 1e-3 perturbation: {smooth} iterations (pointwise noise: {white})"
        ),
    )
}

fn manufactured() -> Outcome {
    let w = |x: [f64; 2]| exact_w(ETA, x) + 0.05 * x[0] * x[0];
    let study = |h: f64| {
        let problem = reference_problem(h, BoundaryData::Linear { eta: ETA });
        let grid = problem.disc.grid();
        let wv: Vec<f64> = grid.nodes().iter().map(|n| w(n.xi)).collect();
        let bw: Vec<f64> = grid.boundary().iter().map(|b| w(b.xi)).collect();
        let e = 1e-4;
        let exact = |x: [f64; 2]| {
            let g = exact_w_gradient(ETA, x);
            let d = |k: usize| {
                let (mut a, mut b) = (x, x);
                a[k] += e;
                b[k] -= e;
                let (ga, gb) = (exact_w_gradient(ETA, a), exact_w_gradient(ETA, b));
                [(ga[0] - gb[0]) / (2.0 * e), (ga[1] - gb[1]) / (2.0 * e)]
            };
            let (d0, d1) = (d(0), d(1));
            w_operator(x, w(x), [g[0] + 0.1 * x[0], g[1]], [d0[0] + 0.1, 0.5 * (d0[1] + d1[0]), d1[1]], 1.0)
        };
        w_equation_residual(&problem.disc, &wv, &bw, 1.0)
            .iter()
            .zip(grid.nodes())
            .filter_map(|(r, n)| r.map(|r| (r - exact(n.xi)).abs()))
            .fold(0.0f64, f64::max)
    };
    let (e1, e2, e3) = (study(0.04), study(0.02), study(0.01));
    let (o1, o2) = (observed_order(e1, e2, 2.0), observed_order(e2, e3, 2.0));
    outcome(o1 >= 1.8 && o2 >= 1.8, format!("errors {e1:.2e}, {e2:.2e}, {e3:.2e}; orders {o1:.4}, {o2:.4}"))
}

struct Reference {
    problem: Problem,
    solution: Solution,
    ladder: Vec<Solution>,
}

fn reference_solve() -> (Reference, Outcome) {
    let t = Instant::now();
    let problem = reference_problem(0.01, BoundaryData::Sonic { shift: 0.0 });
    let out = continuation_solve(&problem, &Schedule::down_to(1e-3)).unwrap();
    let dom = reference_domain();
    let report = audit(&problem, &out.solution, &Region::Extended(&dom), &AuditOptions::default()).unwrap();
    let get = |n: &str| report.get(n).unwrap().value;
    let detail = format!(
        "{} unknowns in {:.1} s; margin {:.2e}, L2 {:.4}, sandwich {:.1e}, gradient excess {:.2e}; {}",
        problem.disc.grid().unknown_count(),
        t.elapsed().as_secs_f64(),
        get("supersonic_margin"),
        get("ellipticity"),
        get("sandwich"),
        get("gradient_maximum"),
        failed_checks(&report)
    );
    let passed = report.passed();
    (Reference { problem, solution: out.solution, ladder: out.ladder }, outcome(passed, detail))
}

fn comparison(r: &Reference) -> Outcome {
    let raised = Problem::new(r.problem.disc.clone(), r.problem.data.shifted(0.01));
    let upper = continuation_solve(&raised, &Schedule::down_to(1e-3)).unwrap().solution;
    let order = ordered(&r.solution, &upper, 1e-8);
    let mono = eps_monotone(&r.ladder, 1e-8);
    outcome(
        order.passed && mono.passed,
        format!(
            "min(raised - base) = {:.3e}; largest rise along the eps ladder ({} rungs) {:.1e}",
            order.value,
            r.ladder.len(),
            mono.value
        ),
    )
}

fn wedge_problem(wedge_deg: f64, h: f64) -> (conical_chaplygin::grid::WedgeDomain, Problem) {
    let wing = Wing::thin(30f64.to_radians(), wedge_deg.to_radians()).unwrap();
    let dom = thin_wing::domain(&reference_stream(), &wing).unwrap();
    let grid = Grid::build(&dom, GridOptions::new(h)).unwrap();
    let problem = Problem::new(Discretization::new(grid), BoundaryData::Sonic { shift: 0.0 });
    (dom, problem)
}

fn thin_wing_reduction(r: &Reference) -> Outcome {
    let schedule = Schedule::down_to(1e-3);
    let (_, zero) = wedge_problem(0.0, 0.01);
    let s = continuation_solve(&zero, &schedule).unwrap().solution;
    let (gz, gf) = (zero.disc.grid(), r.problem.disc.grid());
    let mut flat_gap = 0.0f64;
    for node in gz.nodes() {
        let a = gz.value_at(node.index, &s.psi, &s.boundary).unwrap();
        let b = gf.value_at(node.index, &r.solution.psi, &r.solution.boundary).unwrap();
        flat_gap = flat_gap.max((a - b).abs());
    }

    let mut corner = Vec::new();
    let mut audited = None;
    for h in [0.02, 0.01, 0.005] {
        let (dom, problem) = wedge_problem(-5.0, h);
        let s = continuation_solve(&problem, &schedule).unwrap().solution;
        corner.push(problem.disc.grid().value_at([0, 0], &s.psi, &s.boundary).unwrap());
        if h == 0.01 {
            audited = Some(audit(&problem, &s, &Region::Wedge(&dom), &AuditOptions::default()).unwrap());
        }
    }
    let report = audited.unwrap();
    let order = observed_order((corner[0] - corner[1]).abs(), (corner[1] - corner[2]).abs(), 2.0);
    outcome(
        flat_gap < 1e-8 && report.passed() && order >= 1.0,
        format!(
            "zero wedge vs flat {flat_gap:.1e}; wedge -5 deg audit: {}; order at the root chord {order:.3}",
            failed_checks(&report)
        ),
    )
}

fn uniqueness(r: &Reference) -> Outcome {
    let mut other = Schedule::down_to(1e-3);
    other.mu_steps = vec![0.0, 0.1, 0.3, 0.6, 1.0];
    other.eps_steps = vec![5e-2, 1e-2, 2e-3, 1e-3];
    let s = continuation_solve(&r.problem, &other).unwrap().solution;
    let d = max_difference(&s, &r.solution);
    outcome(d < 1e-7, format!("max difference between schedules {d:.2e}"))
}

fn main() -> ExitCode {
    let mut results = vec![
        ("1 shock polar", shock_polar()),
        ("2 concentration and cavitation", thresholds()),
        ("3 critical angles", critical()),
        ("4 geometry", geometry()),
        ("5 exact-solution recovery", exact_recovery()),
        ("6 manufactured convergence", manufactured()),
    ];
    let (reference, seven) = reference_solve();
    results.push(("7 reference solve and audit", seven));
    results.push(("8 comparison principle", comparison(&reference)));
    results.push(("9 thin-wing reduction", thin_wing_reduction(&reference)));
    results.push(("10 schedule independence", uniqueness(&reference)));

    let mut all = true;
    for (name, o) in &results {
        all &= o.passed;
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if all { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
