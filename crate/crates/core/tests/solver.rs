mod common;

use common::{lift, reference_problem};
use conical_chaplygin::solver::coefficients::{coefficients, sound_sq};
use conical_chaplygin::solver::{
    continuation_solve, newton, scaled_residual, solve_linear, BoundaryData, NewtonOptions, Schedule,
    SolveError,
};
use conical_chaplygin::verify::smooth_perturbation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ETA: [f64; 3] = [0.1, 0.05, 1.4];

fn linear(xi: [f64; 2]) -> f64 {
    ETA[0] * xi[0] + ETA[1] * xi[1] + ETA[2]
}

#[test]
fn coefficient_examples() {
    for mu in [0.0, 0.3, 1.0] {
        let c = coefficients([0.0, 0.0], 2f64.sqrt(), [0.0, 0.0], mu);
        assert!((c.sound_sq - 1.0).abs() < 1e-15);
        assert!((c.a11 - 1.0).abs() < 1e-15 && (c.a22 - 1.0).abs() < 1e-15 && c.a12 == 0.0);
    }
    let c = coefficients([0.0, 0.0], 1.5, [0.1, 0.0], 1.0);
    assert!((c.sound_sq - 1.26).abs() < 1e-14);
    assert!((c.a11 - 1.25).abs() < 1e-14);
    assert!(c.a12.abs() < 1e-15);
    assert!((c.a22 - 1.26).abs() < 1e-14);
}

#[test]
fn linear_principal_part_at_zero_mu() {
    let (xi, psi, p) = ([0.3, -0.2], 1.3, [0.2, 0.7]);
    let c = coefficients(xi, psi, p, 0.0);
    let a2 = sound_sq(xi, psi, p);
    assert!((c.a11 - a2 * (1.0 + xi[0] * xi[0])).abs() < 1e-15);
    assert!((c.a12 - a2 * xi[0] * xi[1]).abs() < 1e-15);
    assert!((c.a22 - a2 * (1.0 + xi[1] * xi[1])).abs() < 1e-15);
}

#[test]
fn linear_fields_have_zero_residual() {
    let problem = reference_problem(0.02, BoundaryData::Linear { eta: ETA });
    let b = problem.boundary_values(0.0);
    let psi: Vec<f64> = problem.disc.grid().nodes().iter().map(|n| linear(n.xi)).collect();
    for mu in [0.0, 0.5, 1.0] {
        let r = problem.disc.residual(&psi, &b, mu);
        assert!(r.iter().all(|v| v.abs() < 1e-9), "mu {mu}: {:e}", r.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
}

#[test]
fn quadratic_fields_are_differentiated_exactly() {
    let q = |xi: [f64; 2]| 1.4 + 0.01 * xi[0] * xi[0];
    let problem = reference_problem(0.05, BoundaryData::Sonic { shift: 0.0 });
    let grid = problem.disc.grid();
    let psi: Vec<f64> = grid.nodes().iter().map(|n| q(n.xi)).collect();
    let b: Vec<f64> = grid.boundary().iter().map(|p| q(p.xi)).collect();
    let r = problem.disc.residual(&psi, &b, 1.0);
    for (node, got) in grid.nodes().iter().zip(r) {
        let grad = [0.02 * node.xi[0], 0.0];
        let want = coefficients(node.xi, q(node.xi), grad, 1.0).apply([0.02, 0.0, 0.0]);
        // short arms amplify rounding by the inverse of their length
        let shortest = node.arms.iter().map(|a| a.fraction).fold(1.0, f64::min);
        let tol = if shortest == 1.0 { 1e-12 } else { 1e-12 / shortest };
        assert!((got - want).abs() < tol, "{:?}: {got} vs {want}", node.xi);
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let problem = reference_problem(0.05, BoundaryData::Sonic { shift: 0.0 });
    let grid = problem.disc.grid();
    let b = problem.boundary_values(0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let psi: Vec<f64> = grid.nodes().iter().map(|n| lift(n.xi) + 0.1 + 0.01 * rng.random::<f64>()).collect();
    let n = psi.len();
    let mut dense = vec![0.0; n * n];
    for t in problem.disc.jacobian(&psi, &b, 0.7) {
        dense[t.row * n + t.col] += t.val;
    }
    for _ in 0..25 {
        let col = rng.random_range(0..n);
        let d = 1e-6;
        let (mut up, mut down) = (psi.clone(), psi.clone());
        up[col] += d;
        down[col] -= d;
        let (ru, rd) = (problem.disc.residual(&up, &b, 0.7), problem.disc.residual(&down, &b, 0.7));
        let column_scale = (0..n).map(|row| dense[row * n + col].abs()).fold(1.0, f64::max);
        for row in 0..n {
            let fd = (ru[row] - rd[row]) / (2.0 * d);
            assert!((fd - dense[row * n + col]).abs() < 1e-6 * column_scale, "({row}, {col})");
        }
    }
}

#[test]
fn constant_data_gives_a_constant_field() {
    let problem = reference_problem(0.02, BoundaryData::Linear { eta: [0.0, 0.0, 1.7] });
    let s = solve_linear(&problem, 0.0).unwrap();
    assert!(s.psi.iter().all(|v| (v - 1.7).abs() < 1e-12));
}

#[test]
fn linear_data_is_recovered_by_the_linear_solve() {
    let problem = reference_problem(0.02, BoundaryData::Linear { eta: ETA });
    let s = solve_linear(&problem, 0.0).unwrap();
    for (node, v) in problem.disc.grid().nodes().iter().zip(&s.psi) {
        assert!((v - linear(node.xi)).abs() < 1e-11);
    }
}

#[test]
fn linear_solve_obeys_the_maximum_principle() {
    let problem = reference_problem(0.02, BoundaryData::Sonic { shift: 0.0 });
    let s = solve_linear(&problem, 1e-2).unwrap();
    let lo = s.boundary.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = s.boundary.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(s.psi.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    assert!(lo >= 1.0 + 1e-2 - 1e-15);
}

#[test]
fn newton_from_the_exact_field_takes_no_step() {
    let problem = reference_problem(0.02, BoundaryData::Linear { eta: ETA });
    let psi: Vec<f64> = problem.disc.grid().nodes().iter().map(|n| linear(n.xi)).collect();
    let (s, report) = newton(&problem, &psi, 0.0, 1.0, &NewtonOptions::default()).unwrap();
    assert_eq!(report.iterations, 0);
    assert_eq!(s.psi, psi);
}

#[test]
fn newton_recovers_from_a_small_perturbation() {
    let problem = reference_problem(0.02, BoundaryData::Linear { eta: ETA });
    let nodes = problem.disc.grid().nodes();
    let bump = smooth_perturbation(&problem.disc, 1e-3, 42).unwrap();
    let start: Vec<f64> = nodes.iter().zip(&bump).map(|(n, d)| linear(n.xi) + d).collect();
    let opts = NewtonOptions::default();
    let (s, report) = newton(&problem, &start, 0.0, 1.0, &opts).unwrap();
    assert!(report.iterations <= 3, "{} iterations", report.iterations);
    assert!(report.residual <= opts.tolerance);
    for (n, v) in nodes.iter().zip(&s.psi) {
        assert!((v - linear(n.xi)).abs() < 1e-9);
    }
}

#[test]
fn continuation_recovers_linear_data_on_any_schedule() {
    let problem = reference_problem(0.02, BoundaryData::Linear { eta: ETA });
    let mut other = Schedule::down_to(1e-3);
    other.mu_steps = vec![0.0, 0.5, 1.0];
    other.eps_steps = vec![1e-2, 1e-3];
    for schedule in [Schedule::down_to(1e-3), other] {
        let out = continuation_solve(&problem, &schedule).unwrap();
        for (n, v) in problem.disc.grid().nodes().iter().zip(&out.solution.psi) {
            assert!((v - linear(n.xi)).abs() < 1e-9);
        }
    }
}

#[test]
fn physical_case_converges_and_stays_elliptic() {
    let problem = reference_problem(0.01, BoundaryData::Sonic { shift: 0.0 });
    let schedule = Schedule::down_to(1e-3);
    let out = continuation_solve(&problem, &schedule).unwrap();
    let s = &out.solution;
    assert_eq!((s.mu, s.eps), (1.0, 1e-3));
    assert!(scaled_residual(&problem, &s.psi, &s.boundary, 1.0) <= schedule.newton.tolerance);
    for (n, v) in problem.disc.grid().nodes().iter().zip(&s.psi) {
        assert!(v - lift(n.xi) > 0.0);
    }
    let at = |e: f64| out.ladder.iter().find(|l| l.eps == e).unwrap();
    let (coarse, fine) = (at(1e-2), at(1e-3));
    assert!(fine.psi.iter().zip(&coarse.psi).all(|(f, c)| *f <= c + 1e-8));
}

#[test]
fn raised_data_gives_a_raised_field() {
    let lower = reference_problem(0.02, BoundaryData::Sonic { shift: 0.0 });
    let upper = reference_problem(0.02, BoundaryData::Sonic { shift: 0.01 });
    let schedule = Schedule::down_to(1e-3);
    let a = continuation_solve(&lower, &schedule).unwrap().solution;
    let b = continuation_solve(&upper, &schedule).unwrap().solution;
    assert!(a.psi.iter().zip(&b.psi).all(|(l, u)| u - l >= -1e-8));
}

#[test]
fn invalid_schedules_are_rejected() {
    let problem = reference_problem(0.05, BoundaryData::Sonic { shift: 0.0 });
    let mut s = Schedule::default();
    s.mu_steps = vec![0.0, 0.5];
    assert!(matches!(continuation_solve(&problem, &s), Err(SolveError::InvalidSchedule(_))));
    let mut s = Schedule::default();
    s.eps_steps = vec![1e-3, 1e-2];
    assert!(matches!(continuation_solve(&problem, &s), Err(SolveError::InvalidSchedule(_))));
}

#[test]
fn exhausted_newton_reports_nonconvergence() {
    let problem = reference_problem(0.05, BoundaryData::Sonic { shift: 0.0 });
    let start = solve_linear(&problem, 1e-3).unwrap().psi;
    let opts = NewtonOptions { max_iterations: 1, tolerance: 1e-300, ..NewtonOptions::default() };
    assert!(matches!(newton(&problem, &start, 1e-3, 1.0, &opts), Err(SolveError::NonConvergence { .. })));
}
