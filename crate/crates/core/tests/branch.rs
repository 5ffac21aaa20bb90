use serrin::branch::*;
use serrin::forward::{residual_g, CylinderGrid, GridSpec};
use serrin::modes::{MultiIndex, SymmetricTrigPolynomial};
use serrin::specfun::{find_lambda_star, sigma_prime};
use serrin::Execution;

fn opts(tol: f64) -> NewtonOptions {
    NewtonOptions {
        tol,
        ..NewtonOptions::default()
    }
}

fn first_shell(p: &BranchPoint) -> f64 {
    p.mu.coeff(MultiIndex::first_shell(p.mu.m()).entries()).unwrap()
}

#[test]
fn transversality_values() {
    // For n = 1, tanh λ* = 1/λ* makes σ'(λ*) equal to λ* itself.
    let cases = [
        (1, 1.1996786402577338),
        (2, 0.49324849538573313),
        (3, 0.290208671464568),
    ];
    for (n, want) in cases {
        let got = transversality_check(n).unwrap();
        assert!((got - want).abs() < 1e-11, "n={n}: {got}");
    }
}

#[test]
fn kernel_vector_spans_first_shell() {
    for m in 1..=3 {
        let v = kernel_vector(m, 3).unwrap();
        let nonzero: Vec<_> = v.iter().filter(|(_, c)| *c != 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].0.entries(), MultiIndex::first_shell(m).entries());
        let t = vec![0.0; m];
        assert_eq!(v.eval(&t), m as f64);
    }
}

#[test]
fn jacobian_at_origin() {
    for n in 1..=3 {
        let grid = CylinderGrid::new(GridSpec::default_for(n, 1)).unwrap();
        let lambda = find_lambda_star(n).unwrap();
        let zero = SymmetricTrigPolynomial::zeros(1, 8).unwrap();
        let jac = reduced_jacobian(0.0, lambda, &zero, &grid, &NewtonOptions::default()).unwrap();
        let sv = jac.singular_values();
        assert!(sv.min() > 1e-2, "n={n}: {}", sv.min());
        // The λ column of the first-shell row is the crossing speed σ'(λ*).
        let want = sigma_prime(n, lambda).unwrap();
        assert!((jac[(0, 0)] - want).abs() < 1e-5, "n={n}: {} vs {want}", jac[(0, 0)]);
        let small = reduced_jacobian(1e-3, lambda, &zero, &grid, &NewtonOptions::default()).unwrap();
        assert!((small[(0, 0)] - want).abs() < 1e-3);
    }
}

#[test]
fn newton_near_bifurcation_is_quadratic() {
    let n = 2;
    let grid = CylinderGrid::new(GridSpec::default_for(n, 1)).unwrap();
    let star = find_lambda_star(n).unwrap();
    let zero = SymmetricTrigPolynomial::zeros(1, 8).unwrap();
    let mut ratios = Vec::new();
    for s in [1e-3, 2e-3, 4e-3] {
        let p = newton_correct(s, star, &zero, &grid, &opts(1e-12)).unwrap();
        let q = newton_correct(-s, star, &zero, &grid, &opts(1e-12)).unwrap();
        assert!(p.iters <= 3);
        assert!(p.residual < 1e-10);
        assert_eq!(first_shell(&p), 0.0);
        // λ_s - λ* = c s² + O(s⁴), and the odd part is tiny.
        ratios.push((p.lambda - star) / (s * s));
        assert!((p.lambda - q.lambda).abs() < 1e-9);
    }
    for r in &ratios[1..] {
        assert!((r - ratios[0]).abs() < 1e-3 * ratios[0].abs(), "{ratios:?}");
    }
}

#[test]
fn traced_branch_m1() {
    let n = 2;
    let grid = CylinderGrid::new(GridSpec::default_for(n, 1)).unwrap();
    let trace = trace_branch(&grid, 0.2, 0.02, &NewtonOptions::default()).unwrap();
    assert!(trace.diagnostics.is_empty(), "{:?}", trace.diagnostics);
    assert_eq!(trace.points.len(), 21);
    let star = find_lambda_star(n).unwrap();
    for w in trace.points.windows(2) {
        assert!(w[0].s < w[1].s);
    }
    for p in &trace.points {
        assert!(p.residual < 1e-8, "s={} residual {:e}", p.s, p.residual);
        assert_eq!(first_shell(p), 0.0);
        let (min, _) = p.profile().sampled_minimum(64);
        assert!(min > 0.0);
        let back = BranchPoint::from_json_line(&p.to_json_line()).unwrap();
        assert_eq!(&back, p);
    }
    let origin = &trace.points[10];
    assert_eq!(origin.s, 0.0);
    assert!((origin.lambda - star).abs() < 1e-12);

    let mut worst: f64 = 0.0;
    for p in &trace.points[11..] {
        let mirror = trace.points.iter().find(|q| q.s == -p.s).unwrap();
        worst = worst.max((p.lambda - mirror.lambda).abs());
    }
    println!("max |λ(s) - λ(-s)| over the trace: {worst:e}");

    // A refined grid sees the same surface at the far end of the branch.
    let far = trace.points.last().unwrap();
    let fine = CylinderGrid::new(grid.spec().refined()).unwrap();
    let v = kernel_vector(1, 8).unwrap().axpy(1.0, &far.mu).unwrap().scaled(far.s);
    let g = residual_g(far.lambda, &v, &fine, Execution::default()).unwrap();
    assert!(g.max_abs_coeff() < 1e-6, "{:e}", g.max_abs_coeff());
}

#[test]
fn branch_point_m2() {
    let n = 2;
    let grid = CylinderGrid::new(GridSpec::new(n, 2, 3, 16, 14)).unwrap();
    let zero = SymmetricTrigPolynomial::zeros(2, 3).unwrap();
    let star = find_lambda_star(n).unwrap();
    let p = newton_correct(0.02, star, &zero, &grid, &NewtonOptions::default()).unwrap();
    assert!(p.residual < 1e-8);
    assert_eq!(first_shell(&p), 0.0);
    assert!(p.profile().sampled_minimum(32).0 > 0.0);
}

#[test]
fn zero_extent_trace_is_single_point() {
    let grid = CylinderGrid::new(GridSpec::default_for(1, 1)).unwrap();
    let trace = trace_branch(&grid, 0.0, 0.02, &NewtonOptions::default()).unwrap();
    assert_eq!(trace.points.len(), 1);
    assert_eq!(trace.points[0].s, 0.0);
    assert!(trace_branch(&grid, 0.1, 0.0, &NewtonOptions::default()).is_err());
    assert!(trace_branch(&grid, -1.0, 0.1, &NewtonOptions::default()).is_err());
}

#[test]
fn trivial_branch_is_exact() {
    let grid = CylinderGrid::new(GridSpec::default_for(3, 1)).unwrap();
    let res = trivial_branch_residuals(&[0.4, 1.0, 1.9, 4.0], &grid, Execution::Sequential).unwrap();
    assert!(res.iter().all(|r| *r < 1e-9), "{res:?}");
}

#[test]
fn json_line_rejects_first_shell_component() {
    let grid = CylinderGrid::new(GridSpec::default_for(1, 1)).unwrap();
    let mut p = trace_branch(&grid, 0.0, 0.1, &NewtonOptions::default()).unwrap().points.remove(0);
    p.mu.set_coeff(&[1], 1e-3).unwrap();
    assert!(BranchPoint::from_json_line(&p.to_json_line()).is_err());
    assert!(BranchPoint::from_json_line("{").is_err());
}
