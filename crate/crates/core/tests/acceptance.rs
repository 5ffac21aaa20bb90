//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serrin::branch::{trace_branch, transversality_check, BranchPoint, NewtonOptions};
use serrin::forward::{neumann_trace, residual_g, solve_dirichlet, CylinderGrid, GridSpec, TorusSymmetry};
use serrin::geometry::{geometry_report, PeriodCell};
use serrin::modes::{ModeBasis, MultiIndex, SymmetricTrigPolynomial};
use serrin::specfun::{find_lambda_star, sigma, sigma_ode, sigma_prime};
use serrin::{Execution, Result};

const EXEC: Execution = Execution::Parallel;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

fn lambda_table() -> Result<Outcome> {
    let reference = [(1, 1.199), (2, 1.608), (3, 1.915)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, want) in reference {
        let got = find_lambda_star(n)?;
        let dev = (got - want).abs();
        pass &= dev < 5e-4;
        parts.push(format!("n={n} λ*={got:.10} |Δ|={dev:.2e}"));
    }
    outcome(pass, format!("{} (tol 5e-4, runtime < 1 s)", parts.join(", ")))
}

fn two_routes() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for rho in log_grid(1e-3, 40.0, 400) {
            worst = worst.max((sigma(n, rho)? - sigma_ode(n, rho)?).abs());
        }
    }
    outcome(worst < 1e-9, format!("max |σ_bessel - σ_ode| = {worst:.2e} over 3×400 points (tol 1e-9)"))
}

fn closed_forms() -> Result<Outcome> {
    let (mut e1, mut e3): (f64, f64) = (0.0, 0.0);
    for rho in log_grid(1e-3, 40.0, 400) {
        e1 = e1.max((sigma_ode(1, rho)? - (rho * rho.tanh() - 1.0)).abs());
        let coth = 1.0 / rho.tanh();
        e3 = e3.max((sigma(3, rho)? - (rho * coth - 2.0) / 3.0).abs());
    }
    outcome(
        e1 < 1e-12 && e3 < 1e-10,
        format!("n=1 ODE route vs ρ tanh ρ - 1: {e1:.2e} (tol 1e-12); n=3 vs (ρ coth ρ - 2)/3: {e3:.2e} (tol 1e-10)"),
    )
}

/// Largest `|FD_q - σ(λ|k|) δ_{kq}| / max(|σ|, 1)` over all directions `k`
/// with `|k|∞ ≤ 3` and output coefficients `q`.
fn frechet_error(grid: &CylinderGrid, lambda: f64) -> Result<f64> {
    let eps = 1e-5;
    let basis = ModeBasis::new(grid.m(), grid.degree())?;
    let mut worst: f64 = 0.0;
    for k in basis.indices().iter().filter(|k| k.entries().iter().all(|&e| e <= 3)) {
        let dir = SymmetricTrigPolynomial::mode(grid.m(), grid.degree(), k.entries())?;
        let gp = residual_g(lambda, &dir.scaled(eps), grid, EXEC)?;
        let gm = residual_g(lambda, &dir.scaled(-eps), grid, EXEC)?;
        let want = sigma(grid.n(), lambda * k.ell())?;
        for ((q, a), b) in gp.iter().zip(gm.coeffs()) {
            let fd = (a - b) / (2.0 * eps);
            let expect = if q == k { want } else { 0.0 };
            worst = worst.max((fd - expect).abs() / want.abs().max(1.0));
        }
    }
    Ok(worst)
}

fn frechet() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let star = find_lambda_star(n)?;
        let grids = [
            CylinderGrid::new(GridSpec::default_for(n, 1))?,
            CylinderGrid::new(GridSpec::new(n, 2, 3, 16, 14))?,
        ];
        for grid in &grids {
            let mut e: f64 = 0.0;
            for lambda in [1.0, star, 2.0] {
                e = e.max(frechet_error(grid, lambda)?);
            }
            parts.push(format!("n={n} m={}: {e:.1e}", grid.m()));
            worst = worst.max(e);
        }
    }
    outcome(worst < 1e-4, format!("max relative error {worst:.2e} (tol 1e-4) [{}]", parts.join(", ")))
}

fn exact_recovery() -> Result<Outcome> {
    let (mut eu, mut et, mut eop): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for m in 1..=2 {
        for n in 1..=3 {
            let grid = CylinderGrid::new(GridSpec::default_for(n, m))?;
            let nn = n as f64;
            for lambda in [0.5, 1.0, find_lambda_star(n)?, 3.0] {
                let phi = SymmetricTrigPolynomial::constant(m, grid.degree(), lambda)?;
                let sol = solve_dirichlet(&phi, &grid, EXEC)?;
                for p in 0..grid.torus_len() {
                    for (i, r) in grid.radial_nodes().iter().enumerate() {
                        let want = lambda * lambda * (1.0 - r * r) / (2.0 * nn);
                        eu = eu.max((sol.value(p, i) - want).abs());
                    }
                }
                let trace = neumann_trace(&sol)?;
                et = et.max(trace.axpy(1.0, &SymmetricTrigPolynomial::constant(m, grid.degree(), lambda / nn)?)?.max_abs_coeff());
                // The paraboloid satisfies the discrete equation itself.
                let op = serrin::forward::assemble_transformed_operator(&phi, &grid)?;
                let lu = op.apply(&sol.u);
                for (a, v) in lu.iter().enumerate() {
                    if a % grid.nr() != 0 {
                        eop = eop.max((v + 1.0).abs());
                    }
                }
            }
        }
    }
    outcome(
        eu < 1e-10 && et < 1e-9 && eop < 1e-9,
        format!("max |U - u_λ| = {eu:.2e} (tol 1e-10), max trace error {et:.2e} (tol 1e-9), max |L U + 1| = {eop:.2e}"),
    )
}

/// Least-squares fit of `λ = a + b s + c s²`; returns `a`.
fn quadratic_intercept(points: &[&BranchPoint]) -> f64 {
    let a = DMatrix::from_fn(points.len(), 3, |i, j| points[i].s.powi(j as i32));
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.lambda));
    let svd = a.svd(true, true);
    svd.solve(&y, 1e-14).expect("full rank")[0]
}

fn branch_validity(points: &[BranchPoint], diagnostics: &[String]) -> Result<Outcome> {
    let n = 2;
    let star = find_lambda_star(n)?;
    let mut residual: f64 = 0.0;
    let mut phi_min = f64::INFINITY;
    let mut shell: f64 = 0.0;
    let mut symmetry: f64 = 0.0;
    for p in points {
        residual = residual.max(p.residual);
        let phi = p.profile();
        phi_min = phi_min.min(phi.sampled_minimum(64).0);
        shell = shell.max(p.mu.coeff(MultiIndex::first_shell(1).entries()).unwrap().abs());
        // Evenness of the profile and of the solution on the unreduced torus.
        for i in 0..97 {
            let t = 0.07 * i as f64;
            symmetry = symmetry.max((phi.eval(&[t]) - phi.eval(&[-t])).abs());
        }
        let grid = CylinderGrid::new(p.grid.with_symmetry(TorusSymmetry::Full))?;
        let sol = solve_dirichlet(&phi, &grid, EXEC)?;
        let nt = grid.nt();
        for i in 0..nt {
            let (a, b) = (grid.reduced_of(&[i]), grid.reduced_of(&[(nt - i) % nt]));
            for r in 0..grid.nr() {
                symmetry = symmetry.max((sol.value(a, r) - sol.value(b, r)).abs());
            }
        }
    }
    let nonzero: Vec<&BranchPoint> = points.iter().filter(|p| p.s != 0.0).collect();
    let intercept = quadratic_intercept(&nonzero);
    let fit_err = (intercept - star).abs();
    let pass = diagnostics.is_empty()
        && points.len() == 11
        && residual < 1e-8
        && phi_min > 0.0
        && shell == 0.0
        && symmetry < 1e-10
        && fit_err < 1e-5;
    outcome(
        pass,
        format!(
            "{} points, max residual {residual:.2e} (tol 1e-8), min φ {phi_min:.4}, first-shell |μ| {shell:e}, \
             symmetry {symmetry:.2e} (tol 1e-10), fitted λ₀ - λ* = {:.2e} (tol 1e-5)",
            points.len(),
            intercept - star
        ),
    )
}

fn geometry(points: &[BranchPoint]) -> Result<(Outcome, Outcome)> {
    let cells = ["0:2", "0:1", "-1:3"].map(|c| PeriodCell::parse(c).expect("valid"));
    let (mut ratio, mut closure): (f64, f64) = (0.0, 0.0);
    let (mut margin, mut boundary, mut lap) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    let mut bound = 0.0;
    for p in points {
        for cell in &cells {
            let r = geometry_report(p, cell, EXEC)?;
            ratio = ratio.max((r.ratio - r.expected_ratio).abs());
            closure = closure.max(r.closure_residual.abs());
            margin = margin.min(r.p_margin);
            boundary = boundary.max(r.p_boundary_dev);
            lap = lap.min(r.p_laplacian_min - r.p_laplacian_bound);
            bound = r.p_laplacian_bound;
        }
    }
    let cheeger = Outcome {
        pass: ratio < 1e-6 && closure < 1e-8,
        detail: format!(
            "max |ratio - n/λ_s| = {ratio:.2e} (tol 1e-6) over {} points × {} cells, closure {closure:.2e} (tol 1e-8)",
            points.len(),
            cells.len()
        ),
    };
    let pfun = Outcome {
        pass: margin > 0.0 && boundary < 1e-7 && lap >= -1e-6,
        detail: format!(
            "min margin {margin:.2e} (> 0), boundary deviation {boundary:.2e} (tol 1e-7), \
             min ΔP - {bound:.3} = {lap:.2e} (≥ -1e-6)"
        ),
    };
    Ok((cheeger, pfun))
}

fn monotone_and_asymptotic() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let nn = n as f64;
        let values: Vec<f64> = log_grid(1e-3, 100.0, 2000).into_iter().map(|r| sigma(n, r)).collect::<Result<_>>()?;
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let large = (sigma(n, 200.0)? / 200.0 - 1.0 / nn).abs();
        let small = (sigma(n, 0.05)? + 1.0 / nn).abs();
        let slope = transversality_check(n)?;
        let ok = increasing && large < 0.01 && small < 0.01 && slope > 0.0 && sigma_prime(n, 1.0)? > 0.0;
        pass &= ok;
        parts.push(format!("n={n}: increasing={increasing}, |σ(200)/200 - 1/n|={large:.1e}, |σ(0.05) + 1/n|={small:.1e}, σ'(λ*)={slope:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn report(id: usize, name: &str, start: Instant, result: Result<Outcome>, failures: &mut usize) {
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(o) => {
            if !o.pass {
                *failures += 1;
            }
            println!("{} criterion {id} ({name}): {} [{secs:.2} s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        }
        Err(e) => {
            *failures += 1;
            println!("FAIL criterion {id} ({name}): error: {e} [{secs:.2} s]");
        }
    }
}

fn main() {
    let mut failures = 0;
    let t = Instant::now();
    report(1, "lambda-star table", t, lambda_table(), &mut failures);
    let t = Instant::now();
    report(2, "two-route dispersion", t, two_routes(), &mut failures);
    let t = Instant::now();
    report(3, "closed forms", t, closed_forms(), &mut failures);
    let t = Instant::now();
    report(4, "Fréchet derivative vs spectrum", t, frechet(), &mut failures);
    let t = Instant::now();
    report(5, "exact recovery", t, exact_recovery(), &mut failures);

    let t = Instant::now();
    let grid = CylinderGrid::new(GridSpec::default_for(2, 1)).expect("default grid");
    match trace_branch(&grid, 0.1, 0.02, &NewtonOptions::default()) {
        Ok(trace) => {
            report(6, "branch validity", t, branch_validity(&trace.points, &trace.diagnostics), &mut failures);
            let t = Instant::now();
            match geometry(&trace.points) {
                Ok((cheeger, pfun)) => {
                    report(7, "Cheeger identity", t, Ok(cheeger), &mut failures);
                    report(8, "P-function bound", t, Ok(pfun), &mut failures);
                }
                Err(e) => {
                    let msg = e.to_string();
                    report(7, "Cheeger identity", t, Err(e), &mut failures);
                    println!("FAIL criterion 8 (P-function bound): error: {msg}");
                    failures += 1;
                }
            }
        }
        Err(e) => {
            let msg = e.to_string();
            report(6, "branch validity", t, Err(e), &mut failures);
            for (id, name) in [(7, "Cheeger identity"), (8, "P-function bound")] {
                println!("FAIL criterion {id} ({name}): no branch: {msg}");
                failures += 1;
            }
        }
    }
    let t = Instant::now();
    report(9, "monotonicity and asymptotics", t, monotone_and_asymptotic(), &mut failures);

    println!("{} of 9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
