mod config;
mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use serrin::branch::{kernel_vector, trace_branch, BranchPoint, NewtonOptions};
use serrin::forward::{export_solution, neumann_trace, solve_dirichlet, CylinderGrid, GridSpec};
use serrin::geometry::{geometry_report, PeriodCell};
use serrin::modes::{ModeBasis, SymmetricTrigPolynomial};
use serrin::specfun::{dispersion_sample, find_lambda_star, sigma, sigma_prime};
use serrin::Execution;

use config::Overrides;

/// Three-decimal reference values of `λ*` for `n = 1, 2, 3`.
const REFERENCE_LAMBDA_STAR: [(u32, f64); 3] = [(1, 1.199), (2, 1.608), (3, 1.915)];

const VERIFY_RESIDUAL: f64 = 1e-8;
const VERIFY_RATIO: f64 = 1e-6;
const VERIFY_CLOSURE: f64 = 1e-8;
const VERIFY_P_BOUNDARY: f64 = 1e-7;
const VERIFY_LAPLACIAN: f64 = 1e-6;
const VERIFY_REFINED_TRACE: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "serrin", version, about = "Periodic solutions of Serrin's overdetermined problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate σ and σ' on a uniform grid (CSV).
    Dispersion {
        #[arg(long)]
        n: u32,
        /// `min:max`.
        #[arg(long, default_value = "0:10")]
        range: String,
        #[arg(long, default_value_t = 101)]
        count: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Bifurcation radii λ*(n).
    LambdaStar {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        n: Vec<u32>,
        /// Also write a CSV table here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Eigenvalues σ(λ|k|) of the linearized operator per cosine mode (CSV).
    Spectrum {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Defaults to λ*(n).
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// One Dirichlet solve and its Neumann trace (JSON).
    Forward {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Trace the bifurcating branch (JSON lines, plus SVG for m = 1).
    Branch {
        /// `key = value` file; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "degree")]
        degree: Option<u32>,
        #[arg(long)]
        nr: Option<usize>,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        s_max: Option<f64>,
        #[arg(long)]
        ds: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check Cheeger, divergence and gradient identities along a branch file.
    Verify {
        #[arg(long)]
        branch: PathBuf,
        /// Period cell `a1:b1,...` in units of π; repeatable. Defaults to the
        /// full period.
        #[arg(long, allow_hyphen_values = true)]
        cell: Vec<String>,
        /// Also re-solve each point on a doubled grid.
        #[arg(long)]
        refine: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a Dirichlet solution as JSON descriptor plus binary array.
    Export {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        #[arg(long, default_value = "solution")]
        stem: String,
    },
}

/// A profile `φ = λ + a v₀`, or one read from JSON, on a grid.
#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long = "degree")]
    degree: Option<u32>,
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// Defaults to λ*(n).
    #[arg(long)]
    lambda: Option<f64>,
    /// Coefficient of Σ cos t_j added to λ.
    #[arg(long, default_value_t = 0.0)]
    amplitude: f64,
    /// Coefficient map `{"m", "K", "coeffs"}`; replaces λ and amplitude.
    #[arg(long)]
    phi: Option<PathBuf>,
}

impl ProfileArgs {
    fn build(&self) -> Result<(SymmetricTrigPolynomial, CylinderGrid)> {
        let base = GridSpec::default_for(self.n, self.m);
        let loaded = match &self.phi {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let phi = SymmetricTrigPolynomial::from_json(&text)?;
                if phi.m() != self.m {
                    bail!("profile has m = {} but --m is {}", phi.m(), self.m);
                }
                Some(phi)
            }
            None => None,
        };
        let degree = self
            .degree
            .or(loaded.as_ref().map(|p| p.degree()))
            .unwrap_or(base.degree);
        let spec = GridSpec::new(
            self.n,
            self.m,
            degree,
            self.nr.unwrap_or(base.nr),
            self.nt.unwrap_or(base.nt),
        );
        let grid = CylinderGrid::new(spec)?;
        let phi = match loaded {
            Some(phi) => {
                if phi.degree() > degree && phi.iter().any(|(k, c)| c != 0.0 && k.max_entry() > degree) {
                    bail!("profile has modes above --degree {degree}");
                }
                phi.with_degree(degree)
            }
            None => {
                let lambda = match self.lambda {
                    Some(l) => l,
                    None => find_lambda_star(self.n)?,
                };
                kernel_vector(self.m, degree)?.scaled(self.amplitude).add_constant(lambda)
            }
        };
        Ok((phi, grid))
    }
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(':')
        .with_context(|| format!("range `{text}` is not of the form min:max"))?;
    let a: f64 = a.trim().parse().with_context(|| format!("bad range start `{a}`"))?;
    let b: f64 = b.trim().parse().with_context(|| format!("bad range end `{b}`"))?;
    if !(0.0 <= a && a < b && b.is_finite()) {
        bail!("range needs 0 <= min < max, got {a}:{b}");
    }
    Ok((a, b))
}

fn cmd_dispersion(n: u32, range: &str, count: usize, output: Option<&Path>) -> Result<()> {
    let (lo, hi) = parse_range(range)?;
    if count == 0 {
        bail!("count must be at least 1");
    }
    let mut out = String::from("rho,sigma,sigma_prime\n");
    for i in 0..count {
        let rho = if count == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (count - 1) as f64
        };
        let d = dispersion_sample(n, rho)?;
        out += &format!("{},{},{}\n", sci(d.rho), sci(d.sigma), sci(d.sigma_prime));
    }
    emit(&out, output)
}

fn cmd_lambda_star(ns: &[u32], output: Option<&Path>) -> Result<()> {
    let mut csv = String::from("n,lambda_star,sigma_prime\n");
    println!("{:>3}  {:>10}  {:>9}  {:>10}", "n", "lambda*", "reference", "deviation");
    for &n in ns {
        let l = find_lambda_star(n)?;
        csv += &format!("{n},{},{}\n", sci(l), sci(sigma_prime(n, l)?));
        match REFERENCE_LAMBDA_STAR.iter().find(|(k, _)| *k == n) {
            Some(&(_, p)) => println!("{n:>3}  {l:>10.6}  {p:>9.3}  {:>10.2e}", (l - p).abs()),
            None => println!("{n:>3}  {l:>10.6}  {:>9}  {:>10}", "-", "-"),
        }
    }
    if let Some(path) = output {
        fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_spectrum(n: u32, m: usize, lambda: Option<f64>, degree: u32, output: Option<&Path>) -> Result<()> {
    let lambda = match lambda {
        Some(l) => l,
        None => find_lambda_star(n)?,
    };
    let basis = ModeBasis::new(m, degree)?;
    let mut out = String::from("k,ell,orbit_size,sigma\n");
    for k in basis.indices() {
        let entries: Vec<String> = k.entries().iter().map(|e| e.to_string()).collect();
        out += &format!(
            "\"{}\",{},{},{}\n",
            entries.join(","),
            sci(k.ell()),
            k.orbit_size(),
            sci(sigma(n, lambda * k.ell())?)
        );
    }
    emit(&out, output)
}

fn cmd_forward(profile: &ProfileArgs, output: Option<&Path>) -> Result<()> {
    let (phi, grid) = profile.build()?;
    let sol = solve_dirichlet(&phi, &grid, Execution::default())?;
    let trace = neumann_trace(&sol)?;
    let u_max = sol.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let report = json!({
        "grid": grid.spec(),
        "phi": phi,
        "neumann_trace": trace,
        "aliasing_residual": sol.aliasing_residual,
        "solve_residual": sol.solve_residual,
        "u_max": u_max,
    });
    emit(&(serde_json::to_string_pretty(&report)? + "\n"), output)
}

fn cmd_export(profile: &ProfileArgs, dir: &Path, stem: &str) -> Result<()> {
    let (phi, grid) = profile.build()?;
    let sol = solve_dirichlet(&phi, &grid, Execution::default())?;
    let (json_path, bin_path) = export_solution(&sol, dir, stem)?;
    println!("{}\n{}", json_path.display(), bin_path.display());
    Ok(())
}

fn cmd_branch(config: Option<&Path>, flags: Overrides) -> Result<()> {
    let file = match config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let cfg = flags.over(file).resolve()?;
    let grid = CylinderGrid::new(cfg.grid())?;
    let opts = NewtonOptions {
        tol: cfg.tol,
        ..NewtonOptions::default()
    };
    let trace = trace_branch(&grid, cfg.s_max, cfg.ds, &opts)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut lines = String::new();
    for p in &trace.points {
        lines += &p.to_json_line();
        lines.push('\n');
    }
    let jsonl = cfg.output_dir.join("branch.jsonl");
    fs::write(&jsonl, lines)?;
    let mut files = vec![jsonl.display().to_string()];
    if cfg.m == 1 {
        let path = cfg.output_dir.join("branch.svg");
        fs::write(&path, svg::branch_svg(&trace.points))?;
        files.push(path.display().to_string());
    }
    for d in &trace.diagnostics {
        eprintln!("early stop: {d}");
    }
    let summary = json!({
        "points": trace.points.len(),
        "max_residual": trace.points.iter().map(|p| p.residual).fold(0.0, f64::max),
        "diagnostics": trace.diagnostics,
        "files": files,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn read_branch(path: &Path) -> Result<Vec<BranchPoint>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p = BranchPoint::from_json_line(line)
            .with_context(|| format!("{}:{}: not a branch point", path.display(), i + 1))?;
        points.push(p);
    }
    if points.is_empty() {
        bail!("{} holds no branch points", path.display());
    }
    Ok(points)
}

/// Returns whether every check passed.
fn cmd_verify(branch: &Path, cells: &[String], refine: bool, output: Option<&Path>) -> Result<bool> {
    let points = read_branch(branch)?;
    let m = points[0].mu.m();
    let cells: Vec<PeriodCell> = if cells.is_empty() {
        vec![PeriodCell::full_period(m)]
    } else {
        cells.iter().map(|c| PeriodCell::parse(c)).collect::<serrin::Result<_>>()?
    };
    let exec = Execution::default();
    let mut all_pass = true;
    let mut entries = Vec::new();
    for p in &points {
        let mut failures = Vec::new();
        if !(p.residual < VERIFY_RESIDUAL) {
            failures.push(format!("residual {:e}", p.residual));
        }
        let mut reports = Vec::new();
        for cell in &cells {
            let r = geometry_report(p, cell, exec)?;
            let tag = format!("cell {:?}:{:?}", cell.a, cell.b);
            if !((r.ratio - r.expected_ratio).abs() < VERIFY_RATIO) {
                failures.push(format!("{tag}: Cheeger ratio off by {:e}", r.ratio - r.expected_ratio));
            }
            if !(r.closure_residual.abs() < VERIFY_CLOSURE) {
                failures.push(format!("{tag}: divergence closure {:e}", r.closure_residual));
            }
            if !(r.p_margin > 0.0) {
                failures.push(format!("P margin {:e}", r.p_margin));
            }
            if !(r.p_boundary_dev < VERIFY_P_BOUNDARY) {
                failures.push(format!("P boundary deviation {:e}", r.p_boundary_dev));
            }
            if !(r.p_laplacian_min >= r.p_laplacian_bound - VERIFY_LAPLACIAN) {
                failures.push(format!("min Laplacian of P {}", r.p_laplacian_min));
            }
            reports.push(r);
        }
        let mut refined_dev = None;
        if refine {
            let grid = CylinderGrid::new(p.grid.refined())?;
            let sol = solve_dirichlet(&p.profile(), &grid, exec)?;
            let target = -p.lambda / p.n as f64;
            let dev = sol.trace_samples.iter().fold(0.0f64, |a, h| a.max((h - target).abs()));
            if !(dev < VERIFY_REFINED_TRACE) {
                failures.push(format!("refined trace deviation {dev:e}"));
            }
            refined_dev = Some(dev);
        }
        failures.sort();
        failures.dedup();
        let pass = failures.is_empty();
        if !pass {
            all_pass = false;
            eprintln!("point s = {} failed: {}", p.s, failures.join("; "));
        }
        entries.push(json!({
            "s": p.s,
            "lambda": p.lambda,
            "residual": p.residual,
            "refined_trace_dev": refined_dev,
            "cells": reports,
            "pass": pass,
            "failures": failures,
        }));
    }
    let report = json!({ "pass": all_pass, "points": entries });
    emit(&(serde_json::to_string_pretty(&report)? + "\n"), output)?;
    Ok(all_pass)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Dispersion { n, range, count, output } => cmd_dispersion(n, &range, count, output.as_deref())?,
        Command::LambdaStar { n, output } => cmd_lambda_star(&n, output.as_deref())?,
        Command::Spectrum {
            n,
            m,
            lambda,
            degree,
            output,
        } => cmd_spectrum(n, m, lambda, degree, output.as_deref())?,
        Command::Forward { profile, output } => cmd_forward(&profile, output.as_deref())?,
        Command::Export {
            profile,
            output_dir,
            stem,
        } => cmd_export(&profile, &output_dir, &stem)?,
        Command::Branch {
            config,
            n,
            m,
            degree,
            nr,
            nt,
            s_max,
            ds,
            tol,
            output_dir,
        } => {
            let flags = Overrides {
                n,
                m,
                degree,
                nr,
                nt,
                s_max,
                ds,
                tol,
                output_dir,
            };
            cmd_branch(config.as_deref(), flags)?
        }
        Command::Verify {
            branch,
            cell,
            refine,
            output,
        } => return cmd_verify(&branch, &cell, refine, output.as_deref()),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
