use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::solve::CylinderSolution;
use crate::modes::SymmetricTrigPolynomial;
use crate::Result;

/// JSON half of an exported solution. The values live in a sibling binary
/// file of little-endian `f64`, radial index fastest, then torus indices in
/// row-major order (`t₁` slowest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportDescriptor {
    pub grid: GridSpec,
    pub radial_nodes: Vec<f64>,
    pub angles: Vec<f64>,
    /// Array shape, slowest index first: `[Nt; m]` followed by `Nr`.
    pub shape: Vec<usize>,
    pub values_file: String,
    pub dtype: String,
    pub phi: SymmetricTrigPolynomial,
    pub neumann_trace: SymmetricTrigPolynomial,
    pub aliasing_residual: f64,
    pub solve_residual: f64,
}

/// Writes `<stem>.json` and `<stem>.bin` into `dir`.
pub fn export_solution(sol: &CylinderSolution, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let bin_name = format!("{stem}.bin");
    let json_path = dir.join(format!("{stem}.json"));
    let bin_path = dir.join(&bin_name);
    let mut shape = vec![sol.grid.nt(); sol.grid.m()];
    shape.push(sol.grid.nr());
    let desc = ExportDescriptor {
        grid: *sol.grid.spec(),
        radial_nodes: sol.grid.radial_nodes().to_vec(),
        angles: sol.grid.angles().to_vec(),
        shape,
        values_file: bin_name,
        dtype: "f64le".into(),
        phi: sol.phi.clone(),
        neumann_trace: sol.trace.clone(),
        aliasing_residual: sol.aliasing_residual,
        solve_residual: sol.solve_residual,
    };
    let bytes: Vec<u8> = sol.full_values().iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&bin_path, bytes)?;
    fs::write(&json_path, serde_json::to_string_pretty(&desc)? + "\n")?;
    Ok((json_path, bin_path))
}
