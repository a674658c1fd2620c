use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use hcflow_core::bracket::{jacobi_residual, make_almost_abelian, Bracket};
use hcflow_core::io::{parse_bracket, parse_matrix};
use hcflow_core::library::{bracket_example, matrix_example};
use hcflow_core::CMatrix;

/// Brackets whose Jacobi residual exceeds this multiple of `‖μ‖²` are
/// rejected on input.
pub const JACOBI_GATE: f64 = 1e-8;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_ABORTED: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<hcflow_core::Error> for CliError {
    fn from(e: hcflow_core::Error) -> Self {
        CliError::input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_bracket(path: &Path) -> Result<Bracket, CliError> {
    parse_bracket(&read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, CliError> {
    parse_matrix(&read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Resolves a bracket from exactly one of the three sources and applies the
/// Jacobi gate.
pub fn load_bracket(
    bracket: Option<&PathBuf>,
    matrix: Option<&PathBuf>,
    example: Option<&str>,
) -> Result<Bracket, CliError> {
    let mu = match (bracket, matrix, example) {
        (Some(p), None, None) => read_bracket(p)?,
        (None, Some(p), None) => make_almost_abelian(&read_matrix(p)?)?,
        (None, None, Some(name)) => bracket_example(name)?,
        _ => return Err(CliError::input("exactly one of --bracket, --matrix, --example is required")),
    };
    let residual = jacobi_residual(&mu);
    if residual > JACOBI_GATE * mu.norm_sq() {
        return Err(CliError::input(format!(
            "input is not a Lie bracket: Jacobi residual {residual:.3e} exceeds {JACOBI_GATE:e}·‖μ‖²"
        )));
    }
    Ok(mu)
}

pub fn load_matrix(matrix: Option<&PathBuf>, example: Option<&str>) -> Result<CMatrix, CliError> {
    match (matrix, example) {
        (Some(p), None) => read_matrix(p),
        (None, Some(name)) => Ok(matrix_example(name)?),
        _ => Err(CliError::input("exactly one of --matrix, --example is required")),
    }
}

pub fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
