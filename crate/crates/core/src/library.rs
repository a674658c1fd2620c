//! Named example brackets and matrices.

use crate::almost_abelian::{nilpotent_soliton_canonical, JordanType};
use crate::bracket::{make_almost_abelian, Bracket};
use crate::error::{Error, Result};
use crate::tensor::{from_real, CMatrix, CVector, C64};

/// Names accepted by [`bracket_example`].
pub const BRACKET_EXAMPLES: &[&str] =
    &["abelian:N", "heisenberg3", "filiform4", "aa-diag:d1,d2,...", "aa-jordan", "aa-canonical:d0,d1,..."];

/// Names accepted by [`matrix_example`].
pub const MATRIX_EXAMPLES: &[&str] = &["diag:d1,d2,...", "jordan2", "e12", "rotation", "canonical:d0,d1,..."];

fn parse_reals(list: &str, name: &str) -> Result<Vec<f64>> {
    let vals = list
        .split(',')
        .map(|t| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::UnknownExample(name.to_string()))?;
    if vals.is_empty() || vals.len() > crate::io::MAX_DIM {
        return Err(Error::UnknownExample(name.to_string()));
    }
    Ok(vals)
}

pub fn matrix_example(name: &str) -> Result<CMatrix> {
    if let Some(list) = name.strip_prefix("diag:") {
        let vals = parse_reals(list, name)?;
        return Ok(CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&v| C64::new(v, 0.0)))));
    }
    if let Some(jt) = name.strip_prefix("canonical:") {
        return Ok(nilpotent_soliton_canonical(&jt.parse::<JordanType>()?));
    }
    match name {
        "jordan2" => Ok(from_real(2, 2, &[1.0, 1.0, 0.0, 1.0])),
        "e12" => Ok(from_real(2, 2, &[0.0, 1.0, 0.0, 0.0])),
        "rotation" => Ok(from_real(2, 2, &[0.0, 1.0, -1.0, 0.0])),
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}

pub fn bracket_example(name: &str) -> Result<Bracket> {
    if let Some(n) = name.strip_prefix("abelian:") {
        let n: usize = n.parse().map_err(|_| Error::UnknownExample(name.to_string()))?;
        if n == 0 || n > crate::io::MAX_DIM {
            return Err(Error::UnknownExample(name.to_string()));
        }
        return Ok(Bracket::abelian(n));
    }
    if let Some(rest) = name.strip_prefix("aa-") {
        let inner = match rest {
            "jordan" => "jordan2".to_string(),
            other => other.to_string(),
        };
        return make_almost_abelian(&matrix_example(&inner)?);
    }
    match name {
        "heisenberg3" => Ok(Bracket::heisenberg3()),
        "filiform4" => Ok(Bracket::filiform4()),
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}
