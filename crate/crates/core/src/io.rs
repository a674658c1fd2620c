//! Plain-text formats for brackets and matrices.
//!
//! Bracket files hold a `dim n` header followed by one `i j k re im` line per
//! nonzero constant (1-based, `i < j`). Matrix files hold `dim n` followed by
//! `n` rows of `n` whitespace-separated `re,im` pairs. Blank lines and text
//! after `#` are ignored. Floats are written with 17 significant digits, so a
//! write/read cycle is bit-exact.

use std::fmt::Write as _;

use crate::bracket::Bracket;
use crate::error::{Error, Result};
use crate::tensor::{pair_index, CMatrix, C64};

/// Upper bound on `dim` accepted by the parsers.
pub const MAX_DIM: usize = 64;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Non-empty logical lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((idx + 1, line))
    })
}

fn parse_float(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("invalid number `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite number `{tok}`")));
    }
    Ok(v)
}

fn parse_header<'a, I>(lines: &mut I) -> Result<usize>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let (line, text) = lines.next().ok_or_else(|| parse_err(1, "missing `dim n` header"))?;
    let mut toks = text.split_whitespace();
    if toks.next() != Some("dim") {
        return Err(parse_err(line, "expected `dim n` header"));
    }
    let n_tok = toks.next().ok_or_else(|| parse_err(line, "missing dimension"))?;
    let n: usize = n_tok.parse().map_err(|_| parse_err(line, format!("invalid dimension `{n_tok}`")))?;
    if toks.next().is_some() {
        return Err(parse_err(line, "trailing tokens after dimension"));
    }
    if n == 0 || n > MAX_DIM {
        return Err(parse_err(line, format!("dimension must be in 1..={MAX_DIM}, got {n}")));
    }
    Ok(n)
}

fn parse_index(line: usize, tok: &str, n: usize) -> Result<usize> {
    let i: usize = tok.parse().map_err(|_| parse_err(line, format!("invalid index `{tok}`")))?;
    if i == 0 || i > n {
        return Err(parse_err(line, format!("index {i} outside 1..={n}")));
    }
    Ok(i - 1)
}

pub fn parse_bracket(text: &str) -> Result<Bracket> {
    let mut lines = content_lines(text);
    let n = parse_header(&mut lines)?;
    let mut mat = CMatrix::zeros(n, n * (n - 1) / 2);
    let mut seen = std::collections::HashSet::new();
    for (line, body) in lines {
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(parse_err(line, format!("expected `i j k re im`, found {} fields", toks.len())));
        }
        let i = parse_index(line, toks[0], n)?;
        let j = parse_index(line, toks[1], n)?;
        let k = parse_index(line, toks[2], n)?;
        if i >= j {
            return Err(parse_err(line, "entries must satisfy i < j"));
        }
        if !seen.insert((i, j, k)) {
            return Err(parse_err(line, format!("duplicate entry {} {} {}", i + 1, j + 1, k + 1)));
        }
        let re = parse_float(line, toks[3])?;
        let im = parse_float(line, toks[4])?;
        mat[(k, pair_index(n, i, j))] = C64::new(re, im);
    }
    Bracket::from_matrix(mat)
}

pub fn write_bracket(mu: &Bracket) -> String {
    let mut out = format!("dim {}\n", mu.dim());
    for (i, j, k, c) in mu.nonzero_constants() {
        writeln!(out, "{} {} {} {} {}", i + 1, j + 1, k + 1, fmt_f64(c.re), fmt_f64(c.im)).expect("string write");
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = content_lines(text);
    let n = parse_header(&mut lines)?;
    let mut mat = CMatrix::zeros(n, n);
    let mut row = 0;
    let mut last_line = 1;
    for (line, body) in lines {
        last_line = line;
        if row == n {
            return Err(parse_err(line, format!("more than {n} rows")));
        }
        let entries: Vec<&str> = body.split_whitespace().collect();
        if entries.len() != n {
            return Err(parse_err(line, format!("expected {n} entries, found {}", entries.len())));
        }
        for (col, entry) in entries.iter().enumerate() {
            let (re, im) =
                entry.split_once(',').ok_or_else(|| parse_err(line, format!("entry `{entry}` is not `re,im`")))?;
            mat[(row, col)] = C64::new(parse_float(line, re)?, parse_float(line, im)?);
        }
        row += 1;
    }
    if row != n {
        return Err(parse_err(last_line, format!("expected {n} rows, found {row}")));
    }
    Ok(mat)
}

pub fn write_matrix(a: &CMatrix) -> String {
    let mut out = format!("dim {}\n", a.nrows());
    out.push_str(&matrix_rows(a).join("\n"));
    out.push('\n');
    out
}

/// Rows of `a` in matrix-file syntax, without the header.
pub fn matrix_rows(a: &CMatrix) -> Vec<String> {
    (0..a.nrows())
        .map(|r| {
            (0..a.ncols())
                .map(|c| format!("{},{}", fmt_f64(a[(r, c)].re), fmt_f64(a[(r, c)].im)))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::ONE;

    #[test]
    fn heisenberg_round_trip() {
        let h = Bracket::heisenberg3();
        let text = write_bracket(&h);
        assert_eq!(text.lines().next(), Some("dim 3"));
        assert_eq!(parse_bracket(&text).unwrap(), h);
    }

    #[test]
    fn bracket_with_comments() {
        let text = "# filiform\n\ndim 4\n1 2 3 1 0 # first\n1 3 4 1.0 0.0\n";
        assert_eq!(parse_bracket(text).unwrap(), Bracket::filiform4());
    }

    #[test]
    fn bracket_errors_carry_line_numbers() {
        let cases = [
            ("", 1),
            ("dims 3\n", 1),
            ("dim 0\n", 1),
            ("dim 3\n2 1 3 1 0\n", 2),
            ("dim 3\n1 2 4 1 0\n", 2),
            ("dim 3\n\n1 2 3 1\n", 3),
            ("dim 3\n1 2 3 x 0\n", 2),
            ("dim 3\n1 2 3 1 0\n1 2 3 1 0\n", 3),
            ("dim 3\n1 2 3 NaN 0\n", 2),
        ];
        for (text, want) in cases {
            match parse_bracket(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.1, -1.0 / 3.0), ONE, C64::new(f64::MIN_POSITIVE, 1e300), C64::new(-2.5, 0.0)],
        );
        assert_eq!(parse_matrix(&write_matrix(&a)).unwrap(), a);
    }

    #[test]
    fn matrix_errors() {
        assert!(matches!(parse_matrix("dim 2\n1,0 0,0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_matrix("dim 2\n1,0\n0,0 1,0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_matrix("dim 1\n1;0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_matrix("dim 1\n1,0\n2,0\n"), Err(Error::Parse { line: 3, .. })));
    }
}
