//! Matrix Market coordinate files.
//!
//! Symmetric, skew-symmetric and Hermitian storage is expanded on load and
//! recorded in the operator's structure tag.

use std::io::{BufRead, Write};

use kexpm_core::operator::{LinearOperator, SparseMatrix, Structure};
use kexpm_core::C64;

use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_header(line: &str) -> Result<(Field, Symmetry), ParseError> {
    let bad = |msg: &str| ParseError::new(1, format!("bad Matrix Market header `{}`: {msg}", line.trim()));
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(bad("expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    if tokens[1] != "matrix" {
        return Err(bad("object must be `matrix`"));
    }
    if tokens[2] != "coordinate" {
        return Err(bad("only the coordinate format is supported"));
    }
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        _ => return Err(bad("unknown field")),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        _ => return Err(bad("unknown symmetry")),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(bad("hermitian storage requires the complex field"));
    }
    if symmetry == Symmetry::SkewSymmetric && field == Field::Pattern {
        return Err(bad("pattern matrices cannot be skew-symmetric"));
    }
    Ok((field, symmetry))
}

fn number(tok: Option<&str>, line: usize, what: &str) -> Result<f64, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::new(line, format!("missing {what}")))?;
    let x: f64 = tok.parse().map_err(|_| ParseError::new(line, format!("cannot parse {what} `{tok}`")))?;
    if !x.is_finite() {
        return Err(ParseError::new(line, format!("{what} is not finite")));
    }
    Ok(x)
}

fn index(tok: Option<&str>, line: usize, n: usize, what: &str) -> Result<usize, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::new(line, format!("missing {what}")))?;
    let i: usize = tok.parse().map_err(|_| ParseError::new(line, format!("cannot parse {what} `{tok}`")))?;
    if i == 0 || i > n {
        return Err(ParseError::new(line, format!("{what} {i} outside 1..={n}")));
    }
    Ok(i - 1)
}

/// Reads a square coordinate matrix.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix, ParseError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let io_err = |line: usize, e: std::io::Error| ParseError::new(line, format!("read failed: {e}"));

    let (field, symmetry) = match lines.next() {
        Some((ln, l)) => parse_header(&l.map_err(|e| io_err(ln, e))?)?,
        None => return Err(ParseError::new(1, "empty file, expected a Matrix Market header")),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut seen = 0usize;
    let mut last_line = 1;
    for (ln, l) in lines {
        last_line = ln;
        let l = l.map_err(|e| io_err(ln, e))?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut tok = t.split_whitespace();
        let Some((n, nnz)) = size else {
            let rows = index_count(tok.next(), ln, "row count")?;
            let cols = index_count(tok.next(), ln, "column count")?;
            let nnz = index_count(tok.next(), ln, "entry count")?;
            if tok.next().is_some() {
                return Err(ParseError::new(ln, "size line has extra tokens"));
            }
            if rows != cols {
                return Err(ParseError::new(ln, format!("matrix must be square, got {rows}x{cols}")));
            }
            size = Some((rows, nnz));
            triplets.reserve(if symmetry == Symmetry::General { nnz } else { 2 * nnz });
            continue;
        };
        if seen == nnz {
            return Err(ParseError::new(ln, format!("more than the declared {nnz} entries")));
        }
        let i = index(tok.next(), ln, n, "row index")?;
        let j = index(tok.next(), ln, n, "column index")?;
        let value = match field {
            Field::Pattern => C64::new(1.0, 0.0),
            Field::Real | Field::Integer => C64::new(number(tok.next(), ln, "value")?, 0.0),
            Field::Complex => {
                let re = number(tok.next(), ln, "real part")?;
                C64::new(re, number(tok.next(), ln, "imaginary part")?)
            }
        };
        if tok.next().is_some() {
            return Err(ParseError::new(ln, "entry has extra tokens"));
        }
        match symmetry {
            Symmetry::General => {}
            _ if j > i => return Err(ParseError::new(ln, "symmetric storage must list the lower triangle only")),
            Symmetry::SkewSymmetric if i == j => {
                return Err(ParseError::new(ln, "skew-symmetric storage has no diagonal entries"));
            }
            Symmetry::Hermitian if i == j && value.im != 0.0 => {
                return Err(ParseError::new(ln, "hermitian diagonal entries must be real"));
            }
            _ => {}
        }
        triplets.push((i, j, value));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => triplets.push((j, i, value)),
                Symmetry::SkewSymmetric => triplets.push((j, i, -value)),
                Symmetry::Hermitian => triplets.push((j, i, value.conj())),
            }
        }
        seen += 1;
    }
    let Some((n, nnz)) = size else {
        return Err(ParseError::new(last_line, "missing size line"));
    };
    if seen != nnz {
        return Err(ParseError::new(last_line, format!("expected {nnz} entries, found {seen}")));
    }
    let structure = match (symmetry, field) {
        (Symmetry::Hermitian, _) => Structure::Hermitian,
        (Symmetry::Symmetric, f) if f != Field::Complex => Structure::Hermitian,
        (Symmetry::SkewSymmetric, f) if f != Field::Complex => Structure::SkewHermitian,
        _ => Structure::General,
    };
    let m = SparseMatrix::from_triplets(n, &triplets).map_err(|e| ParseError::new(last_line, e.to_string()))?;
    Ok(m.with_structure(structure))
}

fn index_count(tok: Option<&str>, line: usize, what: &str) -> Result<usize, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::new(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| ParseError::new(line, format!("cannot parse {what} `{tok}`")))
}

/// Writes `m` so that [`read_matrix_market`] restores both the entries and
/// the structure tag. Values use the shortest decimal that round-trips.
pub fn write_matrix_market<W: Write>(m: &SparseMatrix, mut out: W) -> std::io::Result<()> {
    let real = m.is_real();
    let (field, symmetry) = match (m.structure(), real) {
        (Structure::Hermitian, true) => ("real", "symmetric"),
        (Structure::Hermitian, false) => ("complex", "hermitian"),
        (Structure::SkewHermitian, true) => ("real", "skew-symmetric"),
        (_, true) => ("real", "general"),
        (_, false) => ("complex", "general"),
    };
    let keep = |i: usize, j: usize| match symmetry {
        "symmetric" | "hermitian" => i >= j,
        "skew-symmetric" => i > j,
        _ => true,
    };
    let entries: Vec<(usize, usize, C64)> = m.triplets().filter(|&(i, j, _)| keep(i, j)).collect();
    writeln!(out, "%%MatrixMarket matrix coordinate {field} {symmetry}")?;
    writeln!(out, "{} {} {}", m.dim(), m.dim(), entries.len())?;
    for (i, j, v) in entries {
        if real {
            writeln!(out, "{} {} {:e}", i + 1, j + 1, v.re)?;
        } else {
            writeln!(out, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im)?;
        }
    }
    out.flush()
}
