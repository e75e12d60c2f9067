//! Vectors as plain text, one entry per line: `re` or `re im`.

use std::io::{BufRead, Write};

use kexpm_core::C64;

use crate::error::ParseError;

/// Reads a vector. Blank lines and lines starting with `%` or `#` are skipped.
pub fn read_vector<R: BufRead>(reader: R) -> Result<Vec<C64>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let ln = i + 1;
        let line = line.map_err(|e| ParseError::new(ln, format!("read failed: {e}")))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() > 2 {
            return Err(ParseError::new(ln, "expected `re` or `re im`"));
        }
        let mut vals = [0.0f64; 2];
        for (slot, tok) in vals.iter_mut().zip(&parts) {
            *slot = tok.parse().map_err(|_| ParseError::new(ln, format!("cannot parse `{tok}`")))?;
            if !slot.is_finite() {
                return Err(ParseError::new(ln, "value is not finite"));
            }
        }
        out.push(C64::new(vals[0], vals[1]));
    }
    Ok(out)
}

/// Writes `re im` per line with round-trip precision.
pub fn write_vector<W: Write>(v: &[C64], mut out: W) -> std::io::Result<()> {
    for x in v {
        writeln!(out, "{:e} {:e}", x.re, x.im)?;
    }
    out.flush()
}
