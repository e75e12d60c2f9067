//! Convergence histories as CSV.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! absent values as empty fields and overflowed bounds as `inf`.

use std::io::{Read, Write};

use kexpm_core::bounds::ConvergenceRecord;

pub const HEADER: [&str; 7] = ["k", "err_true", "est_post", "bnd_prior", "q_used", "bnd_saad", "bnd_hl"];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

pub fn write_records<W: Write>(records: &[ConvergenceRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            fmt_opt(r.err_true),
            fmt(r.est_post),
            fmt(r.bnd_prior),
            fmt(r.q_used),
            fmt_opt(r.bnd_saad),
            fmt_opt(r.bnd_hl),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_err(row: usize, msg: String) -> csv::Error {
    csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("row {row}: {msg}")))
}

fn field(rec: &csv::StringRecord, i: usize, row: usize) -> csv::Result<Option<f64>> {
    let s = rec.get(i).ok_or_else(|| parse_err(row, format!("missing column {}", HEADER[i])))?;
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| parse_err(row, format!("cannot parse {} `{s}`", HEADER[i])))
}

fn required(rec: &csv::StringRecord, i: usize, row: usize) -> csv::Result<f64> {
    field(rec, i, row)?.ok_or_else(|| parse_err(row, format!("{} is empty", HEADER[i])))
}

pub fn read_records<R: Read>(input: R) -> csv::Result<Vec<ConvergenceRecord>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(HEADER) {
        return Err(parse_err(1, "unexpected header".into()));
    }
    let mut out = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = idx + 2;
        let k_text = rec.get(0).unwrap_or_default();
        let k = k_text.parse().map_err(|_| parse_err(row, format!("cannot parse k `{k_text}`")))?;
        out.push(ConvergenceRecord {
            k,
            err_true: field(&rec, 1, row)?,
            est_post: required(&rec, 2, row)?,
            bnd_prior: required(&rec, 3, row)?,
            q_used: required(&rec, 4, row)?,
            bnd_saad: field(&rec, 5, row)?,
            bnd_hl: field(&rec, 6, row)?,
        });
    }
    Ok(out)
}

/// One row of an a priori bound table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub k: usize,
    pub bnd_prior: f64,
    pub q_used: f64,
    pub bnd_saad: f64,
    pub bnd_hl: Option<f64>,
}

pub const BOUND_HEADER: [&str; 5] = ["k", "bnd_prior", "q_used", "bnd_saad", "bnd_hl"];

pub fn write_bound_rows<W: Write>(rows: &[BoundRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUND_HEADER)?;
    for r in rows {
        w.write_record([r.k.to_string(), fmt(r.bnd_prior), fmt(r.q_used), fmt(r.bnd_saad), fmt_opt(r.bnd_hl)])?;
    }
    w.flush()?;
    Ok(())
}
