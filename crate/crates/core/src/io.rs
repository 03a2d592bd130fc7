//! CSV and JSON exchange formats.
//!
//! Point files have a header `x1,…,xn` and one point per row; reals are
//! written with 17 significant digits so every value round-trips.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// A real with 17 significant digits; infinities as `inf`/`-inf`.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn point_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

pub fn write_points_csv<W: Write>(out: W, dim: usize, points: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(point_header(dim))?;
    for p in points {
        if p.len() != dim {
            return Err(Error::arg("point dimension does not match the header"));
        }
        w.write_record(p.iter().map(|x| format_real(*x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a point file, returning its dimension and rows.
pub fn read_points_csv<R: Read>(input: R) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || header != point_header(header.len()) {
        return Err(Error::arg("point files need the header x1,...,xn"));
    }
    let dim = header.len();
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let p = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::arg(format!("bad number {s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        points.push(p);
    }
    Ok((dim, points))
}

/// A CSV table with the given header; cells are written verbatim.
pub fn write_table_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
