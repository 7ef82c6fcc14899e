//! Field and jet serialization.
//!
//! Text format, one file per field or jet:
//!
//! ```text
//! nslift-field 1
//! n <points per axis>
//! dealias <num> <den>
//! entries <count>
//! entry <index> <divergence_free 0|1> <dealiased 0|1>
//! <re0> <im0> <re1> <im1> <re2> <im2>     (one mode per line, row-major
//! ...                                      k-order, z innermost)
//! ```
//!
//! Coefficients are written with 17 significant digits so a read round-trips
//! bit-exactly.

use super::{Grid, SpectralField};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const MAGIC: &str = "nslift-field 1";

fn format_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::FileFormat {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

pub fn write_jet_entries(path: &Path, entries: &[&SpectralField]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let grid = entries
        .first()
        .map(|f| f.grid())
        .ok_or_else(|| format_err(path, "cannot write an empty jet"))?;
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "n {}", grid.points_per_axis())?;
    let (num, den) = grid.dealias_fraction();
    writeln!(w, "dealias {num} {den}")?;
    writeln!(w, "entries {}", entries.len())?;
    for (i, f) in entries.iter().enumerate() {
        writeln!(
            w,
            "entry {i} {} {}",
            f.divergence_free_flag() as u8,
            f.dealiased_flag() as u8
        )?;
        for idx in 0..grid.mode_count() {
            let c0 = f.component(0)[idx];
            let c1 = f.component(1)[idx];
            let c2 = f.component(2)[idx];
            writeln!(
                w,
                "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
                c0.re, c0.im, c1.re, c1.im, c2.re, c2.im
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_field(path: &Path, field: &SpectralField) -> Result<()> {
    write_jet_entries(path, &[field])
}

pub fn read_jet_entries(path: &Path) -> Result<Vec<SpectralField>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let mut next_line = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| format_err(path, "unexpected end of file"))?
            .map_err(Error::from)
    };

    if next_line()? != MAGIC {
        return Err(format_err(path, "bad magic line"));
    }
    let n: usize = parse_kv(path, &next_line()?, "n")?;
    let dealias_line = next_line()?;
    let mut it = dealias_line.split_whitespace();
    if it.next() != Some("dealias") {
        return Err(format_err(path, "expected dealias line"));
    }
    let num: u32 = parse_tok(path, it.next())?;
    let den: u32 = parse_tok(path, it.next())?;
    let grid = Grid::with_dealias(n, num, den)?;
    let count: usize = parse_kv(path, &next_line()?, "entries")?;

    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let header = next_line()?;
        let mut it = header.split_whitespace();
        if it.next() != Some("entry") {
            return Err(format_err(path, format!("expected entry header {i}")));
        }
        let _idx: usize = parse_tok(path, it.next())?;
        let div_free: u8 = parse_tok(path, it.next())?;
        let dealiased: u8 = parse_tok(path, it.next())?;
        let m = grid.mode_count();
        let mut coeffs = [
            vec![Complex64::ZERO; m],
            vec![Complex64::ZERO; m],
            vec![Complex64::ZERO; m],
        ];
        for idx in 0..m {
            let line = next_line()?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| format_err(path, format!("bad coefficient at mode {idx}: {e}")))?;
            if vals.len() != 6 {
                return Err(format_err(path, format!("mode {idx}: expected 6 values")));
            }
            for c in 0..3 {
                coeffs[c][idx] = Complex64::new(vals[2 * c], vals[2 * c + 1]);
            }
        }
        out.push(SpectralField::from_parts(
            grid,
            coeffs,
            div_free != 0,
            dealiased != 0,
        ));
    }
    Ok(out)
}

pub fn read_field(path: &Path) -> Result<SpectralField> {
    let mut entries = read_jet_entries(path)?;
    entries
        .pop()
        .filter(|_| entries.is_empty())
        .ok_or_else(|| format_err(path, "expected exactly one entry"))
}

fn parse_kv<T: std::str::FromStr>(path: &Path, line: &str, key: &str) -> Result<T> {
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(format_err(path, format!("expected `{key}` line, got `{line}`")));
    }
    parse_tok(path, it.next())
}

fn parse_tok<T: std::str::FromStr>(path: &Path, tok: Option<&str>) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| format_err(path, "missing or unparsable token"))
}

/// CSV export of a scalar field's physical samples: x,y,z,s.
pub fn write_scalar_physical_csv(
    path: &Path,
    field: &super::ScalarSpectralField,
) -> Result<()> {
    let phys = field.to_physical();
    let grid = field.grid();
    let n = grid.points_per_axis();
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "x,y,z,s")?;
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let idx = (ix * n + iy) * n + iz;
                writeln!(
                    w,
                    "{:.17e},{:.17e},{:.17e},{:.17e}",
                    ix as f64 * h,
                    iy as f64 * h,
                    iz as f64 * h,
                    phys[idx]
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// CSV export of physical-space samples for plotting: x,y,z,u1,u2,u3.
pub fn write_physical_csv(path: &Path, field: &SpectralField) -> Result<()> {
    let phys = field.to_physical();
    let grid = field.grid();
    let n = grid.points_per_axis();
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "x,y,z,u1,u2,u3")?;
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let idx = (ix * n + iy) * n + iz;
                writeln!(
                    w,
                    "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    ix as f64 * h,
                    iy as f64 * h,
                    iz as f64 * h,
                    phys.component(0)[idx],
                    phys.component(1)[idx],
                    phys.component(2)[idx]
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
