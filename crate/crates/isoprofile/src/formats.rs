//! CSV and JSON readers and writers.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::Path;

use isoprofile_core::density::TabulatedDensity;
use isoprofile_core::needles::{DecompositionRecord, NeedleDecomposition};
use isoprofile_core::quadrature::QuadConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header plus float rows with LF line endings.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|&x| fmt_f64(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline; key order follows field order.
pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct DensityRow {
    x: f64,
    h: f64,
}

/// Reads a tabulated density from a two-column `x,h` CSV with header.
pub fn read_tabulated<R: io::Read>(input: R) -> Result<TabulatedDensity, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 {
        return Err(CliError::Input(format!(
            "tabulated density needs exactly two columns (x,h), found {}",
            headers.len()
        )));
    }
    let (mut xs, mut hs) = (Vec::new(), Vec::new());
    for row in rdr.deserialize() {
        let DensityRow { x, h } = row?;
        xs.push(x);
        hs.push(h);
    }
    Ok(TabulatedDensity::new(xs, hs)?)
}

pub fn load_tabulated(path: &Path) -> Result<TabulatedDensity, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    read_tabulated(BufReader::new(file))
}

pub fn load_decomposition(path: &Path, cfg: &QuadConfig) -> Result<NeedleDecomposition, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let rec: DecompositionRecord = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(NeedleDecomposition::from_record(&rec, cfg)?)
}

pub fn save_decomposition(path: &Path, dec: &NeedleDecomposition) -> Result<(), CliError> {
    let file = File::create(path)?;
    write_json(io::BufWriter::new(file), &dec.to_record())
}
