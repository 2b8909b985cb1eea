use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::link::BerRecord;
use crate::noise::Osnr;

use super::sweep::{ResultSet, TheoryRow, TheoryTable};

pub const CSV_HEADER: [&str; 12] = [
    "scenario",
    "compensation",
    "distance_km",
    "df_tx_hz",
    "df_lo_hz",
    "osnr_db",
    "n_bits",
    "n_errors",
    "ber",
    "eepn_lw_hz",
    "eff_lw_hz",
    "ber_floor_theory",
];

pub const THEORY_CSV_HEADER: [&str; 9] = [
    "scenario",
    "compensation",
    "distance_km",
    "df_tx_hz",
    "df_lo_hz",
    "eepn_lw_hz",
    "eff_lw_hz",
    "eff_variance",
    "ber_floor_theory",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::config(format!("unknown format {other:?}"))),
        }
    }
}

/// 13 significant digits; `inf` for the noise-free sentinel.
fn float(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{x:.12e}")
    }
}

fn record_row(r: &BerRecord) -> [String; 12] {
    let osnr = match r.osnr_db {
        Osnr::Db(v) => float(v),
        Osnr::NoiseFree => "inf".to_string(),
    };
    [
        r.scenario.clone(),
        r.compensation.to_string(),
        float(r.distance_km),
        float(r.df_tx_hz),
        float(r.df_lo_hz),
        osnr,
        r.n_bits.to_string(),
        r.n_errors.to_string(),
        float(r.ber),
        float(r.eepn_lw_hz),
        float(r.eff_lw_hz),
        float(r.ber_floor_theory),
    ]
}

fn theory_row(r: &TheoryRow) -> [String; 9] {
    [
        r.scenario.clone(),
        r.compensation.to_string(),
        float(r.distance_km),
        float(r.df_tx_hz),
        float(r.df_lo_hz),
        float(r.eepn_lw_hz),
        float(r.eff_lw_hz),
        float(r.eff_variance),
        float(r.ber_floor_theory),
    ]
}

fn write_csv<const N: usize, W: Write>(
    w: W,
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()
}

fn write_json<T: Serialize, W: Write>(mut w: W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

/// Writes the records as CSV (metadata is not part of the table) or the
/// whole result set as JSON.
pub fn write_results<W: Write>(results: &ResultSet, format: Format, w: W) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(w, CSV_HEADER, results.records.iter().map(record_row)),
        Format::Json => write_json(w, results),
    }
}

pub fn write_theory<W: Write>(table: &TheoryTable, format: Format, w: W) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(w, THEORY_CSV_HEADER, table.rows.iter().map(theory_row)),
        Format::Json => write_json(w, table),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn to_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    f(&mut w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Sidecar holding the run metadata next to a CSV file.
pub fn metadata_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes `results` to `path`. CSV output also gets a `.meta.json` sidecar
/// with the run metadata.
pub fn emit(results: &ResultSet, format: Format, path: &Path) -> Result<()> {
    if results.records.is_empty() {
        return Err(Error::domain("no results to write"));
    }
    to_file(path, |w| write_results(results, format, w))?;
    if format == Format::Csv {
        let meta = metadata_path(path);
        to_file(&meta, |w| write_json(w, &results.metadata))?;
    }
    Ok(())
}

pub fn emit_theory(table: &TheoryTable, format: Format, path: &Path) -> Result<()> {
    to_file(path, |w| write_theory(table, format, w))
}

/// Reads a JSON result set written by [`emit`].
pub fn read_json(path: &Path) -> Result<ResultSet> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}
