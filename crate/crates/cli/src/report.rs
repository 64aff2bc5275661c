//! Report envelopes and output files.
//!
//! Reports carry no timestamps or host details, so the same configuration reproduces the same
//! bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use replicheck::Tolerances;

use crate::error::CliResult;
use crate::inputs::InputDigest;

#[derive(Debug, Serialize)]
pub struct Meta<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub tolerances: &'a Tolerances,
    pub inputs: &'a [InputDigest],
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    #[serde(flatten)]
    pub meta: Meta<'a>,
    pub result: T,
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, bytes)?;
        }
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

pub fn pretty<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// `runs/traj.csv` with suffix `joint.csv` becomes `runs/traj.joint.csv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Metadata sidecar for CSV outputs, which have no room for it.
pub fn write_sidecar(out: Option<&Path>, meta: &Meta) -> CliResult<()> {
    if let Some(path) = out {
        emit(Some(&sibling(path, "meta.json")), &pretty(meta)?)?;
    }
    Ok(())
}

/// 17 significant digits in scientific notation: round-trips every double.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}
