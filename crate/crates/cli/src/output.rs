//! CSV and JSON sidecar emission.
//!
//! CSV files hold only values derived from the configuration, so identical
//! runs produce identical bytes. Anything time-dependent goes to the sidecar.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use qbm_sbs::scan::ScanGrid;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

/// Scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows of `(t, gamma, b)`.
pub fn series_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("t,gamma,b\n");
    for &(t, g, b) in rows {
        let _ = writeln!(s, "{},{},{}", fmt_num(t), fmt_num(g), fmt_num(b));
    }
    s
}

/// Long format, temperature outer.
pub fn scan_csv(grid: &ScanGrid) -> String {
    let mut s = String::from("T,r,avg_gamma,avg_b\n");
    for (t, r, g, b) in grid.long_rows() {
        let _ = writeln!(s, "{},{},{},{}", fmt_num(t), fmt_num(r), fmt_num(g), fmt_num(b));
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Sidecar with the config echo, seed and timestamp wrapped around `results`.
pub fn sidecar(command: &str, config: &RunConfig, results: Value) -> Value {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": timestamp,
        "seed": config.bath.seed,
        "config": config,
        "results": results,
    })
}

pub fn write_sidecar(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("sidecar serializes");
    text.push('\n');
    write_file(path, &text)
}
