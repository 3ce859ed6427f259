//! Deterministic CSV emission.
//!
//! Numbers are rendered in C's `%.12g` style (12 significant digits,
//! trailing zeros stripped, scientific notation outside [1e-4, 1e12)), lines
//! end in `\n`, and column order is fixed by each writer, so identical runs
//! produce byte-identical files.

use crate::classify::PredictionRow;
use crate::simulate::DiffusionPath;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Format like C's `%.12g`.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    const SIG: i32 = 12;
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp_str) = sci.split_once('e').expect("e-format");
    let exp: i32 = exp_str.parse().expect("exponent");
    if exp < -4 || exp >= SIG {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}"))
    }
}

fn strip_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

/// Quote a CSV field: wrap in double quotes with internal quotes doubled.
pub fn quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

/// Write header + rows to `path` with `\n` line endings.
pub fn emit_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CsvError> {
    let mut buf = String::with_capacity(rows.len() * 32 + header.len() + 1);
    buf.push_str(header);
    buf.push('\n');
    for row in rows {
        buf.push_str(row);
        buf.push('\n');
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| CsvError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        }
    }
    fs::write(path, buf).map_err(|source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Path dump: `path_id,label,t,x`, one row per grid point.
pub fn dump_paths_csv(paths: &[DiffusionPath], out: &mut impl Write) -> std::io::Result<()> {
    out.write_all(b"path_id,label,t,x\n")?;
    for (id, path) in paths.iter().enumerate() {
        let label = path
            .label()
            .map(|l| l.to_string())
            .unwrap_or_default();
        for (k, &x) in path.x().iter().enumerate() {
            writeln!(out, "{id},{label},{},{}", format_g(path.time(k)), format_g(x))?;
        }
    }
    Ok(())
}

/// Prediction dump: `path_id,label,phi,predicted,bayes_predicted`.
pub fn dump_predictions_csv(rows: &[PredictionRow], out: &mut impl Write) -> std::io::Result<()> {
    out.write_all(b"path_id,label,phi,predicted,bayes_predicted\n")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.path_id,
            r.label,
            format_g(r.phi),
            r.predicted,
            r.bayes_predicted
        )?;
    }
    Ok(())
}

/// One diagnostics row in the probe report format.
#[derive(Debug, Clone)]
pub struct ProbeRow {
    pub quantity: String,
    pub value: f64,
    pub se: f64,
    pub n: u64,
    pub params: serde_json::Value,
}

pub const PROBE_HEADER: &str = "quantity,value,se,n,params_json_string";

impl ProbeRow {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.quantity,
            format_g(self.value),
            format_g(self.se),
            self.n,
            quote(&self.params.to_string())
        )
    }
}
