//! CSV tables and JSON sidecars, written through a temporary file and an
//! atomic rename so a failed run leaves nothing behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{CliError, Result};
use crate::run::{Cell, Outcome, Table};
use crate::spec::ExperimentSpec;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn render_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io { path: "<csv>".into(), message: e.to_string() };
    w.write_record(&table.header).map_err(err)?;
    for row in &table.rows {
        let cells = row.iter().map(|c| match c {
            Cell::Num(v) => format_number(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        });
        w.write_record(cells).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), message: e.to_string() })
}

/// `out.csv` -> `out.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn render_sidecar(spec: &ExperimentSpec, outcome: &Outcome) -> Result<Vec<u8>> {
    let doc = json!({
        "version": fieldroad::VERSION,
        "command": spec.command.name(),
        "spec": spec,
        "columns": outcome.table.header,
        "summary": outcome.summary,
    });
    let mut text = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io { path: "<json>".into(), message: e.to_string() })?;
    text.push(b'\n');
    Ok(text)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::io(path, "not a file path"))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// Writes the table and its sidecar; both are rendered before either file is touched.
pub fn write_outputs(spec: &ExperimentSpec, outcome: &Outcome, csv_path: &Path) -> Result<PathBuf> {
    let csv = render_csv(&outcome.table)?;
    let side = render_sidecar(spec, outcome)?;
    let side_path = sidecar_path(csv_path);
    write_atomic(csv_path, &csv)?;
    write_atomic(&side_path, &side)?;
    Ok(side_path)
}
