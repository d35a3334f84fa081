//! File writers. CSV data goes to the configured path with a JSON sidecar
//! next to it; JSON output is a single self-describing document. Both embed
//! the resolved configuration.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::commands::Outcome;
use crate::config::{Format, Resolved};
use crate::error::{CliError, CliResult};

fn metadata(r: &Resolved, outcome: &Outcome) -> Value {
    json!({
        "command": r.config.command.name(),
        "config": r.config,
        "cells": r.cells,
        "summary": outcome.summary,
    })
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn with_suffix(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

/// Writes every file for `outcome` and returns their paths.
pub fn write(r: &Resolved, outcome: &Outcome) -> CliResult<Vec<PathBuf>> {
    let path = r.output_path();
    let mut meta = metadata(r, outcome);
    let mut written = Vec::new();
    match r.config.output.format {
        Format::Json => {
            if let Some(t) = &outcome.table {
                meta["data"] = t.to_json();
            }
            if !outcome.grids.is_empty() {
                meta["grids"] = outcome
                    .grids
                    .iter()
                    .map(|(g, h)| {
                        json!({
                            "header": h,
                            "values": g.values.iter().map(|&v| qamp_core::export::json_number(v)).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
            }
            if let Some(rep) = &outcome.report {
                meta["report"] = serde_json::to_value(rep).expect("report serializes");
            }
            write_json(&path, &meta)?;
            written.push(path);
        }
        Format::Csv => {
            let sidecar = path.with_extension("json");
            if sidecar == path {
                return Err(CliError::config("output.path: a .json path needs --format json"));
            }
            let mut files = Vec::new();
            if let Some(t) = &outcome.table {
                let mut w = create(&path)?;
                t.write_csv(&mut w)
                    .and_then(|_| w.flush())
                    .map_err(|e| CliError::io(&path, e))?;
                meta["columns"] = json!(t.columns);
                files.push(json!({ "file": file_name(&path) }));
                written.push(path.clone());
            }
            for (k, (g, h)) in outcome.grids.iter().enumerate() {
                let gp = with_suffix(&path, &format!("-{k}"), "csv");
                let mut w = create(&gp)?;
                g.write_csv(&mut w)
                    .and_then(|_| w.flush())
                    .map_err(|e| CliError::io(&gp, e))?;
                files.push(json!({ "file": file_name(&gp), "header": h }));
                written.push(gp);
            }
            meta["files"] = Value::Array(files);
            if let Some(rep) = &outcome.report {
                meta["report"] = serde_json::to_value(rep).expect("report serializes");
            }
            write_json(&sidecar, &meta)?;
            written.push(sidecar);
        }
    }
    Ok(written)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
