//! Run artifacts: CSV tables, `report.json` and `manifest.json`.

use std::path::{Path, PathBuf};

use negcurv::io::{write_fields_csv, write_table_csv};
use negcurv::ScalarField;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Everything a subcommand produces. The report must depend only on the
/// configuration so that repeated runs are byte-identical.
pub struct Run {
    pub files: Vec<(String, Vec<u8>)>,
    pub report: Value,
    /// Headline scalars copied into the manifest.
    pub summary: Value,
    /// Set when the computation finished but did not reach its goal.
    pub failure: Option<String>,
}

impl Run {
    pub fn new(report: Value, summary: Value) -> Self {
        Self { files: Vec::new(), report, summary, failure: None }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_fields(
        &mut self,
        name: &str,
        columns: &[(&str, &ScalarField<f64>)],
        mask: Option<&[bool]>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_fields_csv(&mut buf, columns, mask)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn add_table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_table_csv(&mut buf, header, rows)?;
        self.add(name, buf);
        Ok(())
    }
}

pub struct Context<'a> {
    pub command: &'a str,
    pub config: Value,
    pub threads: usize,
    pub seconds: f64,
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.display().to_string(), source })
}

/// Writes every artifact under `dir`, then the manifest listing them.
pub fn finish(dir: &Path, run: &Run, ctx: &Context) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.display().to_string(), source })?;
    let report = json!({
        "command": ctx.command,
        "config": ctx.config,
        "status": status(run),
        "result": run.report,
    });
    let mut text = serde_json::to_vec_pretty(&report)?;
    text.push(b'\n');
    let mut entries = Vec::new();
    for (name, bytes) in run.files.iter().chain(std::iter::once(&("report.json".to_string(), text))) {
        write(&dir.join(name), bytes)?;
        entries.push(json!({
            "path": name,
            "bytes": bytes.len(),
            "sha256": hex::encode(Sha256::digest(bytes)),
        }));
    }
    let manifest = json!({
        "command": ctx.command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": ctx.config,
        "threads": ctx.threads,
        "wall_clock_seconds": ctx.seconds,
        "status": status(run),
        "results": run.summary,
        "files": entries,
    });
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    write(&path, &text)?;
    Ok(path)
}

fn status(run: &Run) -> Value {
    match &run.failure {
        None => json!("ok"),
        Some(reason) => json!({ "failed": reason }),
    }
}
