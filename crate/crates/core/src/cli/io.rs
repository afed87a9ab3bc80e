//! Atomic artifact writing and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub path: String,
    pub description: String,
    pub params: Value,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema: u32,
    pub command: String,
    pub config: Value,
    pub grid: usize,
    pub exit_code: i32,
    pub status: String,
    pub notes: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

/// Output directory that records every file it writes.
pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
    notes: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), artifacts: Vec::new(), notes: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes via a temporary file in the same directory, then renames.
    pub fn write(&mut self, name: &str, contents: &str, description: &str, params: Value) -> Result<PathBuf> {
        let path = write_atomic(&self.root, name, contents)?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact { path: name.into(), description: description.into(), params });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(
        &mut self,
        name: &str,
        value: &T,
        description: &str,
        params: Value,
    ) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text, description, params)
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.notes.push(msg);
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    /// Writes `manifest.json` listing every artifact written so far.
    pub fn finish(self, command: &str, config: Value, grid: usize, exit_code: i32, status: &str) -> Result<PathBuf> {
        let manifest = Manifest {
            schema: super::SCHEMA,
            command: command.into(),
            config,
            grid,
            exit_code,
            status: status.into(),
            notes: self.notes,
            artifacts: self.artifacts,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&self.root, "manifest.json", &text)
    }
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}

/// Full-precision CSV from a header and numeric rows.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_are_listed_once() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("a.csv", "x\n1\n", "first", Value::Null).unwrap();
        out.write("a.csv", "x\n2\n", "again", Value::Null).unwrap();
        assert_eq!(out.artifacts().len(), 1);
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap(), "x\n2\n");
        out.finish("test", Value::Null, 200, 0, "ok").unwrap();
        let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 2, "no temporary files left: {names:?}");
    }

    #[test]
    fn csv_round_trips_doubles() {
        let x = 0.1 + 0.2;
        let text = csv(&["a", "b"], vec![vec![x, 1e-300]]);
        let row = text.lines().nth(1).unwrap();
        let back: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(back, vec![x, 1e-300]);
    }
}
