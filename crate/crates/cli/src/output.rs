//! Output directory bookkeeping.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Output directory; remembers the files written, in order.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io { path: root.display().to_string(), source: e })?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Creates `name` inside the directory.
    pub fn file(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.root.join(name);
        let f = File::create(&path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        if !self.files.iter().any(|n| n == name) {
            self.files.push(name.to_string());
        }
        Ok(BufWriter::new(f))
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn write_summary(&self, summary: &serde_json::Value) -> Result<(), CliError> {
        let path = self.root.join("summary.json");
        let io = |e: std::io::Error| CliError::Io { path: path.display().to_string(), source: e };
        let mut text = serde_json::to_string_pretty(summary).map_err(|e| io(e.into()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(io)
    }
}
