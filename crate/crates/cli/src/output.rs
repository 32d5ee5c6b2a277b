//! Where results go: the primary result is printed to stdout; with `--out`
//! every data file is also written there, followed by `manifest.json`.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde::Serialize;

use crate::Format;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub spec: Option<String>,
    /// Canonical text of the spec actually run, after grid overrides.
    pub spec_text: Option<String>,
    pub seed: Option<u64>,
    pub format: Format,
    pub parameters: serde_json::Value,
    pub files: Vec<String>,
}

pub struct Sink {
    dir: Option<PathBuf>,
    files: Vec<String>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> io::Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self { dir, files: Vec::new() })
    }

    /// Writes a data file when an output directory is set.
    pub fn file(&mut self, name: &str, contents: &str) -> io::Result<()> {
        if let Some(d) = &self.dir {
            fs::write(d.join(name), contents)?;
            self.files.push(name.to_string());
        }
        Ok(())
    }

    /// Prints the primary result and stores it as `name`.
    pub fn primary(&mut self, name: &str, contents: &str) -> io::Result<()> {
        let mut out = io::stdout().lock();
        out.write_all(contents.as_bytes())?;
        out.flush()?;
        self.file(name, contents)
    }

    pub fn finish(self, mut manifest: Manifest) -> io::Result<()> {
        if let Some(d) = &self.dir {
            manifest.files = self.files;
            let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
            fs::write(d.join("manifest.json"), text + "\n")?;
        }
        Ok(())
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Quotes a CSV field when it needs it.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
