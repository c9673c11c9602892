use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Record of one run: enough to reproduce its data files exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Every resolved parameter, defaults included. Feeding this object back
    /// as a config reproduces the run.
    pub parameters: Map<String, Value>,
    pub seed: u64,
    /// Data files written, relative to the output directory.
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
    /// Headline results of the run.
    pub summary: Value,
}

impl RunManifest {
    pub fn file_name(subcommand: &str) -> String {
        format!("{subcommand}.manifest.json")
    }
}

/// Output directory that remembers which files were written.
pub struct Outputs {
    dir: PathBuf,
    pub files: Vec<String>,
    quiet: bool,
}

impl Outputs {
    pub fn new(dir: &Path, quiet: bool) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            quiet,
        })
    }

    /// Prints one summary line on stdout unless the run is quiet.
    pub fn report(&self, line: std::fmt::Arguments<'_>) {
        if !self.quiet {
            println!("{line}");
        }
    }

    /// Writes one data file through `fill`.
    pub fn write<F>(&mut self, name: &str, fill: F) -> fohnn_core::Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> fohnn_core::Result<()>,
    {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        fill(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_manifest(&self, manifest: &RunManifest) -> fohnn_core::Result<PathBuf> {
        let path = self.dir.join(RunManifest::file_name(&manifest.subcommand));
        let mut text = serde_json::to_string_pretty(manifest).expect("manifest is valid JSON");
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
