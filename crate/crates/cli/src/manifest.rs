use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;

/// Run record written next to the outputs of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub subcommand: String,
    pub config_hash: String,
    pub config_path: Option<String>,
    pub root_seed: u64,
    pub seed_source: String,
    pub workers: usize,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

/// Collects output files and writes them together with their manifest.
pub struct Run {
    out_dir: PathBuf,
    manifest: RunManifest,
    files: Vec<(String, Vec<u8>)>,
}

impl Run {
    pub fn new(out_dir: &Path, subcommand: &str, config_hash: String, config_path: Option<String>, root_seed: u64, seed_source: &str, workers: usize) -> Self {
        Run {
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
                subcommand: subcommand.to_string(),
                config_hash,
                config_path,
                root_seed,
                seed_source: seed_source.to_string(),
                workers,
                started: now(),
                finished: String::new(),
                outputs: Vec::new(),
            },
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn manifest_name(&self) -> String {
        format!("{}.manifest.json", self.manifest.subcommand)
    }

    /// Writes every output, then the manifest. Returns the manifest path.
    pub fn finish(mut self) -> io::Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)?;
        for (name, contents) in &self.files {
            fs::write(self.out_dir.join(name), contents)?;
            self.manifest.outputs.push(name.clone());
        }
        self.manifest.finished = now();
        let path = self.out_dir.join(self.manifest_name());
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(&path, json + "\n")?;
        Ok(path)
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}
