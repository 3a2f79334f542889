use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::Result;

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    /// Flat text of the network configuration, when one was involved.
    pub config: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    pub version: String,
    pub outputs: Vec<String>,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn start(command: &str, arguments: &[String]) -> Self {
        RunManifest {
            command: command.to_string(),
            arguments: arguments.to_vec(),
            config: None,
            seeds: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            started: now(),
            finished: 0.0,
        }
    }

    pub fn seed(&mut self, name: &str, value: u64) -> &mut Self {
        self.seeds.insert(name.to_string(), value);
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Stamps the finish time and writes the manifest as JSON to `path`.
    pub fn finish(&mut self, path: &Path) -> Result<PathBuf> {
        self.finished = now();
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::from)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, text + "\n")?;
        Ok(path.to_path_buf())
    }
}

/// `<file>.manifest.json` next to a single-file output.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}
