use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Provenance record written next to every result file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub inputs: BTreeMap<String, String>,
    pub configs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: &'static str,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(inputs: BTreeMap<String, String>, configs: Vec<String>, seed: Option<u64>) -> Self {
        Self {
            command: std::env::args().collect(),
            inputs,
            configs,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `payload` to `out` and its manifest beside it, or `payload` to
/// stdout when there is no `out`.
pub fn emit(payload: &str, out: Option<&Path>, manifest: RunManifest) -> CliResult<()> {
    let Some(out) = out else {
        let mut stdout = io::stdout().lock();
        return match stdout.write_all(payload.as_bytes()).and_then(|()| stdout.flush()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                Err(CliError::analysis(format!("cannot write to stdout: {e}")))
            }
            _ => Ok(()),
        };
    };
    let write = |path: &Path, text: &str| {
        fs::write(path, text).map_err(|e| CliError::analysis(format!("cannot write {}: {e}", path.display())))
    };
    write(out, payload)?;
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&manifest_path(out), &(json + "\n"))
}
