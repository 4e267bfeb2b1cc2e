use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bdiv::io::{decode_field, encode_field};
use bdiv::ScalarField;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub bytes: usize,
    pub sha256: String,
}

impl FileDigest {
    fn of(path: &Path, data: &[u8]) -> Self {
        Self { path: path.to_path_buf(), bytes: data.len(), sha256: hex::encode(Sha256::digest(data)) }
    }
}

/// Provenance of one command: what ran, on which bytes, producing which
/// bytes. `wall_time_s` is the only field that varies between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_time_s: f64,
    pub version: String,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn start(command: Vec<String>, config: impl Serialize) -> Self {
        Self {
            command,
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_time_s: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: Some(Instant::now()),
        }
    }

    pub fn read_field(&mut self, path: &Path) -> Result<ScalarField, CliError> {
        let data = fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        self.inputs.push(FileDigest::of(path, &data));
        decode_field(&data).map_err(|e| CliError::from_core(e).context(&path.display().to_string()))
    }

    pub fn write_field(&mut self, path: &Path, f: &ScalarField) -> Result<(), CliError> {
        self.write_bytes(path, &encode_field(f))
    }

    pub fn write_bytes(&mut self, path: &Path, data: &[u8]) -> Result<(), CliError> {
        fs::write(path, data).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        self.outputs.push(FileDigest::of(path, data));
        Ok(())
    }

    pub fn finish(&mut self) {
        if let Some(t) = self.started {
            self.wall_time_s = t.elapsed().as_secs_f64();
        }
    }
}

/// `prefix` + `suffix` as a sibling path, e.g. `out` + `.u0.bdiv`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}
