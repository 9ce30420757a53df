use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fj_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "Io",
            CliError::Json { .. } => "Json",
            CliError::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

pub fn print_error(e: &CliError) {
    let obj = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{obj}");
}

/// Honors `FJ_ENGINE_THREADS` as a cap on the global thread pool.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("FJ_ENGINE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::InvalidConfig(format!("FJ_ENGINE_THREADS = {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    }
    Ok(())
}

pub fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_slice(&read(path)?).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Canonical text: keys sorted (via `Value`'s ordered map), two-space
/// indentation, trailing newline.
pub fn canonical<T: Serialize>(x: &T) -> String {
    let v = serde_json::to_value(x).expect("artifacts serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

/// Writes the artifact and its manifest.
pub fn emit(out: Option<&Path>, artifact: &Value, manifest: Value) -> Result<(), CliError> {
    let text = canonical(artifact);
    let mut manifest = manifest;
    manifest["artifact_sha256"] = Value::String(sha256_hex(text.as_bytes()));
    match out {
        Some(path) => {
            let io = |source| CliError::Io { path: path.to_path_buf(), source };
            fs::write(path, &text).map_err(io)?;
            let mpath = manifest_path(path);
            fs::write(&mpath, canonical(&manifest)).map_err(|source| CliError::Io { path: mpath.clone(), source })?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })?;
            eprintln!("{manifest}");
        }
    }
    Ok(())
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
