//! Content-addressed stage cache under `<out>/cache`.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::canonical::{to_canonical_string, write_canonical};
use crate::error::CliResult;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of a stage's canonical inputs.
pub fn stage_key<T: Serialize + ?Sized>(stage: &str, inputs: &T) -> CliResult<String> {
    let text = to_canonical_string(inputs)?;
    Ok(sha256_hex(format!("{stage}\n{text}").as_bytes()))
}

pub struct StageCache {
    dir: Option<PathBuf>,
}

impl StageCache {
    pub fn new(out: &Path, enabled: bool) -> Self {
        Self {
            dir: enabled.then(|| out.join("cache")),
        }
    }

    fn path(&self, stage: &str, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{stage}-{key}.json")))
    }

    /// Cached value for `key`, or `compute()` stored under it. The flag is
    /// true on a hit. Unreadable entries are recomputed.
    pub fn get_or_compute<T, F>(&self, stage: &str, key: &str, compute: F) -> CliResult<(T, bool)>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> CliResult<T>,
    {
        let path = self.path(stage, key);
        if let Some(p) = &path {
            if let Ok(text) = std::fs::read_to_string(p) {
                match serde_json::from_str(&text) {
                    Ok(v) => {
                        log::info!("{stage}: cache hit {}", p.display());
                        return Ok((v, true));
                    }
                    Err(e) => log::warn!("{stage}: ignoring unreadable cache entry {}: {e}", p.display()),
                }
            }
        }
        let value = compute()?;
        if let Some(p) = &path {
            write_canonical(p, &value)?;
        }
        Ok((value, false))
    }
}
