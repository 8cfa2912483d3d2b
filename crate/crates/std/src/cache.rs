//! On-disk store of quotient orders keyed by (spec hash, level).

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use treedim_core::constructions::GroupSpec;

use crate::specfile;

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cache directory {0} is locked by another process")]
    Locked(PathBuf),
}

#[derive(Serialize, Deserialize)]
struct Entry {
    schema_version: u32,
    spec: String,
    level: usize,
    order: String,
}

/// Content hash of a spec: SHA-256 of its canonical JSON form.
pub fn spec_hash(spec: &GroupSpec) -> String {
    let digest = Sha256::digest(specfile::emit(spec).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// A cache directory held under an advisory lock for the lifetime of the value.
#[derive(Debug)]
pub struct Cache {
    dir: PathBuf,
    _lock: File,
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Self, CacheError> {
        let io = |source| CacheError::Io {
            path: dir.to_path_buf(),
            source,
        };
        fs::create_dir_all(dir).map_err(io)?;
        let lock = File::create(dir.join(".lock")).map_err(io)?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(CacheError::Locked(dir.to_path_buf())),
            Err(fs::TryLockError::Error(e)) => return Err(io(e)),
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            _lock: lock,
        })
    }

    fn path(&self, hash: &str, level: usize) -> PathBuf {
        self.dir.join(format!("{hash}-{level}.json"))
    }

    /// The stored order, if present and well formed.
    pub fn get(&self, hash: &str, level: usize) -> Option<BigUint> {
        let text = fs::read_to_string(self.path(hash, level)).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        if entry.spec != hash || entry.level != level {
            return None;
        }
        entry.order.parse().ok()
    }

    pub fn put(&self, hash: &str, level: usize, order: &BigUint) -> Result<(), CacheError> {
        let entry = Entry {
            schema_version: specfile::SCHEMA_VERSION,
            spec: hash.to_string(),
            level,
            order: order.to_string(),
        };
        let text = serde_json::to_string(&entry).expect("entry serializes");
        write_atomic(&self.path(hash, level), text.as_bytes()).map_err(|source| CacheError::Io {
            path: self.dir.clone(),
            source,
        })
    }
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
