//! Output directory handling. Every file is written to a temporary sibling and renamed into
//! place, so readers never observe a truncated file.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A written file: path relative to the output directory and content hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes into one directory, collecting the artifact list for the manifest.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    /// Atomically writes `bytes` to `relative` and records it.
    pub fn write(&mut self, relative: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let target = self.root.join(relative);
        let dir = target.parent().unwrap_or(&self.root).to_path_buf();
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        write_atomic(&target, bytes)?;
        self.artifacts.retain(|a| a.path != relative);
        self.artifacts.push(Artifact {
            path: relative.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&mut self, relative: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Runtime(format!("serialising {relative}: {e}")))?;
        text.push('\n');
        self.write(relative, text.as_bytes())
    }
}

/// Write-then-rename within the target's directory.
pub fn write_atomic(target: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(target, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(target, e))?;
    tmp.persist(target).map_err(|e| CliError::io(target, e.error))?;
    Ok(())
}

/// Versions recorded in every manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Versions {
    pub besov_core: &'static str,
    pub besov_lab: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            besov_core: besov_core::VERSION,
            besov_lab: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_replace_atomically_and_are_recorded_once() {
        let tmp = tempfile::tempdir().unwrap();
        let mut dir = OutputDir::create(&tmp.path().join("o")).unwrap();
        dir.write("nested/a.txt", b"first").unwrap();
        dir.write("nested/a.txt", b"second").unwrap();
        assert_eq!(std::fs::read(dir.root().join("nested/a.txt")).unwrap(), b"second");
        assert_eq!(dir.artifacts().len(), 1);
        assert_eq!(dir.artifacts()[0].sha256, hex::encode(Sha256::digest(b"second")));
        let names: Vec<_> = std::fs::read_dir(dir.root().join("nested")).unwrap().collect();
        assert_eq!(names.len(), 1);
    }
}
