//! Output files are staged in memory and written only after a command has
//! finished computing, each through a temporary file renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    pub fn paths(&self) -> Vec<&Path> {
        self.files.iter().map(|(p, _)| p.as_path()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes every file, removing the ones already written if a later one
    /// fails.
    pub fn commit(self) -> CliResult<Vec<PathBuf>> {
        let mut done: Vec<PathBuf> = Vec::new();
        for (path, bytes) in self.files {
            if let Err(e) = write_atomic(&path, &bytes) {
                for p in &done {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e);
            }
            done.push(path);
        }
        Ok(done)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let fail =
        |e: std::io::Error| CliError::output(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
