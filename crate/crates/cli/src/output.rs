use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// Output files written to temporaries in their target directory and
/// renamed into place only once every one of them is complete. Dropping a
/// `Staged` before [`Staged::commit`] removes the temporaries; a commit that
/// fails partway removes the files it had already moved.
#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn new() -> Self {
        Staged::default()
    }

    pub fn add(&mut self, target: &Path, bytes: &[u8]) -> Result<()> {
        let dir = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::Builder::new()
            .prefix(".compatup-")
            .tempfile_in(dir)
            .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
        tmp.write_all(bytes)
            .and_then(|()| tmp.as_file().sync_all())
            .with_context(|| format!("cannot write {}", target.display()))?;
        self.files.push((tmp, target.to_path_buf()));
        Ok(())
    }

    pub fn commit(self) -> Result<()> {
        let mut moved: Vec<PathBuf> = Vec::new();
        for (tmp, target) in self.files {
            if let Err(e) = tmp.persist(&target) {
                for done in &moved {
                    let _ = std::fs::remove_file(done);
                }
                return Err(e.error).with_context(|| format!("cannot move output into {}", target.display()));
            }
            moved.push(target);
        }
        Ok(())
    }
}
