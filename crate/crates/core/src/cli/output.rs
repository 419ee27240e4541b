//! Output files that disappear again unless the command succeeds.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Tracks files written by a command and deletes them on drop unless
/// [`OutputGuard::commit`] was called.
#[derive(Debug, Default)]
pub struct OutputGuard {
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputGuard {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `path` as written by this command.
    pub fn track(&mut self, path: &Path) {
        self.written.push(path.to_path_buf());
    }

    /// Creates `path`, runs `body` on a buffered writer and flushes.
    pub fn write_with(&mut self, path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        self.track(path);
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        body(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn write_string(&mut self, path: &Path, text: &str) -> Result<()> {
        self.write_with(path, |out| out.write_all(text.as_bytes()))
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.written {
                let _ = std::fs::remove_file(path);
            }
        }
    }
}
