use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::commands::CliError;

/// Writes `name` inside `dir` via a temporary file and rename, so readers
/// never observe a half-written file.
pub fn write_atomic<F>(dir: &Path, name: &str, fill: F) -> Result<PathBuf, CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let target = dir.join(name);
    let io_err = |e: std::io::Error| CliError::io(&target, e);
    if let Some(parent) = target.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let tmp = tempfile::NamedTempFile::new_in(target.parent().unwrap_or(dir)).map_err(io_err)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(&target).map_err(|e| io_err(e.error))?;
    Ok(target)
}
