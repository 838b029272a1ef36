use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use pronoun_core::Error;

/// Prefixes a library error with the file it came from, as `file:line:`
/// when the line is known.
pub fn located(path: &Path, e: Error) -> anyhow::Error {
    match e {
        Error::AtLine { line, source } => anyhow!("{}:{line}: {source}", path.display()),
        e => anyhow!("{}: {e}", path.display()),
    }
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("{}: cannot open", path.display()))?;
    Ok(BufReader::new(f))
}

/// Reads `path` with `parse`, attributing errors to the file.
pub fn read<T>(path: &Path, parse: impl FnOnce(BufReader<File>) -> pronoun_core::Result<T>) -> Result<T> {
    parse(open(path)?).map_err(|e| located(path, e))
}

pub fn create(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("{}: cannot create", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes with `f` and flushes, naming the destination on failure.
pub fn write_to(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let name = path.map_or("standard output".to_string(), |p| p.display().to_string());
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).with_context(|| format!("{name}: write failed"))
}
