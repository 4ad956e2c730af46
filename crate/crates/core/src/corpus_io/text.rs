//! Shared helpers for the line-oriented `<owner>: <id> <id> ...` text formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One parsed `<owner>: <id> ...` line with raw (unvalidated) ids.
pub(crate) struct IdLine {
    pub owner: u64,
    pub ids: Vec<u64>,
}

pub(crate) fn parse_id_line(line: &str, lineno: usize) -> Result<IdLine> {
    let (head, tail) = line
        .split_once(':')
        .ok_or_else(|| Error::parse(lineno, "missing ':' after owner id"))?;
    let owner = head
        .trim()
        .parse::<u64>()
        .map_err(|e| Error::parse(lineno, format!("bad owner id {:?}: {e}", head.trim())))?;
    let ids = tail
        .split_ascii_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|e| Error::parse(lineno, format!("bad id {tok:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IdLine { owner, ids })
}

pub(crate) fn format_id_line<I, T>(out: &mut String, owner: impl std::fmt::Display, ids: I)
where
    I: IntoIterator<Item = T>,
    T: std::fmt::Display,
{
    use std::fmt::Write as _;
    let _ = write!(out, "{owner}:");
    for id in ids {
        let _ = write!(out, " {id}");
    }
    out.push('\n');
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written output.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let tmp = temp_sibling(path);
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}
