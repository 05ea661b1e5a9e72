//! Atomic file output and CSV tables.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Writes `bytes` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// In-memory CSV table with string cells.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    preamble: String,
}

impl Table {
    /// Starts a table with a header row.
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut writer = csv::WriterBuilder::new().flexible(false).from_writer(Vec::new());
        writer.write_record(header.iter().map(|s| s.as_ref())).expect("in-memory write");
        Self { writer, preamble: String::new() }
    }

    /// Adds a `#` comment line before the header.
    pub fn comment(&mut self, line: &str) {
        self.preamble.push_str("# ");
        self.preamble.push_str(line);
        self.preamble.push('\n');
    }

    /// Appends one row.
    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        self.writer.write_record(cells.iter().map(|s| s.as_ref())).expect("in-memory write");
    }

    /// Encoded table.
    pub fn into_bytes(self) -> Vec<u8> {
        let mut out = self.preamble.into_bytes();
        out.extend(self.writer.into_inner().expect("in-memory flush"));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn table_with_comments_parses() {
        let mut t = Table::new(&["a", "b"]);
        t.comment("axis 0");
        t.row(&["1", "2"]);
        let bytes = t.into_bytes();
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes.as_slice());
        assert_eq!(rd.headers().unwrap(), vec!["a", "b"]);
        assert_eq!(rd.records().count(), 1);
    }
}
