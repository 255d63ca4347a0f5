//! Deterministic delimited-text output: CSV data files, key/value manifests,
//! atomic writes.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Number formatting for data files: shortest round-trip representation,
/// switching to exponent notation outside a moderate magnitude window;
/// infinities print as `inf`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if (1e-4..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes bytes to `path` atomically: the file is either complete or absent.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp-partial");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// CSV builder: comma-separated, one header row, `fmt_num` for values,
/// optional `# key = value` comment lines before the header.
pub struct CsvFile {
    buf: String,
    columns: usize,
}

impl CsvFile {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        CsvFile {
            buf,
            columns: header.len(),
        }
    }

    pub fn with_comments(comments: &[(String, String)], header: &[&str]) -> Self {
        let mut buf = String::new();
        for (k, v) in comments {
            let _ = writeln!(buf, "# {k} = {v}");
        }
        buf.push_str(&header.join(","));
        buf.push('\n');
        CsvFile {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        let mut first = true;
        for v in values {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(&fmt_num(*v));
            first = false;
        }
        self.buf.push('\n');
    }

    /// Row with preformatted cells (flags, labels).
    pub fn row_raw(&mut self, values: &[String]) {
        debug_assert_eq!(values.len(), self.columns);
        self.buf.push_str(&values.join(","));
        self.buf.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.buf.as_bytes())
    }
}

/// Key/value manifest (` = ` separated lines), written atomically.
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Manifest { entries: Vec::new() }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn push_num(&mut self, key: impl Into<String>, value: f64) {
        self.entries.push((key.into(), fmt_num(value)));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut buf = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(buf, "{k} = {v}");
        }
        buf
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.render().as_bytes())
    }
}

impl Default for Manifest {
    fn default() -> Self {
        Self::new()
    }
}
