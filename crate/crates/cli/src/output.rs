//! Run directories and plain-text writers.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// One directory per run: `<root>/<command>-<index>`, never reused.
#[derive(Debug, Clone)]
pub struct RunDir {
    path: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path, command: &str) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        for index in 1.. {
            let path = root.join(format!("{command}-{index:03}"));
            match fs::create_dir(&path) {
                Ok(()) => return Ok(Self { path }),
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e),
            }
        }
        unreachable!("run index space exhausted")
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn subdir(&self, name: &str) -> io::Result<RunDir> {
        let path = self.path.join(name);
        fs::create_dir_all(&path)?;
        Ok(RunDir { path })
    }

    pub fn write(&self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.path.join(name), contents)
    }
}

/// Shortest round-trip scientific notation; `nan` for missing values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "nan".into())
}

/// Tab-separated table with a header row.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { text: header.join("\t") + "\n" }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let line: Vec<&str> = cells.iter().map(|c| c.as_ref()).collect();
        self.text.push_str(&line.join("\t"));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// `key = value` metadata lines.
#[derive(Default)]
pub struct KeyValues {
    text: String,
}

impl KeyValues {
    pub fn put(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {value}");
        self
    }

    pub fn finish(&self) -> String {
        self.text.clone()
    }
}

/// Row-major matrix with one row per line.
pub fn matrix(values: &[f64], cols: usize) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for row in values.chunks(cols) {
        let cells: Vec<String> = row.iter().map(|x| num(*x)).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_dirs_are_never_reused() {
        let root = tempfile::tempdir().unwrap();
        let a = RunDir::create(root.path(), "sim1d").unwrap();
        let b = RunDir::create(root.path(), "sim1d").unwrap();
        assert_ne!(a.path(), b.path());
        assert!(b.path().ends_with("sim1d-002"));
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1e-300, -2.5e7, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
