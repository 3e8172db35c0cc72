//! CSV writing with a `#`-prefixed provenance header.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // keeps -0.0 and 0.0 identical
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

pub struct Table {
    comments: Vec<String>,
    header: String,
    body: String,
}

impl Table {
    pub fn new(hash: &str, header: &str) -> Self {
        Self {
            comments: vec![format!("levinson2d {}", env!("CARGO_PKG_VERSION")), format!("config sha256 {hash}")],
            header: header.to_string(),
            body: String::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn row(&mut self, cells: &[String]) -> &mut Self {
        let _ = writeln!(self.body, "{}", cells.join(","));
        self
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
        let mut text = String::new();
        for c in &self.comments {
            let _ = writeln!(text, "# {c}");
        }
        let _ = writeln!(text, "{}", self.header);
        text.push_str(&self.body);
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(num(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(num(-1.5e-20), "-1.50000000000e-20");
        assert_eq!(num(-0.0), num(0.0));
    }
}
