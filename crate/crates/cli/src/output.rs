//! CSV artifacts with a schema header and fixed significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const SCHEMA_HEADER: &str = "# schema-version: 1";

pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, digits: usize) -> String {
        let mut out = String::new();
        out.push_str(SCHEMA_HEADER);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| number(*v, digits)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `digits` significant digits in scientific notation; non-finite values
/// are spelled out.
pub fn number(v: f64, digits: usize) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // avoid a signed zero leaking into diffs
        let v = if v == 0.0 { 0.0 } else { v };
        format!("{:.*e}", digits.saturating_sub(1), v)
    }
}

pub struct Artifacts {
    dir: PathBuf,
    pub digits: usize,
    summary: String,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, digits: usize) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            digits,
            summary: String::new(),
            written: Vec::new(),
        })
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, table.render(self.digits))
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }

    /// Records an invariant with its residual and limit.
    pub fn check(&mut self, name: &str, residual: f64, limit: f64) -> bool {
        let ok = residual <= limit;
        let tag = if ok { "ok" } else { "FAILED" };
        let _ = writeln!(
            self.summary,
            "check {name}: residual {} limit {} {tag}",
            number(residual, 3),
            number(limit, 3)
        );
        ok
    }

    pub fn value(&mut self, name: &str, v: f64) {
        let _ = writeln!(self.summary, "{name} = {}", number(v, self.digits));
    }

    pub fn finish(mut self) -> Result<Vec<PathBuf>, CliError> {
        let path = self.dir.join("summary.txt");
        std::fs::write(&path, &self.summary).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(self.written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_fixed_significant_digits() {
        assert_eq!(number(-0.517093985989552, 12), "-5.17093985990e-1");
        assert_eq!(number(0.0, 3), "0.00e0");
        assert_eq!(number(-0.0, 3), "0.00e0");
        assert_eq!(number(f64::NAN, 12), "nan");
    }

    #[test]
    fn table_starts_with_schema_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0, 2.0]);
        let text = t.render(4);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(SCHEMA_HEADER));
        assert_eq!(lines.next(), Some("a,b"));
        assert_eq!(lines.next(), Some("1.000e0,2.000e0"));
    }
}
