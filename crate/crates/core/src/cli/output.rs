//! CSV tables with fixed formatting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Significant digits after the leading one in every numeric cell.
pub const DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Num(x) => write!(out, "{x:.DIGITS$e}").expect("write to string"),
            Cell::Text(s) => out.extend(s.chars().map(|c| match c {
                ',' => ';',
                '\n' | '\r' => ' ',
                c => c,
            })),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem; the file is `<name>.csv`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }
}

pub fn write_tables(dir: &Path, tables: &[Table]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    tables
        .iter()
        .map(|t| {
            let path = dir.join(t.file_name());
            std::fs::write(&path, t.to_csv())?;
            Ok(path)
        })
        .collect()
}

/// Short label for a curve value: plain decimals in `[1e-3, 1e4)`, else exponent form.
pub fn value_label(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-3..1e4).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
