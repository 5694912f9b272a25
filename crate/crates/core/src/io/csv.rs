//! Numeric CSV tables: a header row, then one row per record. Not-applicable
//! entries (NaN) are written as `NA`. Numbers use the shortest representation
//! that round-trips.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LandauError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Table { columns, rows }
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| LandauError::MissingColumn {
                name: name.to_string(),
                available: self.columns.clone(),
            })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }

    /// `(x, y)` pairs with both entries finite.
    pub fn series(&self, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
        let (i, j) = (self.column_index(x)?, self.column_index(y)?);
        Ok(self
            .rows
            .iter()
            .map(|r| (r[i], r[j]))
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            for (k, x) in row.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                if x.is_nan() {
                    s.push_str("NA");
                } else {
                    write!(s, "{x:e}").expect("writing to a String");
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let fail = |line: usize, message: String| LandauError::Csv {
            path: path.to_path_buf(),
            message: format!("line {line}: {message}"),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| fail(1, "empty file".into()))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let row = line
                .split(',')
                .map(|cell| match cell.trim() {
                    "NA" => Ok(f64::NAN),
                    c => c.parse::<f64>().map_err(|_| fail(i + 1, format!("not a number: `{c}`"))),
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(fail(
                    i + 1,
                    format!("{} fields, header has {}", row.len(), columns.len()),
                ));
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    std::fs::write(path, table.to_csv_string()).map_err(|e| LandauError::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| LandauError::io(path, e))?;
    Table::parse(&text, path)
}
