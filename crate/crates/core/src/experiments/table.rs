//! Deterministic CSV rendering.

use crate::error::{Error, Result};

/// Fixed scientific notation with 12 significant digits. Enough for the
/// S_dB column to be recomputed from V_min to far better than 1e-9.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 {
        // Normalize −0 so that sign noise never changes the bytes.
        "0.00000000000e0".into()
    } else {
        format!("{v:.11e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of a header column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric values of one column; non-numeric cells become NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| if let Cell::Num(v) = r[i] { v } else { f64::NAN }).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(format!("CSV encoding failed: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            let fields = row.iter().map(|c| match c {
                Cell::Num(v) => format_number(*v),
                Cell::Text(s) => s.clone(),
                Cell::Empty => String::new(),
            });
            w.write_record(fields).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("CSV encoding failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}
