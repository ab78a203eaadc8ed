//! Tabular output as CSV or aligned text.

use crate::error::{CliError, CliResult};

/// Four decimal places with `.` as separator, independent of locale.
pub fn f4(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::io("<csv buffer>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Space-aligned text for terminals.
    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_decimals() {
        assert_eq!(f4(0.10694), "0.1069");
        assert_eq!(f4(63.85619), "63.8562");
        assert_eq!(f4(-0.00004), "-0.0000");
        assert_eq!(f4(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_and_text() {
        let mut t = Table::new(["scheme", "H"]);
        t.push(vec!["[1]".into(), f4(0.1069)]);
        t.push(vec!["20:0,2".into(), f4(0.5)]);
        assert_eq!(t.to_csv().unwrap(), "scheme,H\n[1],0.1069\n\"20:0,2\",0.5000\n");
        assert_eq!(t.to_text(), "scheme  H\n[1]     0.1069\n20:0,2  0.5000\n");
    }
}
