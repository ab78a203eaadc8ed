//! Observed-failure data files.
//!
//! A data file is CSV with a header `x,r` (or just `x` when the removals
//! are supplied separately); lines starting with `#` are comments. The total
//! number of units `n` is always given separately.

use progcens::{CensoredSample, CensoringScheme};

use crate::error::{CliError, CliResult};

/// Bundled wire-connection strength data (`n = 20`).
pub const WIRE_DATA: &str = include_str!("../data/wire_connection.csv");
pub const WIRE_N: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub x: Vec<f64>,
    /// `None` when the file has no `r` column.
    pub r: Option<Vec<usize>>,
}

fn parse_err(line: u64, message: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        message: message.into(),
    }
}

impl DataFile {
    /// Parses CSV text. With `sort`, rows are reordered by `x` (keeping each
    /// row's removal count); otherwise decreasing `x` is an error.
    pub fn parse(text: &str, sort: bool) -> CliResult<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header_line = reader.position().line();
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| parse_err(header_line, e.to_string()))?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        let has_r = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["x", "r"] => true,
            ["x"] => false,
            _ => {
                return Err(parse_err(
                    1,
                    format!("expected header \"x,r\" or \"x\", found {:?}", headers.join(",")),
                ))
            }
        };
        let mut rows: Vec<(f64, usize, u64)> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.iter().all(str::is_empty) {
                continue;
            }
            let want = if has_r { 2 } else { 1 };
            if record.len() != want {
                return Err(parse_err(
                    line,
                    format!("expected {want} field(s), found {}", record.len()),
                ));
            }
            let x: f64 = record[0]
                .parse()
                .map_err(|_| parse_err(line, format!("x value {:?} is not a number", &record[0])))?;
            if !x.is_finite() {
                return Err(parse_err(line, format!("x value {x} is not finite")));
            }
            let r = if has_r {
                record[1].parse().map_err(|_| {
                    parse_err(
                        line,
                        format!("r value {:?} is not a nonnegative integer", &record[1]),
                    )
                })?
            } else {
                0
            };
            rows.push((x, r, line));
        }
        if rows.is_empty() {
            return Err(parse_err(header_line, "no data rows"));
        }
        if sort {
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        } else if let Some(w) = rows.windows(2).find(|w| w[1].0 < w[0].0) {
            return Err(parse_err(
                w[1].2,
                format!(
                    "x values must be nondecreasing ({} follows {}); pass --sort to reorder",
                    w[1].0, w[0].0
                ),
            ));
        }
        Ok(DataFile {
            x: rows.iter().map(|r| r.0).collect(),
            r: has_r.then(|| rows.iter().map(|r| r.1).collect()),
        })
    }

    pub fn read(path: &std::path::Path, sort: bool) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, sort)
    }

    /// Builds the sample with `n` total units. `removals` (comma separated)
    /// replaces the file's `r` column when given.
    pub fn into_sample(self, n: usize, removals: Option<&str>) -> CliResult<CensoredSample> {
        let scheme = match (removals, &self.r) {
            (Some(text), _) => CensoringScheme::parse(n, text)?,
            (None, Some(r)) => progcens::validate_scheme(n, r.len(), r)?,
            (None, None) => {
                return Err(CliError::Usage(
                    "data file has no r column; pass --scheme with the removals".into(),
                ))
            }
        };
        Ok(CensoredSample::new(scheme, self.x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_data_parses() {
        let d = DataFile::parse(WIRE_DATA, false).unwrap();
        assert_eq!(d.x.len(), 10);
        assert_eq!(d.r.as_deref(), Some(&[0, 2, 1, 0, 3, 0, 0, 2, 0, 2][..]));
        let s = d.into_sample(WIRE_N, None).unwrap();
        assert_eq!(s.scheme().n(), 20);
        assert_eq!(s.values()[9], 1850.0);
    }

    #[test]
    fn unsorted_rows_need_the_sort_flag() {
        let text = "x,r\n3,1\n1,0\n2,0\n";
        match DataFile::parse(text, false) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let d = DataFile::parse(text, true).unwrap();
        assert_eq!(d.x, vec![1.0, 2.0, 3.0]);
        assert_eq!(d.r, Some(vec![0, 0, 1]));
    }

    #[test]
    fn bad_values_report_their_line() {
        let text = "# comment\nx,r\n1,0\n2,abc\n";
        match DataFile::parse(text, false) {
            Err(CliError::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("abc"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            DataFile::parse("y,z\n1,2\n", false),
            Err(CliError::Parse { .. })
        ));
        assert!(matches!(DataFile::parse("x,r\n", false), Err(CliError::Parse { .. })));
    }

    #[test]
    fn inconsistent_n_is_a_scheme_error() {
        let d = DataFile::parse(WIRE_DATA, false).unwrap();
        assert!(matches!(
            d.into_sample(21, None),
            Err(CliError::Core(progcens::Error::SchemeInconsistent { .. }))
        ));
    }

    #[test]
    fn removals_can_come_from_the_command_line() {
        let d = DataFile::parse("x\n1\n2\n4\n", false).unwrap();
        assert!(d.r.is_none());
        assert!(d.clone().into_sample(5, None).is_err());
        let s = d.into_sample(5, Some("1,0,1")).unwrap();
        assert_eq!(s.scheme().removals(), &[1, 0, 1]);
    }
}
