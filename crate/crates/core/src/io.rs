//! CSV ingestion.
//!
//! The first row is a header. One column is the response; the remaining
//! columns are features in file order. Numbers use `.` as the decimal
//! separator regardless of locale.

use std::io::Read;
use std::path::Path;

use ndarray::{Array1, Array2, ShapeBuilder};

use crate::data::{Dataset, Family};
use crate::error::{Error, Result};

/// Which CSV column holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseSelector {
    Name(String),
    /// Zero-based column index.
    Index(usize),
}

/// Raw numeric table with its header.
#[derive(Debug, Clone)]
pub struct NumericTable {
    pub header: Vec<String>,
    /// Row-major values.
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn column_index(&self, selector: &ResponseSelector) -> Result<usize> {
        match selector {
            ResponseSelector::Name(name) => self
                .header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::InvalidInput(format!("response column '{name}' not found in header"))),
            ResponseSelector::Index(k) => {
                if *k < self.header.len() {
                    Ok(*k)
                } else {
                    Err(Error::InvalidInput(format!(
                        "response index {k} out of range ({} columns)",
                        self.header.len()
                    )))
                }
            }
        }
    }

    /// Matrix of every column except `skip`, column-major.
    pub fn matrix_without(&self, skip: Option<usize>) -> (Array2<f64>, Vec<String>) {
        let cols: Vec<usize> = (0..self.header.len()).filter(|&c| Some(c) != skip).collect();
        let n = self.rows.len();
        let mut x = Array2::zeros((n, cols.len()).f());
        for (i, row) in self.rows.iter().enumerate() {
            for (k, &c) in cols.iter().enumerate() {
                x[[i, k]] = row[c];
            }
        }
        (x, cols.iter().map(|&c| self.header[c].clone()).collect())
    }
}

pub fn read_table_from<R: Read>(reader: R) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() {
        return Err(Error::InvalidInput("CSV header is empty".into()));
    }
    let mut rows = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        // header is line 1
        let line = r + 2;
        let record = record.map_err(|e| Error::Csv(format!("line {line}: {e}")))?;
        if record.len() != header.len() {
            return Err(Error::InvalidInput(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(header.len());
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "line {line}, column '{}': cannot parse '{field}' as a number",
                    header[c]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: r,
                    column: format!("column '{}'", header[c]),
                    value: v,
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(NumericTable { header, rows })
}

pub fn read_table(path: &Path) -> Result<NumericTable> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_table_from(std::io::BufReader::new(file))
}

pub fn dataset_from_table(table: &NumericTable, response: &ResponseSelector, family: Family) -> Result<Dataset<f64>> {
    let k = table.column_index(response)?;
    let (x, names) = table.matrix_without(Some(k));
    let y: Array1<f64> = table.rows.iter().map(|r| r[k]).collect();
    Dataset::new(x, y, family)?.with_feature_names(names)
}

pub fn read_dataset(path: &Path, response: &ResponseSelector, family: Family) -> Result<Dataset<f64>> {
    dataset_from_table(&read_table(path)?, response, family)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "a,y,b\n1.5,2,3\n-0.25, 4 ,1e-3\n2,6,0\n";

    #[test]
    fn reads_by_name_and_index() {
        let t = read_table_from(CSV.as_bytes()).unwrap();
        let d = dataset_from_table(&t, &ResponseSelector::Name("y".into()), Family::Gaussian).unwrap();
        assert_eq!(d.names(), vec!["a", "b"]);
        assert_eq!(d.response.to_vec(), vec![2.0, 4.0, 6.0]);
        assert_eq!(d.features[[1, 1]], 1e-3);
        let d2 = dataset_from_table(&t, &ResponseSelector::Index(1), Family::Gaussian).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn missing_response_names_column() {
        let t = read_table_from(CSV.as_bytes()).unwrap();
        let err = dataset_from_table(&t, &ResponseSelector::Name("target".into()), Family::Gaussian).unwrap_err();
        assert!(err.to_string().contains("'target'"));
    }

    #[test]
    fn bad_number_names_line_and_column() {
        let err = read_table_from("a,y\n1,2\n3,x\n".as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("'y'"), "{msg}");
    }
}
