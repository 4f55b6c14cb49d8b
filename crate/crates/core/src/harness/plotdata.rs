//! CSV plot data. Each file starts with one `#` comment line naming and
//! describing its columns, followed by an ordinary CSV header and rows.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// One labeled curve: rows of numbers matching the family's columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub rows: Vec<Vec<f64>>,
}

/// Curves sharing columns; written to `<name>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFamily {
    pub name: String,
    pub description: String,
    pub columns: Vec<String>,
    pub series: Vec<Series>,
}

impl CurveFamily {
    pub fn new(name: &str, description: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, rows: Vec<Vec<f64>>) {
        self.series.push(Series {
            label: label.into(),
            rows,
        });
    }

    pub fn n_rows(&self) -> usize {
        self.series.iter().map(|s| s.rows.len()).sum()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlotDataError {
    #[error("family {family}: series {series} has a row of width {got}, expected {expected}")]
    Width {
        family: String,
        series: String,
        got: usize,
        expected: usize,
    },
    #[error("family name {0:?} is not a plain file stem")]
    Name(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Writes a table with a leading comment line. Cells are written verbatim
/// through the CSV writer, so labels with commas are quoted.
pub fn write_table(path: &Path, comment: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), PlotDataError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "# {}", comment.replace('\n', " "))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip rendering, scientific for very small or large
/// magnitudes; `NaN` for missing values.
pub fn fmt_num(x: f64) -> String {
    let m = x.abs();
    if x.is_nan() {
        "NaN".into()
    } else if x != 0.0 && (m < 1e-4 || m >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// One CSV per family in `dir`, with columns `series,<columns…>`.
pub fn emit_plotdata(dir: &Path, families: &[CurveFamily]) -> Result<Vec<PathBuf>, PlotDataError> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::with_capacity(families.len());
    for fam in families {
        if fam.name.is_empty() || fam.name.contains(['/', '\\', '.']) {
            return Err(PlotDataError::Name(fam.name.clone()));
        }
        let width = fam.columns.len();
        let mut rows = Vec::with_capacity(fam.n_rows());
        for s in &fam.series {
            for r in &s.rows {
                if r.len() != width {
                    return Err(PlotDataError::Width {
                        family: fam.name.clone(),
                        series: s.label.clone(),
                        got: r.len(),
                        expected: width,
                    });
                }
                let mut cells = vec![s.label.clone()];
                cells.extend(r.iter().map(|&x| fmt_num(x)));
                rows.push(cells);
            }
        }
        let mut header = vec!["series".to_string()];
        header.extend(fam.columns.iter().cloned());
        let comment = format!("{}: {}; {}", fam.name, header.join(","), fam.description);
        let path = dir.join(format!("{}.csv", fam.name));
        write_table(&path, &comment, &header, &rows)?;
        out.push(path);
    }
    Ok(out)
}
