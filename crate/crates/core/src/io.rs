//! File formats: headerless numeric CSV for points and distance matrices,
//! the `dim,birth,death` diagram CSV, graph JSON and the run summary line.

use std::fmt;
use std::fs;
use std::io::Read;
use std::path::Path;

use crate::cloud::{Metric, WeightedPointCloud};
use crate::error::{Error, Result};

/// Parses headerless comma-separated numbers. Row and column numbers in
/// errors are 1-based.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: i + 1,
            column: 1,
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    row: i + 1,
                    column: j + 1,
                    message: format!("{cell:?} is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Builds a cloud from CSV text: coordinate rows, or a distance matrix when
/// `metric` is [`Metric::Precomputed`].
pub fn parse_points(text: &str, metric: Metric) -> Result<WeightedPointCloud> {
    let rows = parse_rows(text)?;
    match metric {
        Metric::Precomputed => WeightedPointCloud::from_distance_matrix(&rows),
        _ => WeightedPointCloud::from_points(&rows, metric),
    }
}

/// Reads [`parse_points`] input from a file, or from stdin when `path` is `-`.
pub fn load_points(path: &Path, metric: Metric) -> Result<WeightedPointCloud> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path)?
    };
    parse_points(&text, metric)
}

/// Points as headerless CSV with shortest round-trip float formatting.
pub fn points_to_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&x.to_string());
        }
        out.push('\n');
    }
    out
}

/// Writes `contents` to `path`, or to stdout when `path` is `-`.
pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        out.write_all(contents.as_bytes())?;
        out.flush()?;
    } else {
        fs::write(path, contents)?;
    }
    Ok(())
}

/// One-line run report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub points: usize,
    pub simplices: usize,
    pub b0: usize,
    pub b1: usize,
    pub seconds: f64,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "points={} simplices={} b0={} b1={} seconds={:.3}",
            self.points, self.simplices, self.b0, self.b1, self.seconds
        )
    }
}
