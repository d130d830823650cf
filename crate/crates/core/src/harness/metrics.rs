use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{ensure, Error, Result};

/// What a [`MetricSeries`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ber,
    /// Signal-to-interference-plus-noise ratio in dB.
    SinrDb,
    /// Windowed squared-error criterion for model-order selection.
    Criterion,
}

/// Averaged learning curves: one column per algorithm over a shared axis.
/// `None` marks a point with no data (for example an empty evaluation
/// window) so it cannot be mistaken for a measured zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub axis_label: String,
    pub axis: Vec<f64>,
    pub metric: Metric,
    pub runs: usize,
    pub columns: Vec<(String, Vec<Option<f64>>)>,
}

/// Text written for a missing value.
pub const NO_DATA: &str = "NA";

impl MetricSeries {
    pub fn new(axis_label: impl Into<String>, axis: Vec<f64>, metric: Metric, runs: usize) -> Self {
        Self {
            axis_label: axis_label.into(),
            axis,
            metric,
            runs,
            columns: Vec::new(),
        }
    }

    pub fn push_column(
        &mut self,
        label: impl Into<String>,
        values: Vec<Option<f64>>,
    ) -> Result<()> {
        ensure!(
            values.len() == self.axis.len(),
            "column has {} values but the axis has {}",
            values.len(),
            self.axis.len()
        );
        self.columns.push((label.into(), values));
        Ok(())
    }

    pub fn column(&self, label: &str) -> Option<&[Option<f64>]> {
        self.columns
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.as_slice())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(l, _)| l.as_str())
    }

    /// Checks the value ranges expected for the metric.
    pub fn validate(&self) -> Result<()> {
        for (label, values) in &self.columns {
            ensure!(
                values.len() == self.axis.len(),
                "column `{label}` is ragged"
            );
            for v in values.iter().flatten() {
                match self.metric {
                    // a single bin can exceed 1/2 when a receiver diverges
                    Metric::Ber => {
                        ensure!((0.0..=1.0).contains(v), "BER {v} out of range in `{label}`")
                    }
                    Metric::SinrDb | Metric::Criterion => {
                        ensure!(v.is_finite(), "non-finite value in `{label}`")
                    }
                }
            }
        }
        Ok(())
    }

    /// CSV text: header `axis,<label>,…` and one row per axis value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis");
        for (label, _) in &self.columns {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (row, a) in self.axis.iter().enumerate() {
            out.push_str(&fmt_value(*a));
            for (_, values) in &self.columns {
                out.push(',');
                match values[row] {
                    Some(v) => out.push_str(&fmt_value(v)),
                    None => out.push_str(NO_DATA),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt_value(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v:.16e}").expect("writing to a String");
    s
}

/// Writes `series` as CSV to `destination`.
pub fn export_csv(series: &MetricSeries, destination: &Path) -> Result<()> {
    fs::write(destination, series.to_csv())?;
    Ok(())
}

/// Parsed CSV: labels and rows of `(axis, values)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub labels: Vec<String>,
    pub axis: Vec<f64>,
    pub values: Vec<Vec<Option<f64>>>,
}

/// Reads back the output of [`MetricSeries::to_csv`].
pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::pre("empty CSV"))?;
    let mut fields = header.split(',');
    ensure!(
        fields.next() == Some("axis"),
        "CSV header must start with `axis`"
    );
    let labels: Vec<String> = fields.map(str::to_owned).collect();
    let mut axis = Vec::new();
    let mut values = Vec::new();
    for (n, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        ensure!(
            cells.len() == labels.len() + 1,
            "CSV row {} has {} cells, expected {}",
            n + 1,
            cells.len(),
            labels.len() + 1
        );
        axis.push(parse_cell(cells[0])?.ok_or_else(|| Error::pre("missing axis value"))?);
        values.push(
            cells[1..]
                .iter()
                .map(|c| parse_cell(c))
                .collect::<Result<_>>()?,
        );
    }
    Ok(CsvTable {
        labels,
        axis,
        values,
    })
}

fn parse_cell(cell: &str) -> Result<Option<f64>> {
    if cell == NO_DATA {
        return Ok(None);
    }
    cell.parse::<f64>()
        .map(Some)
        .map_err(|e| Error::pre(format!("bad CSV number `{cell}`: {e}")))
}
