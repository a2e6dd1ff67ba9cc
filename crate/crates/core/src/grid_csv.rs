//! Loading node data laid out on a complete tensor grid from CSV.

use std::path::Path;

use crate::domain::Domain;
use crate::error::{Error, Result};

/// Header kind decides how many leading columns are coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `x1..xN,re,im`
    Field,
    /// `x1..xN,a1..aN`
    Potential,
    /// `x1..xN,inside`
    Mask,
}

impl Layout {
    fn dim_for(self, columns: usize) -> Option<usize> {
        match self {
            Layout::Field if columns >= 3 => Some(columns - 2),
            Layout::Potential if columns >= 2 && columns % 2 == 0 => Some(columns / 2),
            Layout::Mask if columns >= 2 => Some(columns - 1),
            _ => None,
        }
    }

    fn expected_header(self, dim: usize) -> Vec<String> {
        let mut h: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        match self {
            Layout::Field => h.extend(["re".to_string(), "im".to_string()]),
            Layout::Potential => h.extend((1..=dim).map(|i| format!("a{i}"))),
            Layout::Mask => h.push("inside".to_string()),
        }
        h
    }
}

/// A grid whose cell centers are the CSV nodes, with the data columns per
/// cell in row-major order.
#[derive(Debug, Clone)]
pub struct GridData {
    pub domain: Domain,
    pub values: Vec<Vec<f64>>,
}

pub fn load(path: &Path, layout: Layout) -> Result<GridData> {
    let text = std::fs::read_to_string(path)?;
    parse(&text, layout)
}

pub fn parse(text: &str, layout: Layout) -> Result<GridData> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv { line: 1, msg: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let dim = layout
        .dim_for(header.len())
        .ok_or_else(|| Error::Csv { line: 1, msg: format!("unexpected column count {}", header.len()) })?;
    if dim > crate::domain::MAX_DIM {
        return Err(Error::Csv { line: 1, msg: format!("dimension {dim} is not supported") });
    }
    let expected = layout.expected_header(dim);
    if header != expected {
        return Err(Error::Csv { line: 1, msg: format!("expected header {}", expected.join(",")) });
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Csv { line, msg: e.to_string() })?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Csv { line, msg: format!("{f:?}: {e}") }))
            .collect::<Result<Vec<f64>>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Csv { line, msg: "non-finite value".into() });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::TensorGrid("no nodes".into()));
    }

    // distinct coordinates per axis
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut v: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        v.sort_by(f64::total_cmp);
        let span = (v[v.len() - 1] - v[0]).abs().max(1.0);
        v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * span);
        if v.len() < 2 {
            return Err(Error::TensorGrid(format!("axis {} has a single coordinate", i + 1)));
        }
        let h = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
        for (j, x) in v.iter().enumerate() {
            if (x - (v[0] + j as f64 * h)).abs() > 1e-6 * h {
                return Err(Error::TensorGrid(format!("axis {} is not uniformly spaced", i + 1)));
            }
        }
        axes.push(v);
    }
    let res: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = res.iter().product();
    let lo: Vec<f64> = axes.iter().map(|a| a[0] - 0.5 * step(a)).collect();
    let hi: Vec<f64> = axes.iter().map(|a| a[a.len() - 1] + 0.5 * step(a)).collect();
    let domain = Domain::new_box(&lo, &hi, &res)?;

    let mut values: Vec<Option<Vec<f64>>> = vec![None; total];
    for row in &rows {
        let mut idx = Vec::with_capacity(dim);
        for i in 0..dim {
            let j = ((row[i] - axes[i][0]) / step(&axes[i])).round() as usize;
            idx.push(j);
        }
        let flat = domain.flat_index(&idx);
        if values[flat].is_some() {
            return Err(Error::TensorGrid(format!("node {:?} appears twice", &row[..dim])));
        }
        values[flat] = Some(row[dim..].to_vec());
    }
    let missing = values.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(Error::TensorGrid(format!("{missing} of {total} grid nodes are missing")));
    }
    Ok(GridData { domain, values: values.into_iter().map(Option::unwrap).collect() })
}

fn step(axis: &[f64]) -> f64 {
    (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
}
