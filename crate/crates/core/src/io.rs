//! Datasets at the I/O boundary: CSV and USPS text ingestion, label
//! augmentation, density-grid export and atomic file writes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::{s, Array2, ArrayView2};

use crate::error::{KstError, Result};
use crate::util::linspace;

/// `N × d` observations with optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub labels: Option<Vec<usize>>,
    pub source: String,
}

impl Dataset {
    pub fn new(x: Array2<f64>, labels: Option<Vec<usize>>, source: impl Into<String>) -> Result<Self> {
        if let Some(((i, j), v)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(KstError::input(format!("non-finite value {v} at row {}, column {}", i + 1, j + 1)));
        }
        if let Some(l) = &labels {
            if l.len() != x.nrows() {
                return Err(KstError::input(format!("{} labels for {} rows", l.len(), x.nrows())));
            }
        }
        Ok(Self { x, labels, source: source.into() })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn labels(&self) -> Result<&[usize]> {
        self.labels.as_deref().ok_or_else(|| KstError::input(format!("dataset '{}' has no labels", self.source)))
    }

    /// Rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        let x = self.x.select(ndarray::Axis(0), idx);
        let labels = self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect());
        Dataset { x, labels, source: self.source.clone() }
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(KstError::input("label count does not match row count"));
        }
        self.labels = Some(labels);
        Ok(self)
    }
}

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| KstError::input(format!("non-numeric cell '{cell}' at row {row}, column {col}")))?;
    if !v.is_finite() {
        return Err(KstError::input(format!("non-finite cell '{cell}' at row {row}, column {col}")));
    }
    Ok(v)
}

fn parse_label(cell: &str, row: usize, col: usize) -> Result<usize> {
    let v = parse_cell(cell, row, col)?;
    if v < 0.0 || v.fract() != 0.0 {
        return Err(KstError::input(format!("label '{cell}' at row {row}, column {col} is not a non-negative integer")));
    }
    Ok(v as usize)
}

/// Parses a rectangular numeric CSV table. Rows and columns in error
/// messages are 1-based and count the header line.
pub fn parse_csv(text: &str, has_header: bool, label_column: Option<usize>, source: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut n = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| KstError::input(format!("{source}: {e}")))?;
        let row = r + 1;
        if r == 0 && has_header {
            continue;
        }
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(KstError::input(format!(
                    "{source}: row {row} has {} columns, expected {w}",
                    record.len()
                )))
            }
            _ => {}
        }
        if let Some(lc) = label_column {
            if lc >= record.len() {
                return Err(KstError::input(format!("{source}: label column {lc} out of range")));
            }
        }
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == label_column {
                labels.push(parse_label(cell, row, c + 1)?);
            } else {
                values.push(parse_cell(cell, row, c + 1)?);
            }
        }
        n += 1;
    }
    let d = width.map(|w| w - label_column.map_or(0, |_| 1)).unwrap_or(0);
    let x = Array2::from_shape_vec((n, d), values).map_err(|e| KstError::input(e.to_string()))?;
    Dataset::new(x, label_column.map(|_| labels), source)
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool, label_column: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_csv(&text, has_header, label_column, &path.display().to_string())
}

/// CSV text with shortest round-trip decimals; labels, if any, go last.
pub fn to_csv(data: &Dataset, header: Option<&[String]>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&h.join(","));
        out.push('\n');
    }
    for (i, row) in data.x.rows().into_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        if let Some(l) = &data.labels {
            let _ = write!(out, ",{}", l[i]);
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(data: &Dataset, path: impl AsRef<Path>, header: Option<&[String]>) -> Result<()> {
    write_atomic(path, to_csv(data, header).as_bytes())
}

/// Number of pixels per USPS image (16 × 16).
pub const USPS_PIXELS: usize = 256;

/// Parses the whitespace-separated USPS text format: one image per line,
/// the digit label followed by 256 pixel values. Pixels are kept unscaled.
pub fn parse_usps(text: &str, source: &str) -> Result<Dataset> {
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != USPS_PIXELS + 1 {
            return Err(KstError::input(format!(
                "{source}: line {} has {} fields, expected {}",
                i + 1,
                fields.len(),
                USPS_PIXELS + 1
            )));
        }
        let label = parse_label(fields[0], i + 1, 1)?;
        if label > 9 {
            return Err(KstError::input(format!("{source}: line {} has digit label {label}", i + 1)));
        }
        labels.push(label);
        for (c, f) in fields[1..].iter().enumerate() {
            values.push(parse_cell(f, i + 1, c + 2)?);
        }
    }
    let x = Array2::from_shape_vec((labels.len(), USPS_PIXELS), values).map_err(|e| KstError::input(e.to_string()))?;
    Dataset::new(x, Some(labels), source)
}

pub fn load_usps(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    parse_usps(&fs::read_to_string(path)?, &path.display().to_string())
}

/// One-hot row for `label`.
pub fn one_hot(label: usize, n_classes: usize) -> Vec<f64> {
    let mut v = vec![0.0; n_classes];
    v[label] = 1.0;
    v
}

/// Appends a one-hot label block, `d' = d + n_classes`.
pub fn augment_labels(data: &Dataset, n_classes: usize) -> Result<Dataset> {
    let labels = data.labels()?;
    if let Some(bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(KstError::input(format!("label {bad} out of range for {n_classes} classes")));
    }
    let (n, d) = data.x.dim();
    let mut x = Array2::zeros((n, d + n_classes));
    x.slice_mut(s![.., ..d]).assign(&data.x);
    for (i, &l) in labels.iter().enumerate() {
        x[(i, d + l)] = 1.0;
    }
    Dataset::new(x, data.labels.clone(), data.source.clone())
}

/// Drops the trailing `n_classes` columns added by [`augment_labels`].
pub fn strip_labels(data: &Dataset, n_classes: usize) -> Result<Dataset> {
    let d = data.dim();
    if n_classes > d {
        return Err(KstError::input("label block wider than the data"));
    }
    Dataset::new(data.x.slice(s![.., ..d - n_classes]).to_owned(), data.labels.clone(), data.source.clone())
}

/// Uniform grid over `bounds` (one `(lo, hi)` pair per dimension) scored by
/// `f`. Rows are in row-major order: the first coordinate varies slowest.
pub fn density_grid<F>(bounds: &[(f64, f64)], resolution: usize, f: F) -> Result<Vec<(Vec<f64>, f64)>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    match bounds.len() {
        1 | 2 => {}
        d => return Err(KstError::unsupported(format!("density grids are only exported for d <= 2, got d = {d}"))),
    }
    if resolution < 2 {
        return Err(KstError::input("grid resolution must be at least 2"));
    }
    let axes: Vec<Vec<f64>> = bounds.iter().map(|&(lo, hi)| linspace(lo, hi, resolution)).collect();
    let points: Vec<Vec<f64>> = if axes.len() == 1 {
        axes[0].iter().map(|&x| vec![x]).collect()
    } else {
        axes[0].iter().flat_map(|&a| axes[1].iter().map(move |&b| vec![a, b])).collect()
    };
    points.into_par_iter().map(|p| f(&p).map(|v| (p, v))).collect()
}

pub fn density_grid_csv(rows: &[(Vec<f64>, f64)]) -> String {
    let d = rows.first().map_or(1, |r| r.0.len());
    let mut out = String::new();
    let names: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    let _ = writeln!(out, "{},log_density", names.join(","));
    for (p, v) in rows {
        let coords: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
        let _ = writeln!(out, "{},{v:?}", coords.join(","));
    }
    out
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| KstError::Io(e.error))?;
    Ok(())
}

/// Splits an `H × W` image with `channels` interleaved values per pixel into
/// non-overlapping `patch × patch` blocks, one flattened row per block.
pub fn image_patches(pixels: ArrayView2<f64>, width: usize, channels: usize, patch: usize) -> Result<Array2<f64>> {
    if pixels.ncols() != width * channels {
        return Err(KstError::input("pixel row width does not match width × channels"));
    }
    if patch == 0 {
        return Err(KstError::input("patch size must be positive"));
    }
    let height = pixels.nrows();
    let (ph, pw) = (height / patch, width / patch);
    let dim = patch * patch * channels;
    let mut out = Array2::zeros((ph * pw, dim));
    for bi in 0..ph {
        for bj in 0..pw {
            let r = bi * pw + bj;
            let mut k = 0;
            for di in 0..patch {
                for dj in 0..patch {
                    for c in 0..channels {
                        out[(r, k)] = pixels[(bi * patch + di, (bj * patch + dj) * channels + c)];
                        k += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}
