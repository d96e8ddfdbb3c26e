//! Reading and writing dense matrices and parameter documents.
//!
//! Matrices are comma-separated, one row per line, with an optional first
//! row of vertex labels. Two interpretations exist: `weights` (entries are
//! edge weights in (0, 1)) and `counts` (nonnegative flows that
//! [`normalize_counts`] maps into (0, 1)).
//!
//! Count normalization is `w_ij = (x_ij + ½) / (max_{k≠l} x_kl + 1)`, a
//! single global constant. It is order-preserving and keeps zeros and the
//! maximum strictly inside (0, 1), but it is not scale-invariant.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::EstimationReport;
use crate::model::{EdgeWeightMatrix, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Weights,
    Counts,
}

impl FromStr for MatrixFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "weights" => Ok(Self::Weights),
            "counts" => Ok(Self::Counts),
            other => Err(format!(
                "unknown matrix format `{other}` (expected weights|counts)"
            )),
        }
    }
}

/// Nonnegative flow matrix, e.g. migrant counts. The diagonal is ignored
/// and stored as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFlowMatrix {
    n: usize,
    x: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl RawFlowMatrix {
    pub fn new(n: usize, mut x: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if n < 2 || x.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected an n x n matrix with n >= 2, got {} entries for n = {n}",
                x.len()
            )));
        }
        check_labels(labels.as_deref(), n)?;
        for i in 0..n {
            for j in 0..n {
                let v = &mut x[i * n + j];
                if i == j {
                    *v = 0.0;
                } else if !(v.is_finite() && *v >= 0.0) {
                    return Err(Error::InvalidCount {
                        row: i + 1,
                        col: j + 1,
                        value: *v,
                    });
                }
            }
        }
        Ok(Self { n, x, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.n + j]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.x.iter().map(|v| v * factor).collect(),
            self.labels.clone(),
        )
    }
}

/// Edge weights plus optional labels and any load-time warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWeights {
    pub matrix: EdgeWeightMatrix,
    pub labels: Option<Vec<String>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedMatrix {
    Weights(LabeledWeights),
    Counts(RawFlowMatrix),
}

fn check_labels(labels: Option<&[String]>, n: usize) -> Result<()> {
    let Some(labels) = labels else { return Ok(()) };
    if labels.len() != n {
        return Err(Error::Dimension(format!(
            "{} labels for {n} rows",
            labels.len()
        )));
    }
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Dimension(format!("duplicate label `{}`", w[0])));
    }
    Ok(())
}

struct ParsedCsv {
    n: usize,
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

fn parse_csv<R: Read>(reader: R) -> Result<ParsedCsv> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut labels = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                line,
                column: 0,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    line,
                    column: record.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        let parsed: Vec<std::result::Result<f64, _>> =
            record.iter().map(str::parse::<f64>).collect();
        if rows.is_empty() && labels.is_none() && parsed.iter().any(|p| p.is_err()) {
            labels = Some(record.iter().map(str::to_owned).collect());
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (col, p) in parsed.into_iter().enumerate() {
            match p {
                Ok(v) => row.push(v),
                Err(_) => {
                    return Err(Error::Parse {
                        line,
                        column: col + 1,
                        message: format!("`{}` is not a number", &record[col]),
                    })
                }
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    if let Some(w) = width {
        if w != n {
            return Err(Error::Dimension(format!(
                "matrix has {n} rows but {w} columns"
            )));
        }
    }
    if n < 2 {
        return Err(Error::Dimension(format!("need at least 2 rows, got {n}")));
    }
    check_labels(labels.as_deref(), n)?;
    Ok(ParsedCsv {
        n,
        values: rows.concat(),
        labels,
    })
}

/// Parses a matrix from any reader.
pub fn read_matrix<R: Read>(reader: R, format: MatrixFormat) -> Result<LoadedMatrix> {
    let ParsedCsv {
        n,
        mut values,
        labels,
    } = parse_csv(reader)?;
    match format {
        MatrixFormat::Weights => {
            let mut warnings = Vec::new();
            for i in 0..n {
                let d = &mut values[i * n + i];
                if *d != 0.0 {
                    warnings.push(format!(
                        "diagonal entry ({}, {}) = {} forced to 0",
                        i + 1,
                        i + 1,
                        d
                    ));
                    *d = 0.0;
                }
            }
            let matrix = EdgeWeightMatrix::new(n, values)?;
            Ok(LoadedMatrix::Weights(LabeledWeights {
                matrix,
                labels,
                warnings,
            }))
        }
        MatrixFormat::Counts => Ok(LoadedMatrix::Counts(RawFlowMatrix::new(n, values, labels)?)),
    }
}

/// Loads a matrix file in the given format.
pub fn load_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<LoadedMatrix> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    read_matrix(io::BufReader::new(file), format)
}

/// Loads a file in either format and returns validated edge weights,
/// normalizing counts on the way.
pub fn load_weights(path: impl AsRef<Path>, format: MatrixFormat) -> Result<LabeledWeights> {
    match load_matrix(path, format)? {
        LoadedMatrix::Weights(w) => Ok(w),
        LoadedMatrix::Counts(raw) => Ok(LabeledWeights {
            matrix: normalize_counts(&raw)?,
            labels: raw.labels.clone(),
            warnings: Vec::new(),
        }),
    }
}

/// Maps counts into (0, 1) via `(x_ij + ½) / (max x + 1)`.
pub fn normalize_counts(raw: &RawFlowMatrix) -> Result<EdgeWeightMatrix> {
    let n = raw.n;
    let max = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| raw.get(i, j))
        .fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::DegenerateInput(
            "count matrix has no positive off-diagonal entry".into(),
        ));
    }
    let denom = max + 1.0;
    let w = raw
        .x
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            if k / n == k % n {
                0.0
            } else {
                (x + 0.5) / denom
            }
        })
        .collect();
    EdgeWeightMatrix::new(n, w)
}

/// Formats a matrix as CSV with 17 significant digits per entry.
pub fn format_matrix_csv(matrix: &EdgeWeightMatrix, labels: Option<&[String]>) -> String {
    let n = matrix.n();
    let mut out = String::new();
    if let Some(labels) = labels {
        let quoted: Vec<String> = labels.iter().map(|l| quote_field(l)).collect();
        out.push_str(&quoted.join(","));
        out.push('\n');
    }
    for i in 0..n {
        for (j, v) in matrix.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            if i == j {
                out.push('0');
            } else {
                let _ = write!(out, "{v:.16e}");
            }
        }
        out.push('\n');
    }
    out
}

fn quote_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) || s.starts_with('#') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(contents).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

pub fn save_matrix(
    path: impl AsRef<Path>,
    matrix: &EdgeWeightMatrix,
    labels: Option<&[String]>,
) -> Result<()> {
    write_atomic(path, format_matrix_csv(matrix, labels).as_bytes())
}

fn label_for(labels: Option<&[String]>, i: usize) -> String {
    labels.map_or_else(|| (i + 1).to_string(), |l| l[i].clone())
}

/// Renders the parameter document: a `label,a_hat,b_hat` table followed by
/// an optional `[report]` block of `key = value` lines.
pub fn format_params(
    theta: &ParamVector,
    labels: Option<&[String]>,
    report: Option<&EstimationReport>,
) -> String {
    let mut out = String::from("label,a_hat,b_hat\n");
    for (i, (a, b)) in theta.a().iter().zip(theta.b()).enumerate() {
        let _ = writeln!(out, "{},{a:.16e},{b:.16e}", label_for(labels, i));
    }
    if let Some(r) = report {
        out.push_str("\n[report]\n");
        let _ = writeln!(out, "iterations = {}", r.iterations);
        let _ = writeln!(out, "final_step = {:.6e}", r.final_step);
        let _ = writeln!(out, "final_residual = {:.6e}", r.final_residual);
        let _ = writeln!(out, "jacobian_l1 = {:.16e}", r.jacobian_l1);
        let _ = writeln!(out, "M = {:.16e}", r.m);
        let _ = writeln!(out, "epsilon = {:.16e}", r.epsilon);
        let _ = writeln!(out, "converged = {}", r.converged);
    }
    out
}

/// A parsed parameter document.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamsDocument {
    pub labels: Vec<String>,
    pub theta: ParamVector,
    /// `key = value` pairs from the `[report]` block, in file order.
    pub report: Vec<(String, String)>,
}

impl ParamsDocument {
    pub fn report_value(&self, key: &str) -> Option<&str> {
        self.report
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn parse_params(text: &str) -> Result<ParamsDocument> {
    let mut labels = Vec::new();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let mut report = Vec::new();
    let mut in_report = false;
    let mut seen_header = false;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = k + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[report]" {
            in_report = true;
            continue;
        }
        if in_report {
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno,
                column: 1,
                message: "expected `key = value`".into(),
            })?;
            report.push((key.trim().to_owned(), value.trim().to_owned()));
            continue;
        }
        if !seen_header {
            if line != "label,a_hat,b_hat" {
                return Err(Error::Parse {
                    line: lineno,
                    column: 1,
                    message: "expected header `label,a_hat,b_hat`".into(),
                });
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.rsplitn(3, ',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                column: 1,
                message: "expected `label,a_hat,b_hat`".into(),
            });
        }
        let num = |s: &str, col: usize| {
            s.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                column: col,
                message: format!("`{s}` is not a number"),
            })
        };
        b.push(num(fields[0], 3)?);
        a.push(num(fields[1], 2)?);
        labels.push(fields[2].to_owned());
    }
    Ok(ParamsDocument {
        labels,
        theta: ParamVector::new(a, b)?,
        report,
    })
}
