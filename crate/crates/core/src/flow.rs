//! Flow-matrix ingestion: reading raw (generally asymmetric) count matrices,
//! symmetrizing them and normalizing into exchange matrices.
//!
//! An *exchange matrix* is a symmetric nonnegative matrix whose entries sum
//! to one; it is the normalized adjacency of a weighted undirected graph
//! (loops allowed). Its row sums are the vertex weights, which double as the
//! stationary distribution of the associated reversible Markov chain.

use std::io::BufRead;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numfmt::fmt_num;

const SYMMETRY_TOL: f64 = 1e-12;
const TOTAL_TOL: f64 = 1e-12;
const IPF_MAX_SWEEPS: usize = 10_000;
const IPF_TOL: f64 = 1e-10;

/// Raw flow counts between `n` labelled vertices. Generally asymmetric.
#[derive(Debug, Clone)]
pub struct FlowMatrix {
    counts: DMatrix<f64>,
    labels: Vec<String>,
}

/// How an asymmetric flow matrix is reduced to a symmetric one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetrizationMethod {
    /// `(n_ij + n_ji) / 2`.
    HalfSum,
    /// `sqrt(n_ij * n_ji)`.
    GeometricMean,
    /// Fit a quasi-symmetric model by iterative proportional fitting, then
    /// take the entrywise geometric mean of the fitted table.
    QuasiSymmetric,
}

impl SymmetrizationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SymmetrizationMethod::HalfSum => "half_sum",
            SymmetrizationMethod::GeometricMean => "geometric_mean",
            SymmetrizationMethod::QuasiSymmetric => "quasi_symmetric",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "half_sum" => Ok(SymmetrizationMethod::HalfSum),
            "geometric_mean" => Ok(SymmetrizationMethod::GeometricMean),
            "quasi_symmetric" => Ok(SymmetrizationMethod::QuasiSymmetric),
            other => Err(Error::BadParameter(format!(
                "unknown symmetrization method '{other}' (expected half_sum, geometric_mean or quasi_symmetric)"
            ))),
        }
    }
}

/// Symmetric nonnegative matrix summing to one, with strictly positive
/// vertex weights `f_i` (the row sums).
#[derive(Debug, Clone)]
pub struct ExchangeMatrix {
    e: DMatrix<f64>,
    f: DVector<f64>,
    labels: Vec<String>,
}

fn validate_labels(labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for label in labels {
        if label.is_empty() {
            return Err(Error::BadLabel(label.clone(), "empty".into()));
        }
        if label.contains(',') || label.contains('\n') || label.contains('\r') {
            return Err(Error::BadLabel(
                label.clone(),
                "contains a separator character".into(),
            ));
        }
        if !seen.insert(label.as_str()) {
            return Err(Error::DuplicateLabel(label.clone()));
        }
    }
    Ok(())
}

impl FlowMatrix {
    /// Builds a flow matrix, checking squareness, nonnegativity, the
    /// existence of a positive entry and label uniqueness.
    pub fn new(counts: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if counts.nrows() != counts.ncols() {
            return Err(Error::NotSquare {
                rows: counts.nrows(),
                cols: counts.ncols(),
            });
        }
        if labels.len() != counts.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {}x{} matrix",
                labels.len(),
                counts.nrows(),
                counts.ncols()
            )));
        }
        validate_labels(&labels)?;
        let mut any_positive = false;
        for i in 0..counts.nrows() {
            for j in 0..counts.ncols() {
                let v = counts[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        i,
                        j,
                        value: v,
                        context: "flow count".into(),
                    });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i + 1,
                        col: j + 1,
                        value: v,
                    });
                }
                if v > 0.0 {
                    any_positive = true;
                }
            }
        }
        if !any_positive {
            return Err(Error::NoPositiveEntry);
        }
        Ok(FlowMatrix { counts, labels })
    }

    /// Reads a flow matrix from CSV.
    ///
    /// The first row holds column labels (its first cell is ignored); each
    /// subsequent row starts with its label followed by `n` numeric fields.
    /// The row label sequence must match the column label sequence. Numbers
    /// are nonnegative decimals or integers (exponent notation accepted, no
    /// thousands separators).
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::CsvParse {
                row: idx,
                col: 0,
                msg: format!("io error: {e}"),
            })?;
            lines.push(line);
        }
        while lines.last().is_some_and(|l| l.trim().is_empty()) {
            lines.pop();
        }
        if lines.is_empty() {
            return Err(Error::CsvParse {
                row: 0,
                col: 0,
                msg: "empty input".into(),
            });
        }

        let header: Vec<&str> = lines[0].split(',').collect();
        if header.len() < 2 {
            return Err(Error::CsvParse {
                row: 0,
                col: 1,
                msg: "header must contain at least one column label".into(),
            });
        }
        let col_labels: Vec<String> = header[1..].iter().map(|s| s.trim().to_string()).collect();
        let n = col_labels.len();

        let data_rows = lines.len() - 1;
        if data_rows != n {
            return Err(Error::NotSquare {
                rows: data_rows,
                cols: n,
            });
        }

        let mut row_labels = Vec::with_capacity(n);
        let mut counts = DMatrix::zeros(n, n);
        for (r, line) in lines[1..].iter().enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != n + 1 {
                return Err(Error::CsvParse {
                    row: r + 1,
                    col: fields.len(),
                    msg: format!("expected {} fields, found {}", n + 1, fields.len()),
                });
            }
            row_labels.push(fields[0].trim().to_string());
            for (c, field) in fields[1..].iter().enumerate() {
                let text = field.trim();
                let value: f64 = text.parse().map_err(|_| Error::CsvParse {
                    row: r + 1,
                    col: c + 2,
                    msg: format!("unparsable numeric field '{text}'"),
                })?;
                if !value.is_finite() {
                    return Err(Error::CsvParse {
                        row: r + 1,
                        col: c + 2,
                        msg: format!("non-finite value '{text}'"),
                    });
                }
                if value < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: r + 1,
                        col: c + 2,
                        value,
                    });
                }
                counts[(r, c)] = value;
            }
        }

        for (pos, (rl, cl)) in row_labels.iter().zip(col_labels.iter()).enumerate() {
            if rl != cl {
                return Err(Error::LabelMismatch {
                    position: pos + 1,
                    row_label: rl.clone(),
                    col_label: cl.clone(),
                });
            }
        }

        FlowMatrix::new(counts, row_labels)
    }

    pub fn counts(&self) -> &DMatrix<f64> {
        &self.counts
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.counts.nrows()
    }
}

/// Reduces a flow matrix to a symmetric nonnegative matrix.
///
/// The output is bitwise symmetric: each unordered pair is computed once and
/// mirrored. `geometric_mean` and `quasi_symmetric` map any pair with
/// `n_ij * n_ji = 0` to zero.
pub fn symmetrize(flow: &FlowMatrix, method: SymmetrizationMethod) -> Result<DMatrix<f64>> {
    let n = flow.n();
    let counts = flow.counts();
    let mut s = DMatrix::zeros(n, n);
    match method {
        SymmetrizationMethod::HalfSum => {
            for i in 0..n {
                for j in i..n {
                    let v = (counts[(i, j)] + counts[(j, i)]) / 2.0;
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
        }
        SymmetrizationMethod::GeometricMean => {
            for i in 0..n {
                for j in i..n {
                    let v = (counts[(i, j)] * counts[(j, i)]).sqrt();
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
        }
        SymmetrizationMethod::QuasiSymmetric => {
            let fitted = fit_quasi_symmetric(flow)?;
            for i in 0..n {
                for j in i..n {
                    let v = if counts[(i, j)] * counts[(j, i)] > 0.0 || i == j {
                        (fitted[(i, j)] * fitted[(j, i)]).sqrt()
                    } else {
                        0.0
                    };
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
        }
    }
    Ok(s)
}

/// Fits the quasi-symmetry model `m_ij = a_i b_j c_ij` (`c` symmetric) by
/// iterative proportional fitting and returns the fitted table.
///
/// The sufficient statistics are the row sums, the column sums and the
/// symmetric pair totals `n_ij + n_ji`; each sweep rescales the table to
/// match them in turn, starting from the all-ones table. Convergence is
/// declared when the largest relative margin residual drops below 1e-10,
/// with a cap of 10,000 sweeps.
pub fn fit_quasi_symmetric(flow: &FlowMatrix) -> Result<DMatrix<f64>> {
    let n = flow.n();
    let counts = flow.counts();

    let row_sums: Vec<f64> = (0..n).map(|i| counts.row(i).sum()).collect();
    let col_sums: Vec<f64> = (0..n).map(|j| counts.column(j).sum()).collect();
    for (i, &r) in row_sums.iter().enumerate() {
        if r <= 0.0 {
            return Err(Error::ZeroMargin("row", i + 1));
        }
    }
    for (j, &c) in col_sums.iter().enumerate() {
        if c <= 0.0 {
            return Err(Error::ZeroMargin("column", j + 1));
        }
    }

    let mut m = DMatrix::from_element(n, n, 1.0);
    let mut residual = f64::INFINITY;
    for _sweep in 0..IPF_MAX_SWEEPS {
        for i in 0..n {
            let s: f64 = m.row(i).sum();
            if s > 0.0 {
                let factor = row_sums[i] / s;
                for j in 0..n {
                    m[(i, j)] *= factor;
                }
            }
        }
        for j in 0..n {
            let s: f64 = m.column(j).sum();
            if s > 0.0 {
                let factor = col_sums[j] / s;
                for i in 0..n {
                    m[(i, j)] *= factor;
                }
            }
        }
        for i in 0..n {
            for j in i..n {
                let target = counts[(i, j)] + counts[(j, i)];
                let current = m[(i, j)] + m[(j, i)];
                if target == 0.0 {
                    m[(i, j)] = 0.0;
                    m[(j, i)] = 0.0;
                } else if current > 0.0 {
                    let factor = target / current;
                    m[(i, j)] *= factor;
                    m[(j, i)] *= factor;
                }
            }
        }

        residual = 0.0f64;
        for (i, &target) in row_sums.iter().enumerate() {
            let s: f64 = m.row(i).sum();
            residual = residual.max((s - target).abs() / target);
        }
        for (j, &target) in col_sums.iter().enumerate() {
            let s: f64 = m.column(j).sum();
            residual = residual.max((s - target).abs() / target);
        }
        for i in 0..n {
            for j in i..n {
                let target = counts[(i, j)] + counts[(j, i)];
                if target > 0.0 {
                    let current = m[(i, j)] + m[(j, i)];
                    residual = residual.max((current - target).abs() / target);
                }
            }
        }
        if residual < IPF_TOL {
            return Ok(m);
        }
    }
    Err(Error::IpfNonConvergence {
        sweeps: IPF_MAX_SWEEPS,
        residual,
    })
}

/// Normalizes a symmetric nonnegative matrix into an exchange matrix:
/// `e = S / sum(S)` with recomputed vertex weights.
pub fn to_exchange(s: &DMatrix<f64>, labels: &[String]) -> Result<ExchangeMatrix> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: s.ncols(),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dev = (s[(i, j)] - s[(j, i)]).abs();
            if dev > SYMMETRY_TOL * s[(i, j)].abs().max(1.0) {
                return Err(Error::NotSymmetric {
                    i,
                    j,
                    deviation: dev,
                });
            }
        }
        for j in 0..n {
            if s[(i, j)] < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i + 1,
                    col: j + 1,
                    value: s[(i, j)],
                });
            }
        }
    }
    let total: f64 = s.sum();
    if total <= 0.0 {
        return Err(Error::NoPositiveEntry);
    }
    let e = s / total;
    ExchangeMatrix::from_normalized(e, labels.to_vec())
}

impl ExchangeMatrix {
    /// Builds an exchange matrix from an already-normalized symmetric matrix.
    ///
    /// Checks symmetry (within 1e-12, then mirrored exactly), nonnegativity,
    /// unit total (within 1e-12) and strictly positive row sums.
    pub fn new(e: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let total = e.sum();
        if (total - 1.0).abs() > TOTAL_TOL {
            return Err(Error::BadTotal(total));
        }
        ExchangeMatrix::from_normalized(e, labels)
    }

    fn from_normalized(mut e: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let n = e.nrows();
        if e.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: e.ncols(),
            });
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {}x{} matrix",
                labels.len(),
                n,
                n
            )));
        }
        validate_labels(&labels)?;
        for i in 0..n {
            for j in (i + 1)..n {
                let dev = (e[(i, j)] - e[(j, i)]).abs();
                if dev > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric {
                        i,
                        j,
                        deviation: dev,
                    });
                }
                let v = (e[(i, j)] + e[(j, i)]) / 2.0;
                e[(i, j)] = v;
                e[(j, i)] = v;
            }
        }
        for i in 0..n {
            for j in 0..n {
                if e[(i, j)] < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i + 1,
                        col: j + 1,
                        value: e[(i, j)],
                    });
                }
            }
        }
        let f = DVector::from_iterator(n, (0..n).map(|i| e.row(i).sum()));
        for i in 0..n {
            if f[i] <= 0.0 {
                return Err(Error::ZeroWeight(labels[i].clone()));
            }
        }
        Ok(ExchangeMatrix { e, f, labels })
    }

    /// Ingests a flow matrix in one call: symmetrize, then normalize.
    pub fn from_flow(flow: &FlowMatrix, method: SymmetrizationMethod) -> Result<Self> {
        let s = symmetrize(flow, method)?;
        to_exchange(&s, flow.labels())
    }

    /// Removes the diagonal and renormalizes:
    /// `ê_ij = (e_ij - δ_ij e_ii) / (1 - Σ_k e_kk)`, weights rescaled alike.
    ///
    /// Idempotent: a zero-diagonal matrix is returned unchanged.
    pub fn strip_diagonal(&self) -> Result<ExchangeMatrix> {
        let n = self.n();
        let diag_sum: f64 = (0..n).map(|i| self.e[(i, i)]).sum();
        if diag_sum == 0.0 {
            return Ok(self.clone());
        }
        let denom = 1.0 - diag_sum;
        if denom <= 1e-14 {
            return Err(Error::PureDiagonal);
        }
        let mut e = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    e[(i, j)] = self.e[(i, j)] / denom;
                }
            }
        }
        let f = DVector::from_iterator(n, (0..n).map(|i| (self.f[i] - self.e[(i, i)]) / denom));
        for i in 0..n {
            if f[i] <= 0.0 {
                return Err(Error::SelfFlowOnly(self.labels[i].clone()));
            }
        }
        Ok(ExchangeMatrix {
            e,
            f,
            labels: self.labels.clone(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.e
    }

    /// Vertex weights `f_i` (row sums; stationary distribution of the
    /// associated chain).
    pub fn weights(&self) -> &DVector<f64> {
        &self.f
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    /// Total diagonal mass `Σ_k e_kk`.
    pub fn diagonal_mass(&self) -> f64 {
        (0..self.n()).map(|i| self.e[(i, i)]).sum()
    }

    /// True when every diagonal entry is exactly zero.
    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n()).all(|i| self.e[(i, i)] == 0.0)
    }

    /// Writes the matrix in the flow CSV layout (header of column labels,
    /// one labelled row per vertex). Loading the file back through
    /// [`FlowMatrix::from_csv`] and [`to_exchange`] reproduces the matrix.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "label")?;
        for l in &self.labels {
            write!(w, ",{l}")?;
        }
        writeln!(w)?;
        for i in 0..self.n() {
            write!(w, "{}", self.labels[i])?;
            for j in 0..self.n() {
                write!(w, ",{}", fmt_num(self.e[(i, j)]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
