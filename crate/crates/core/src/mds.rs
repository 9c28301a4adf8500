//! Weighted classical multidimensional scaling and the coordinate-free
//! Huygens geometry (centroids and inertias) built on it.
//!
//! A dissimilarity matrix `D` with weights `p` is squared Euclidean exactly
//! when the kernel `K_ij = √(p_i p_j) B_ij`, with
//! `B_ij = -½(D_ij - D_ip - D_jp)`, is positive semidefinite; its
//! eigendecomposition yields coordinates reproducing `D` and the verdict
//! does not depend on the choice of `p`.

use nalgebra::{DMatrix, DVector};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::numfmt::{fmt_num, parse_num};

/// Relative cutoff under which a kernel eigenvalue is not retained as a
/// coordinate dimension.
const RETAIN_REL_TOL: f64 = 1e-10;

/// Low-dimensional coordinates recovered from a distance matrix.
#[derive(Debug, Clone)]
pub struct Embedding {
    coords: DMatrix<f64>,
    mu: DVector<f64>,
    p: DVector<f64>,
    labels: Vec<String>,
    total_inertia: f64,
    dropped_negative_mass: f64,
}

impl Embedding {
    /// Coordinates, one column per retained dimension in decreasing-`μ`
    /// order.
    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    /// Retained kernel eigenvalues, sorted descending, all positive.
    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> usize {
        self.coords.ncols()
    }

    /// Trace of the kernel: the total inertia relative to the weights used.
    pub fn total_inertia(&self) -> f64 {
        self.total_inertia
    }

    /// Sum of the magnitudes of discarded negative kernel eigenvalues;
    /// positive exactly when the input was not squared Euclidean.
    pub fn dropped_negative_mass(&self) -> f64 {
        self.dropped_negative_mass
    }

    /// Squared distance between rows `i` and `j` in the embedding.
    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        let mut sum = 0.0;
        for c in 0..self.coords.ncols() {
            let diff = self.coords[(i, c)] - self.coords[(j, c)];
            sum += diff * diff;
        }
        sum
    }

    /// Writes coordinates as CSV. The header carries the retained `μ`
    /// values.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "label,weight")?;
        for b in 0..self.mu.len() {
            write!(w, ",mu={}", fmt_num(self.mu[b]))?;
        }
        writeln!(w)?;
        for i in 0..self.coords.nrows() {
            write!(w, "{},{}", self.labels[i], fmt_num(self.p[i]))?;
            for c in 0..self.coords.ncols() {
                write!(w, ",{}", fmt_num(self.coords[(i, c)]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Keeps only the first `k` dimensions (or all, when fewer exist).
    pub fn truncated(&self, k: usize) -> Embedding {
        let k = k.min(self.coords.ncols());
        Embedding {
            coords: self.coords.columns(0, k).clone_owned(),
            mu: self.mu.rows(0, k).clone_owned(),
            p: self.p.clone(),
            labels: self.labels.clone(),
            total_inertia: self.total_inertia,
            dropped_negative_mass: self.dropped_negative_mass,
        }
    }
}

/// Parsed embedding CSV: labels, weights, retained eigenvalues and the
/// coordinate matrix.
pub type ParsedEmbedding = (Vec<String>, DVector<f64>, Vec<f64>, DMatrix<f64>);

/// Parses an embedding CSV back into labels, weights, `μ` and coordinates.
pub fn embedding_from_csv<R: std::io::BufRead>(reader: R) -> Result<ParsedEmbedding> {
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::CsvParse {
            row: idx,
            col: 0,
            msg: format!("io error: {e}"),
        })?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    if lines.is_empty() {
        return Err(Error::CsvParse {
            row: 0,
            col: 0,
            msg: "empty input".into(),
        });
    }
    let header: Vec<&str> = lines[0].split(',').collect();
    let k = header.len() - 2;
    let mut mu = Vec::with_capacity(k);
    for field in &header[2..] {
        let value = field
            .strip_prefix("mu=")
            .and_then(parse_num)
            .ok_or(Error::CsvParse {
                row: 0,
                col: 3,
                msg: format!("bad eigenvalue header '{field}'"),
            })?;
        mu.push(value);
    }
    let n = lines.len() - 1;
    let mut labels = Vec::with_capacity(n);
    let mut p = DVector::zeros(n);
    let mut coords = DMatrix::zeros(n, k);
    for (r, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != k + 2 {
            return Err(Error::CsvParse {
                row: r + 1,
                col: fields.len(),
                msg: format!("expected {} fields", k + 2),
            });
        }
        labels.push(fields[0].trim().to_string());
        p[r] = parse_num(fields[1]).ok_or(Error::CsvParse {
            row: r + 1,
            col: 2,
            msg: "bad weight".into(),
        })?;
        for (c, field) in fields[2..].iter().enumerate() {
            coords[(r, c)] = parse_num(field).ok_or(Error::CsvParse {
                row: r + 1,
                col: c + 3,
                msg: "bad coordinate".into(),
            })?;
        }
    }
    Ok((labels, p, mu, coords))
}

fn validate_weights(d: &DistanceMatrix, p: &DVector<f64>) -> Result<()> {
    if p.len() != d.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} vertices",
            p.len(),
            d.n()
        )));
    }
    for i in 0..p.len() {
        if p[i] <= 0.0 || p[i].is_nan() {
            return Err(Error::BadParameter(format!(
                "weight p[{i}] = {} must be positive",
                p[i]
            )));
        }
    }
    let total: f64 = p.sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::BadParameter(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Kernel `K_ij = √(p_i p_j) B_ij` of a distance matrix under weights `p`.
fn kernel(d: &DistanceMatrix, p: &DVector<f64>) -> Result<DMatrix<f64>> {
    if !d.is_finite() {
        return Err(Error::BadParameter(
            "cannot embed infinite distances (disconnected pairs)".into(),
        ));
    }
    let n = d.n();
    let m = d.matrix();
    let dp = m * p; // Σ_j p_j D_ij
    let delta = 0.5 * p.dot(&dp);
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let b = -0.5 * (m[(i, j)] - dp[i] - dp[j] + 2.0 * delta);
            let v = (p[i] * p[j]).sqrt() * b;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Weighted classical MDS.
///
/// Negative kernel eigenvalues are reported through
/// [`Embedding::dropped_negative_mass`] rather than raised as errors:
/// embedding a non-Euclidean matrix is a legitimate diagnostic use.
pub fn mds(d: &DistanceMatrix, p: &DVector<f64>) -> Result<Embedding> {
    validate_weights(d, p)?;
    let n = d.n();
    let k = kernel(d, p)?;
    let total_inertia = k.trace();

    let eig = k.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("real spectrum")
    });

    let mu_max = eig.eigenvalues[order[0]].max(0.0);
    let cut = RETAIN_REL_TOL * mu_max;
    let retained: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&idx| eig.eigenvalues[idx] > cut && eig.eigenvalues[idx] > 0.0)
        .collect();
    let dropped_negative_mass: f64 = eig
        .eigenvalues
        .iter()
        .filter(|&&v| v < 0.0)
        .map(|v| v.abs())
        .sum();

    let mut coords = DMatrix::zeros(n, retained.len());
    let mut mu = DVector::zeros(retained.len());
    for (c, &idx) in retained.iter().enumerate() {
        mu[c] = eig.eigenvalues[idx];
        let scale = mu[c].sqrt();
        let mut col = eig.eigenvectors.column(idx).clone_owned();
        // deterministic sign: largest-magnitude entry positive, near-ties
        // resolved at the lowest index
        let mut max_abs = 0.0f64;
        for i in 0..n {
            max_abs = max_abs.max(col[i].abs());
        }
        let mut best = 0;
        for i in 0..n {
            if col[i].abs() >= max_abs * (1.0 - 1e-12) {
                best = i;
                break;
            }
        }
        if col[best] < 0.0 {
            col = -col;
        }
        for i in 0..n {
            coords[(i, c)] = scale * col[i] / p[i].sqrt();
        }
    }

    Ok(Embedding {
        coords,
        mu,
        p: p.clone(),
        labels: d.labels().to_vec(),
        total_inertia,
        dropped_negative_mass,
    })
}

/// Squared-Euclidean test: true when the smallest kernel eigenvalue is
/// above `-tol * max(1, μ_max)`. Also returns that smallest eigenvalue.
pub fn is_squared_euclidean(d: &DistanceMatrix, p: &DVector<f64>, tol: f64) -> Result<(bool, f64)> {
    validate_weights(d, p)?;
    let k = kernel(d, p)?;
    let eigs = k.symmetric_eigenvalues();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in eigs.iter() {
        min = min.min(v);
        max = max.max(v);
    }
    Ok((min >= -tol * max.max(1.0), min))
}

/// Squared distances to the centroid of a signed distribution `q`
/// (`Σ q_i = 1`, entries may be negative), plus the inertia `Δ_q`, computed
/// without coordinates:
/// `Δ_q = ½ Σ_ij q_i q_j D_ij` and `D_iq = Σ_j q_j D_ij - Δ_q`.
pub fn centroid_and_inertia(d: &DistanceMatrix, q: &DVector<f64>) -> (DVector<f64>, f64) {
    let dq = d.matrix() * q;
    let inertia = 0.5 * q.dot(&dq);
    (dq.map(|v| v - inertia), inertia)
}
