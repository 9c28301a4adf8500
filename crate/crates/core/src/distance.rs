//! Squared Euclidean distances on weighted graphs.
//!
//! Every *natural* distance arises from a nonnegative spectral weight
//! function `g` applied to the standardized exchange matrix:
//! `D_ij = Σ_{α≥1} g(λ_α)(x_iα - x_jα)²`. The stock families are
//!
//! | family          | g(λ)               | focused | irreducible |
//! |-----------------|--------------------|---------|-------------|
//! | chi2            | λ²                 | yes     | no          |
//! | diffusive       | λ                  | yes     | no          |
//! | frozen          | 1                  | no      | no          |
//! | commute         | 1/(1-λ)            | no      | yes         |
//! | absorption(ρ)   | (1-ρ)/(1-ρλ)       | no      | no          |
//! | sif             | λ²/(1-λ)           | yes     | yes         |
//!
//! *Focused* distances (`g(0) = 0`) vanish between equivalent vertices;
//! *irreducible* ones (`g(1) = ∞`) are infinite across disconnected
//! components and therefore reject disconnected input.
//!
//! The module also carries the shortest-path and jump distances (which are
//! not of the `g` form), Schoenberg transformations, and the Markov-chain
//! and electrical oracles used to cross-check the commute and absorption
//! families.

use std::collections::BinaryHeap;
use std::io::BufRead;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::ExchangeMatrix;
use crate::numfmt::{fmt_num, parse_num};
use crate::spectral::{decompose, SpectralBasis, CONNECTIVITY_TOL};

/// Largest negative value clamped to zero when assembling a distance matrix.
const NEGATIVE_CLAMP: f64 = 1e-12;

/// Eigenvalues within this of zero are evaluated at zero exactly, so that
/// focused families (`g(0) = 0`) produce exact zeros instead of solver
/// noise — on a complete weighted graph the chi-square distance must
/// vanish identically.
const EIGENVALUE_SNAP: f64 = 1e-12;

/// Spectral weight function selecting a natural distance family.
#[derive(Clone)]
pub enum GSpec {
    Chi2,
    Diffusive,
    Frozen,
    Commute,
    Absorption {
        rho: f64,
    },
    Sif,
    Custom {
        g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        label: String,
    },
}

impl std::fmt::Debug for GSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl GSpec {
    /// Evaluates `g` at a single eigenvalue.
    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            GSpec::Chi2 => lambda * lambda,
            GSpec::Diffusive => lambda,
            GSpec::Frozen => 1.0,
            GSpec::Commute => 1.0 / (1.0 - lambda),
            GSpec::Absorption { rho } => (1.0 - rho) / (1.0 - rho * lambda),
            GSpec::Sif => lambda * lambda / (1.0 - lambda),
            GSpec::Custom { g, .. } => g(lambda),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GSpec::Chi2 => "chi2".into(),
            GSpec::Diffusive => "diffusive".into(),
            GSpec::Frozen => "frozen".into(),
            GSpec::Commute => "commute".into(),
            GSpec::Absorption { rho } => format!("absorption({})", fmt_num(*rho)),
            GSpec::Sif => "sif".into(),
            GSpec::Custom { label, .. } => format!("custom({label})"),
        }
    }

    /// True when `g(0) = 0`, i.e. the distance vanishes between equivalent
    /// vertices.
    pub fn is_focused(&self) -> bool {
        self.eval(0.0) == 0.0
    }

    /// True when `g(1) = ∞`, i.e. the distance is infinite across
    /// disconnected components.
    pub fn is_irreducible(&self) -> bool {
        !self.eval(1.0).is_finite()
    }
}

/// Entrywise Schoenberg transformation, preserving squared-Euclidean
/// embeddability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiSpec {
    /// `φ(d) = d^a` with `0 < a ≤ 1`.
    Power { a: f64 },
    /// `φ(d) = 1 - exp(-b d)` with `b > 0`.
    SaturatingExp { b: f64 },
}

impl PhiSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            PhiSpec::Power { a } => {
                if !(a > 0.0 && a <= 1.0) {
                    return Err(Error::BadParameter(format!(
                        "power exponent a={a} outside (0, 1]"
                    )));
                }
            }
            PhiSpec::SaturatingExp { b } => {
                if b <= 0.0 || b.is_nan() {
                    return Err(Error::BadParameter(format!(
                        "saturating-exp rate b={b} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, d: f64) -> f64 {
        match *self {
            PhiSpec::Power { a } => d.powf(a),
            PhiSpec::SaturatingExp { b } => -(-b * d).exp_m1(),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            PhiSpec::Power { a } => format!("power({})", fmt_num(a)),
            PhiSpec::SaturatingExp { b } => format!("saturating_exp({})", fmt_num(b)),
        }
    }
}

/// Provenance flags carried by a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceFlags {
    pub family: String,
    pub focused: bool,
    pub irreducible: bool,
    /// Set only after an explicit embeddability check.
    pub euclidean_verified: Option<bool>,
}

/// Pairwise squared-distance matrix with vertex weights and provenance.
///
/// Always symmetric with a zero diagonal; disconnected pairs carry
/// `f64::INFINITY` (serialized as `inf`).
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    d: DMatrix<f64>,
    p: DVector<f64>,
    labels: Vec<String>,
    flags: DistanceFlags,
}

impl DistanceMatrix {
    /// Assembles a distance matrix, mirroring the upper triangle and
    /// clamping round-off negatives (≥ -1e-12) to zero. Larger negativity
    /// is an error, as is any NaN.
    pub fn new(
        mut d: DMatrix<f64>,
        p: DVector<f64>,
        labels: Vec<String>,
        flags: DistanceFlags,
    ) -> Result<Self> {
        let n = d.nrows();
        if d.ncols() != n || p.len() != n || labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "distance matrix {}x{}, {} weights, {} labels",
                n,
                d.ncols(),
                p.len(),
                labels.len()
            )));
        }
        for i in 0..n {
            if p[i] <= 0.0 || p[i].is_nan() {
                return Err(Error::ZeroWeight(labels[i].clone()));
            }
            d[(i, i)] = 0.0;
            for j in (i + 1)..n {
                let a = d[(i, j)];
                let b = d[(j, i)];
                if a.is_nan() || b.is_nan() {
                    return Err(Error::NonFinite {
                        i,
                        j,
                        value: f64::NAN,
                        context: "squared distance".into(),
                    });
                }
                let dev = (a - b).abs();
                if dev.is_finite() && dev > 1e-9 * a.abs().max(1.0) {
                    return Err(Error::NotSymmetric {
                        i,
                        j,
                        deviation: dev,
                    });
                }
                let mut v = if a.is_infinite() { a } else { (a + b) / 2.0 };
                if v < 0.0 {
                    if v >= -NEGATIVE_CLAMP {
                        v = 0.0;
                    } else {
                        return Err(Error::NegativeDistance { i, j, value: v });
                    }
                }
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        Ok(DistanceMatrix {
            d,
            p,
            labels,
            flags,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn flags(&self) -> &DistanceFlags {
        &self.flags
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.d.iter().all(|v| v.is_finite())
    }

    /// Records the outcome of an embeddability check.
    pub fn set_euclidean_verified(&mut self, verdict: bool) {
        self.flags.euclidean_verified = Some(verdict);
    }

    /// Total inertia `Δ = ½ Σ_ij p_i p_j D_ij` relative to the carried
    /// weights.
    pub fn inertia(&self) -> f64 {
        let n = self.n();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += self.p[i] * self.p[j] * self.d[(i, j)];
            }
        }
        total / 2.0
    }

    /// Writes the matrix as CSV: a `#` metadata line with the provenance
    /// flags, a header, then one labelled, weighted row per vertex.
    /// Disconnected pairs are written as `inf`.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let euclid = match self.flags.euclidean_verified {
            None => "unset",
            Some(true) => "true",
            Some(false) => "false",
        };
        writeln!(
            w,
            "# family={} focused={} irreducible={} euclidean={}",
            self.flags.family, self.flags.focused, self.flags.irreducible, euclid
        )?;
        write!(w, "label,weight")?;
        for l in &self.labels {
            write!(w, ",{l}")?;
        }
        writeln!(w)?;
        for i in 0..self.n() {
            write!(w, "{},{}", self.labels[i], fmt_num(self.p[i]))?;
            for j in 0..self.n() {
                write!(w, ",{}", fmt_num(self.d[(i, j)]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Parses a matrix written by [`DistanceMatrix::to_csv`].
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
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
        if lines.len() < 2 || !lines[0].starts_with('#') {
            return Err(Error::CsvParse {
                row: 0,
                col: 0,
                msg: "expected a '# family=...' metadata line".into(),
            });
        }
        let mut flags = DistanceFlags {
            family: "unknown".into(),
            focused: false,
            irreducible: false,
            euclidean_verified: None,
        };
        for token in lines[0].trim_start_matches('#').split_whitespace() {
            if let Some((key, value)) = token.split_once('=') {
                match key {
                    "family" => flags.family = value.to_string(),
                    "focused" => flags.focused = value == "true",
                    "irreducible" => flags.irreducible = value == "true",
                    "euclidean" => {
                        flags.euclidean_verified = match value {
                            "true" => Some(true),
                            "false" => Some(false),
                            _ => None,
                        }
                    }
                    _ => {}
                }
            }
        }
        let n = lines[1].split(',').count().saturating_sub(2);
        if lines.len() - 2 != n {
            return Err(Error::NotSquare {
                rows: lines.len() - 2,
                cols: n,
            });
        }
        let mut labels = Vec::with_capacity(n);
        let mut p = DVector::zeros(n);
        let mut d = DMatrix::zeros(n, n);
        for (r, line) in lines[2..].iter().enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != n + 2 {
                return Err(Error::CsvParse {
                    row: r + 1,
                    col: fields.len(),
                    msg: format!("expected {} fields", n + 2),
                });
            }
            labels.push(fields[0].trim().to_string());
            p[r] = parse_num(fields[1]).ok_or(Error::CsvParse {
                row: r + 1,
                col: 2,
                msg: "bad weight".into(),
            })?;
            for (c, field) in fields[2..].iter().enumerate() {
                d[(r, c)] = parse_num(field).ok_or(Error::CsvParse {
                    row: r + 1,
                    col: c + 3,
                    msg: format!("bad distance '{}'", field.trim()),
                })?;
            }
        }
        DistanceMatrix::new(d, p, labels, flags)
    }
}

/// Options for [`natural_distance_with`].
#[derive(Debug, Clone, Copy)]
pub struct DistanceOptions {
    /// `λ_1 > 1 - connectivity_tol` counts as disconnected for irreducible
    /// families. Real flow data can legitimately sit very close to 1, so
    /// this is tunable.
    pub connectivity_tol: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            connectivity_tol: CONNECTIVITY_TOL,
        }
    }
}

/// Natural distance `D_ij = Σ_{α≥1} g(λ_α)(x_iα - x_jα)²` with default
/// options.
pub fn natural_distance(basis: &SpectralBasis, spec: &GSpec) -> Result<DistanceMatrix> {
    natural_distance_with(basis, spec, DistanceOptions::default())
}

/// Natural distance with an explicit near-disconnection guard.
///
/// Eigenvalues are clamped to `[-1, 1]` before evaluating `g`, so round-off
/// just above 1 cannot blow up a finite family.
pub fn natural_distance_with(
    basis: &SpectralBasis,
    spec: &GSpec,
    opts: DistanceOptions,
) -> Result<DistanceMatrix> {
    let n = basis.n();
    let lambda_1 = basis.lambda_1().clamp(-1.0, 1.0);

    match spec {
        GSpec::Commute | GSpec::Sif => {
            if lambda_1 > 1.0 - opts.connectivity_tol {
                return Err(Error::DisconnectedIrreducible(lambda_1));
            }
        }
        GSpec::Absorption { rho } => {
            if !(*rho > 0.0 && *rho < 1.0) {
                return Err(Error::BadParameter(format!(
                    "absorption rate rho={rho} outside (0, 1)"
                )));
            }
            // g stays finite for rho < 1; only the degenerate rho -> 1
            // limit inherits the connectivity requirement.
            if 1.0 - rho < opts.connectivity_tol && lambda_1 > 1.0 - opts.connectivity_tol {
                return Err(Error::DisconnectedIrreducible(lambda_1));
            }
        }
        GSpec::Diffusive => {
            let lmin = basis.lambda_min();
            if lmin < -1e-12 {
                return Err(Error::NotDiffusive(lmin));
            }
        }
        _ => {}
    }

    let mut weights = Vec::with_capacity(n.saturating_sub(1));
    for a in 1..n {
        let mut lambda = basis.eigenvalues()[a].clamp(-1.0, 1.0);
        if lambda.abs() <= EIGENVALUE_SNAP {
            lambda = 0.0;
        }
        let g = spec.eval(lambda);
        if g.is_nan() || g < 0.0 {
            return Err(Error::NegativeSpectralWeight { lambda, value: g });
        }
        weights.push(g);
    }

    let x = basis.raw_coordinates();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sum = 0.0;
            for (a, &g) in weights.iter().enumerate() {
                let diff = x[(i, a + 1)] - x[(j, a + 1)];
                sum += g * diff * diff;
            }
            d[(i, j)] = sum;
            d[(j, i)] = sum;
        }
    }

    DistanceMatrix::new(
        d,
        basis.weights().clone(),
        basis.labels().to_vec(),
        DistanceFlags {
            family: spec.label(),
            focused: spec.is_focused(),
            irreducible: spec.is_irreducible(),
            euclidean_verified: None,
        },
    )
}

/// Fundamental matrix `Y = (E^{(0)} - E + E^{(∞)})^{-1} Π` of the
/// reversible chain, together with the expected hitting times
/// `m_ij = (y_jj - y_ij)/f_j` (zero diagonal).
pub fn fundamental_matrix(e: &ExchangeMatrix) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = e.n();
    let basis = decompose(e)?;
    let l1 = basis.lambda_1();
    let lmin = basis.lambda_min();
    if l1 > 1.0 - CONNECTIVITY_TOL || lmin < -1.0 + CONNECTIVITY_TOL {
        return Err(Error::NotRegular {
            lambda_1: l1,
            lambda_min: lmin,
        });
    }
    let f = e.weights();
    let mut a = -e.matrix().clone();
    for i in 0..n {
        a[(i, i)] += f[i];
        for j in 0..n {
            a[(i, j)] += f[i] * f[j];
        }
    }
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("fundamental matrix".into()))?;
    let mut y = inv;
    for j in 0..n {
        for i in 0..n {
            y[(i, j)] *= f[j];
        }
    }
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i != j {
                m[(i, j)] = (y[(j, j)] - y[(i, j)]) / f[j];
            }
        }
    }
    Ok((y, m))
}

/// Expected visit counts `V(ρ) = (Π - ρE)^{-1} Π` of the chain killed with
/// rate `1-ρ` per step.
pub fn absorption_visits(e: &ExchangeMatrix, rho: f64) -> Result<DMatrix<f64>> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::BadParameter(format!(
            "absorption rate rho={rho} outside (0, 1)"
        )));
    }
    let n = e.n();
    let f = e.weights();
    let mut a = e.matrix() * (-rho);
    for i in 0..n {
        a[(i, i)] += f[i];
    }
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("absorption visits".into()))?;
    let mut v = inv;
    for j in 0..n {
        for i in 0..n {
            v[(i, j)] *= f[j];
        }
    }
    Ok(v)
}

/// The absorption distance expressed through visit counts:
/// `(1-ρ)(v_ii/f_i + v_jj/f_j - 2 v_ij/f_j)`. Used as the Markov oracle for
/// `GSpec::Absorption`.
pub fn absorption_distance_from_visits(
    v: &DMatrix<f64>,
    f: &DVector<f64>,
    rho: f64,
    i: usize,
    j: usize,
) -> f64 {
    (1.0 - rho) * (v[(i, i)] / f[i] + v[(j, j)] / f[j] - 2.0 * v[(i, j)] / f[j])
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on distance via reversed comparison
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn adjacency(e: &ExchangeMatrix) -> Vec<Vec<(usize, f64)>> {
    let n = e.n();
    let m = e.matrix();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] > 0.0 {
                adj[i].push((j, m[(i, j)]));
            }
        }
    }
    adj
}

/// All-pairs shortest-path distance, where each off-diagonal edge carries a
/// resistance `1/e_ij`. Self-loops never shorten a path. Pairs in different
/// components come out as `inf`.
pub fn shortest_path_distance(e: &ExchangeMatrix) -> Result<DistanceMatrix> {
    let n = e.n();
    let adj = adjacency(e);
    let mut d = DMatrix::from_element(n, n, f64::INFINITY);
    for source in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapEntry {
            dist: 0.0,
            node: source,
        });
        while let Some(HeapEntry { dist: du, node: u }) = heap.pop() {
            if du > dist[u] {
                continue;
            }
            for &(v, weight) in &adj[u] {
                let cand = du + 1.0 / weight;
                if cand < dist[v] {
                    dist[v] = cand;
                    heap.push(HeapEntry {
                        dist: cand,
                        node: v,
                    });
                }
            }
        }
        for j in 0..n {
            d[(source, j)] = dist[j];
        }
    }
    DistanceMatrix::new(
        d,
        e.weights().clone(),
        e.labels().to_vec(),
        DistanceFlags {
            family: "shortest_path".into(),
            focused: false,
            irreducible: true,
            euclidean_verified: None,
        },
    )
}

/// Jump distance on a diagonal-free exchange matrix:
/// `D_ij = Σ_{k≠i,j} f_k (e_ik/(f_i f_k) - e_jk/(f_j f_k))²`.
///
/// Squared Euclidean and weakly focused: it vanishes exactly on weakly
/// equivalent pairs.
pub fn jump_distance(e: &ExchangeMatrix) -> Result<DistanceMatrix> {
    let n = e.n();
    let m = e.matrix();
    for i in 0..n {
        if m[(i, i)] != 0.0 {
            return Err(Error::NonzeroDiagonal {
                index: i,
                value: m[(i, i)],
            });
        }
    }
    let f = e.weights();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sum = 0.0;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let diff = m[(i, k)] / (f[i] * f[k]) - m[(j, k)] / (f[j] * f[k]);
                sum += f[k] * diff * diff;
            }
            d[(i, j)] = sum;
            d[(j, i)] = sum;
        }
    }
    DistanceMatrix::new(
        d,
        f.clone(),
        e.labels().to_vec(),
        DistanceFlags {
            family: "jump".into(),
            focused: false,
            irreducible: false,
            euclidean_verified: None,
        },
    )
}

/// Entrywise Schoenberg transformation `D̃_ij = φ(D_ij)`.
///
/// Zero diagonal is preserved (`φ(0) = 0`); a squared Euclidean input stays
/// squared Euclidean.
pub fn schoenberg_transform(d: &DistanceMatrix, phi: PhiSpec) -> Result<DistanceMatrix> {
    phi.validate()?;
    let n = d.n();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = phi.eval(d.matrix()[(i, j)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    let irreducible = match phi {
        PhiSpec::Power { .. } => d.flags().irreducible,
        // 1 - exp(-b*inf) saturates at 1, so infinities disappear
        PhiSpec::SaturatingExp { .. } => false,
    };
    DistanceMatrix::new(
        out,
        d.weights().clone(),
        d.labels().to_vec(),
        DistanceFlags {
            family: format!("{} of {}", phi.label(), d.flags().family),
            focused: d.flags().focused,
            irreducible,
            euclidean_verified: None,
        },
    )
}

/// Dirichlet form `ℰ(y) = ½ Σ_ij e_ij (y_i - y_j)²`.
///
/// Nonnegative; zero exactly when `y` is constant on every connected
/// component.
pub fn dirichlet_energy(e: &ExchangeMatrix, y: &DVector<f64>) -> f64 {
    let n = e.n();
    assert_eq!(y.len(), n, "voltage vector length");
    let m = e.matrix();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = y[i] - y[j];
            sum += m[(i, j)] * diff * diff;
        }
    }
    sum
}

fn component_of(adj: &[Vec<(usize, f64)>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for &(v, _) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Commute distance through the electrical analogy: solves the harmonic
/// problem with unit potential at `i`, ground at `j`, and returns
/// `1/ℰ(y⁰)` (the effective resistance between the two vertices).
///
/// Returns `inf` when `i` and `j` are in different components.
pub fn electrical_commute(e: &ExchangeMatrix, i: usize, j: usize) -> Result<f64> {
    let n = e.n();
    if i >= n || j >= n || i == j {
        return Err(Error::BadParameter(format!(
            "vertex pair ({i},{j}) invalid for n={n}"
        )));
    }
    let adj = adjacency(e);
    let reachable = component_of(&adj, i);
    if !reachable[j] {
        return Ok(f64::INFINITY);
    }

    // Interior vertices of the component containing i and j.
    let interior: Vec<usize> = (0..n)
        .filter(|&k| reachable[k] && k != i && k != j)
        .collect();
    let mut y = DVector::zeros(n);
    y[i] = 1.0;

    if !interior.is_empty() {
        let m = e.matrix();
        let f = e.weights();
        let k = interior.len();
        let mut a = DMatrix::zeros(k, k);
        let mut rhs = DVector::zeros(k);
        for (r, &u) in interior.iter().enumerate() {
            for (c, &v) in interior.iter().enumerate() {
                a[(r, c)] = if r == c { f[u] - m[(u, u)] } else { -m[(u, v)] };
            }
            rhs[r] = m[(u, i)];
        }
        let sol = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem("harmonic interior solve".into()))?;
        for (r, &u) in interior.iter().enumerate() {
            y[u] = sol[r];
        }
    }

    let energy = dirichlet_energy(e, &y);
    if energy <= 0.0 {
        return Err(Error::SingularSystem(
            "zero Dirichlet energy for distinct connected vertices".into(),
        ));
    }
    Ok(1.0 / energy)
}
