//! Eigenstructure of the normalized exchange matrix.
//!
//! The symmetric matrix `Π^{-1/2} E Π^{-1/2}` shares its spectrum with the
//! transition matrix `P = Π^{-1}E` of the associated reversible chain:
//! `1 = λ_0 ≥ λ_1 ≥ … ≥ λ_{n-1} ≥ -1`. Its eigenvectors `u_α`, rescaled to
//! raw coordinates `x_iα = u_iα / √f_i`, are the embedding used by spectral
//! clustering and by every distance family in [`crate::distance`].

use std::io::BufRead;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::ExchangeMatrix;
use crate::numfmt::{fmt_num, parse_num};

/// Tolerance above which `λ_1` is treated as 1, i.e. the graph as
/// disconnected / the chain as non-regular.
pub const CONNECTIVITY_TOL: f64 = 1e-12;

/// Default tolerance on row-profile differences for vertex equivalence.
pub const EQUIVALENCE_TOL: f64 = 1e-9;

/// Eigenvalues, orthonormal eigenvectors and raw coordinates of the
/// normalized exchange matrix. Immutable once built.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    lambda: DVector<f64>,
    u: DMatrix<f64>,
    x: DMatrix<f64>,
    f: DVector<f64>,
    labels: Vec<String>,
}

impl SpectralBasis {
    /// Eigenvalues sorted descending; `lambda[0] = 1`.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.lambda
    }

    /// Orthonormal eigenvectors, one per column, ordered like the
    /// eigenvalues. Column 0 is `√f`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Raw coordinates `x_iα = u_iα / √f_i`; column 0 is all ones.
    pub fn raw_coordinates(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.f
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Second-largest eigenvalue, or `-1` for a single vertex.
    pub fn lambda_1(&self) -> f64 {
        if self.n() > 1 {
            self.lambda[1]
        } else {
            -1.0
        }
    }

    /// Smallest eigenvalue.
    pub fn lambda_min(&self) -> f64 {
        self.lambda[self.n() - 1]
    }

    /// True when `λ_1 ≥ 1 - tol`, i.e. the graph splits into components.
    pub fn is_disconnected(&self, tol: f64) -> bool {
        self.lambda_1() > 1.0 - tol
    }

    /// Writes raw coordinates as CSV: label, weight, `x_1..x_k`.
    pub fn coords_to_csv<W: std::io::Write>(&self, k: usize, mut w: W) -> Result<()> {
        if k >= self.n() {
            return Err(Error::BadParameter(format!(
                "requested {k} coordinate dimensions but only {} are available",
                self.n() - 1
            )));
        }
        let io = |e: std::io::Error| Error::BadParameter(format!("write failed: {e}"));
        write!(w, "label,f").map_err(io)?;
        for a in 1..=k {
            write!(w, ",x_{a}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
        for i in 0..self.n() {
            write!(w, "{},{}", self.labels[i], fmt_num(self.f[i])).map_err(io)?;
            for a in 1..=k {
                write!(w, ",{}", fmt_num(self.x[(i, a)])).map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        Ok(())
    }
}

/// Parses a raw-coordinates CSV back into labels, weights and coordinates.
pub fn coords_from_csv<R: BufRead>(reader: R) -> Result<(Vec<String>, DVector<f64>, DMatrix<f64>)> {
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
    let k = lines[0].split(',').count().saturating_sub(2);
    let n = lines.len() - 1;
    let mut labels = Vec::with_capacity(n);
    let mut f = DVector::zeros(n);
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
        f[r] = parse_num(fields[1]).ok_or(Error::CsvParse {
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
    Ok((labels, f, coords))
}

/// Spectral decomposition of `Π^{-1/2} E Π^{-1/2}`.
///
/// Eigenvalues come out sorted descending with a deterministic sign
/// convention (largest-magnitude entry of each eigenvector positive, ties
/// broken by lowest index). The eigenvector of the trivial eigenvalue is
/// pinned to `√f` exactly, so raw coordinate 0 is the all-ones vector even
/// when the unit eigenvalue is degenerate (disconnected graphs).
pub fn decompose(e: &ExchangeMatrix) -> Result<SpectralBasis> {
    let n = e.n();
    let f = e.weights().clone();
    let sqrt_f = f.map(f64::sqrt);

    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = e.matrix()[(i, j)] / (sqrt_f[i] * sqrt_f[j]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }

    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("real spectrum")
    });

    let mut lambda = DVector::zeros(n);
    let mut u = DMatrix::zeros(n, n);
    for (pos, &idx) in order.iter().enumerate() {
        lambda[pos] = eig.eigenvalues[idx];
        u.set_column(pos, &eig.eigenvectors.column(idx));
    }

    if (lambda[0] - 1.0).abs() > 1e-8 {
        return Err(Error::MalformedSpectrum(lambda[0]));
    }

    pin_trivial_eigenvector(&mut u, &lambda, &sqrt_f)?;

    for a in 0..n {
        apply_sign_convention(&mut u, a);
    }

    let mut x = u.clone();
    for i in 0..n {
        for a in 0..n {
            x[(i, a)] /= sqrt_f[i];
        }
    }

    Ok(SpectralBasis {
        lambda,
        u,
        x,
        f,
        labels: e.labels().to_vec(),
    })
}

/// Rotates the near-unit eigenspace so that its first basis vector is `√f`,
/// which is an exact eigenvector of the exact matrix. Without this, a
/// degenerate unit eigenvalue (disconnected graph) would leave the trivial
/// direction mixed into arbitrary solver output.
fn pin_trivial_eigenvector(
    u: &mut DMatrix<f64>,
    lambda: &DVector<f64>,
    sqrt_f: &DVector<f64>,
) -> Result<()> {
    let n = lambda.len();
    let block: Vec<usize> = (0..n).filter(|&a| lambda[a] > 1.0 - 1e-9).collect();
    let w = sqrt_f / sqrt_f.norm();

    if block.len() == 1 {
        u.set_column(block[0], &w);
        return Ok(());
    }

    // Gram-Schmidt the solver's block columns against w, keeping the first
    // block_len - 1 independent residuals.
    let mut basis: Vec<DVector<f64>> = vec![w.clone()];
    for &a in &block {
        if basis.len() == block.len() {
            break;
        }
        let mut v = u.column(a).clone_owned();
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
    }
    if basis.len() != block.len() {
        return Err(Error::Eigen(
            "could not orthonormalize the unit eigenspace".into(),
        ));
    }
    for (slot, vec) in block.iter().zip(basis.iter()) {
        u.set_column(*slot, vec);
    }
    Ok(())
}

/// Flips column `a` so its largest-magnitude entry is positive; ties go to
/// the lowest index. Entries within a relative 1e-12 of the maximum count
/// as tied, so last-ulp solver noise cannot flip the choice.
fn apply_sign_convention(u: &mut DMatrix<f64>, a: usize) {
    let n = u.nrows();
    let mut max_abs = 0.0f64;
    for i in 0..n {
        max_abs = max_abs.max(u[(i, a)].abs());
    }
    let mut best = 0;
    for i in 0..n {
        if u[(i, a)].abs() >= max_abs * (1.0 - 1e-12) {
            best = i;
            break;
        }
    }
    if u[(best, a)] < 0.0 {
        for i in 0..n {
            u[(i, a)] = -u[(i, a)];
        }
    }
}

/// Standardized exchange matrix `e^s_ij = (e_ij - f_i f_j) / √(f_i f_j)`.
///
/// Centering replaces the trivial eigenvalue by zero and leaves the rest of
/// the spectrum unchanged.
pub fn standardized(e: &ExchangeMatrix) -> DMatrix<f64> {
    let n = e.n();
    let f = e.weights();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (e.matrix()[(i, j)] - f[i] * f[j]) / (f[i] * f[j]).sqrt();
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// Number of steps for [`t_step`]: a finite power or the stationary limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepCount {
    Finite(u32),
    Infinite,
}

/// The t-step exchange matrix `E^{(t)} = Π P^t`.
///
/// `E^{(0)} = Π`, `E^{(1)} = E`, `E^{(2)} = E Π^{-1} E`, and the limit is
/// `f f'` provided the chain is regular.
pub fn t_step(e: &ExchangeMatrix, t: StepCount) -> Result<DMatrix<f64>> {
    let n = e.n();
    let f = e.weights();
    match t {
        StepCount::Finite(0) => Ok(DMatrix::from_diagonal(f)),
        StepCount::Finite(1) => Ok(e.matrix().clone()),
        StepCount::Finite(t) => {
            // E^{(t)} = E (Π^{-1} E)^{t-1}
            let mut scaled = e.matrix().clone();
            for i in 0..n {
                for j in 0..n {
                    scaled[(i, j)] /= f[i];
                }
            }
            let mut m = e.matrix().clone();
            for _ in 1..t {
                m *= &scaled;
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = (m[(i, j)] + m[(j, i)]) / 2.0;
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            Ok(m)
        }
        StepCount::Infinite => {
            let basis = decompose(e)?;
            let l1 = basis.lambda_1();
            let lmin = basis.lambda_min();
            if l1 > 1.0 - CONNECTIVITY_TOL || lmin < -1.0 + CONNECTIVITY_TOL {
                return Err(Error::NotRegular {
                    lambda_1: l1,
                    lambda_min: lmin,
                });
            }
            Ok(f * f.transpose())
        }
    }
}

/// All unordered vertex pairs with identical transition profiles:
/// `e_ik/f_i = e_jk/f_j` for every `k`, within `tol` in max norm.
pub fn find_equivalent_pairs(e: &ExchangeMatrix, tol: f64) -> Vec<(usize, usize)> {
    let n = e.n();
    let f = e.weights();
    let m = e.matrix();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut max_dev = 0.0f64;
            for k in 0..n {
                let dev = (m[(i, k)] / f[i] - m[(j, k)] / f[j]).abs();
                max_dev = max_dev.max(dev);
            }
            if max_dev <= tol {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Weak equivalence on a diagonal-free exchange matrix: transition profiles
/// compared only towards third vertices `k ≠ i, j`.
pub fn weakly_equivalent_pairs(e: &ExchangeMatrix, tol: f64) -> Result<Vec<(usize, usize)>> {
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
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut max_dev = 0.0f64;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let dev = (m[(i, k)] / f[i] - m[(j, k)] / f[j]).abs();
                max_dev = max_dev.max(dev);
            }
            if max_dev <= tol {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

/// Spectral relaxation bound for the m-way normalized cut:
/// `1 + Σ_{α=1}^{m-1} λ_α`, together with the relaxed solution
/// `X_0 = (1, x_1, …, x_{m-1})` satisfying `X_0' Π X_0 = I`.
pub fn ncut_relaxation_bound(basis: &SpectralBasis, m: usize) -> Result<(f64, DMatrix<f64>)> {
    let n = basis.n();
    if m < 1 || m > n {
        return Err(Error::BadParameter(format!(
            "group count m={m} out of range 1..={n}"
        )));
    }
    let mut bound = 1.0;
    for a in 1..m {
        bound += basis.eigenvalues()[a];
    }
    let mut x0 = DMatrix::zeros(n, m);
    for i in 0..n {
        x0[(i, 0)] = 1.0;
    }
    for a in 1..m {
        x0.set_column(a, &basis.raw_coordinates().column(a));
    }
    Ok((bound, x0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    fn two_vertex() -> ExchangeMatrix {
        ExchangeMatrix::new(dmatrix![0.3, 0.2; 0.2, 0.3], labels(2)).unwrap()
    }

    fn path3() -> ExchangeMatrix {
        ExchangeMatrix::new(
            dmatrix![0.0, 0.25, 0.0; 0.25, 0.0, 0.25; 0.0, 0.25, 0.0],
            labels(3),
        )
        .unwrap()
    }

    fn complete_from_weights(f: &[f64]) -> ExchangeMatrix {
        let n = f.len();
        let fv = DVector::from_row_slice(f);
        let e = &fv * fv.transpose();
        ExchangeMatrix::new(e, labels(n)).unwrap()
    }

    #[test]
    fn two_vertex_closed_form() {
        let basis = decompose(&two_vertex()).unwrap();
        assert!((basis.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((basis.eigenvalues()[1] - 0.2).abs() < 1e-12);
        let r = 0.5f64.sqrt();
        assert!((basis.eigenvectors()[(0, 0)] - r).abs() < 1e-12);
        assert!((basis.eigenvectors()[(1, 0)] - r).abs() < 1e-12);
        // sign convention: tie broken at the lowest index
        assert!((basis.raw_coordinates()[(0, 1)] - 1.0).abs() < 1e-10);
        assert!((basis.raw_coordinates()[(1, 1)] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn complete_graph_spectrum_collapses() {
        let e = complete_from_weights(&[0.5, 0.3, 0.2]);
        let basis = decompose(&e).unwrap();
        assert!((basis.eigenvalues()[0] - 1.0).abs() < 1e-10);
        for a in 1..3 {
            assert!(basis.eigenvalues()[a].abs() < 1e-10);
        }
    }

    #[test]
    fn trivial_eigenvector_is_sqrt_f() {
        let e = ExchangeMatrix::new(
            dmatrix![0.1, 0.15, 0.05; 0.15, 0.2, 0.1; 0.05, 0.1, 0.1],
            labels(3),
        )
        .unwrap();
        let basis = decompose(&e).unwrap();
        for i in 0..3 {
            assert!((basis.eigenvectors()[(i, 0)] - basis.weights()[i].sqrt()).abs() < 1e-10);
            assert!((basis.raw_coordinates()[(i, 0)] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn orthonormality_and_reconstruction() {
        let e = ExchangeMatrix::new(
            dmatrix![0.1, 0.15, 0.05; 0.15, 0.2, 0.1; 0.05, 0.1, 0.1],
            labels(3),
        )
        .unwrap();
        let basis = decompose(&e).unwrap();
        let u = basis.eigenvectors();
        let gram = u.transpose() * u;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expect).abs() < 1e-10);
            }
        }
        let recon = u * DMatrix::from_diagonal(basis.eigenvalues()) * u.transpose();
        let f = e.weights();
        for i in 0..3 {
            for j in 0..3 {
                let s = e.matrix()[(i, j)] / (f[i] * f[j]).sqrt();
                assert!((recon[(i, j)] - s).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn disconnected_unit_eigenspace_still_pins_sqrt_f() {
        let e = ExchangeMatrix::new(
            dmatrix![
                0.2, 0.2, 0.0, 0.0;
                0.2, 0.1, 0.0, 0.0;
                0.0, 0.0, 0.1, 0.1;
                0.0, 0.0, 0.1, 0.0
            ],
            labels(4),
        )
        .unwrap();
        let basis = decompose(&e).unwrap();
        assert!(basis.is_disconnected(CONNECTIVITY_TOL));
        for i in 0..4 {
            assert!((basis.raw_coordinates()[(i, 0)] - 1.0).abs() < 1e-9);
        }
        let u = basis.eigenvectors();
        let gram = u.transpose() * u;
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn standardized_two_vertex() {
        let s = standardized(&two_vertex());
        assert!((s[(0, 0)] - 0.1).abs() < 1e-14);
        assert!((s[(0, 1)] + 0.1).abs() < 1e-14);
        let eigs = s.symmetric_eigenvalues();
        let mut v: Vec<f64> = eigs.iter().copied().collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((v[0] - 0.2).abs() < 1e-12);
        assert!(v[1].abs() < 1e-12);
    }

    #[test]
    fn standardized_annihilates_sqrt_f() {
        let e = ExchangeMatrix::new(
            dmatrix![0.1, 0.15, 0.05; 0.15, 0.2, 0.1; 0.05, 0.1, 0.1],
            labels(3),
        )
        .unwrap();
        let s = standardized(&e);
        let w = e.weights().map(f64::sqrt);
        let out = s * w;
        for i in 0..3 {
            assert!(out[i].abs() < 1e-14);
        }
    }

    #[test]
    fn standardized_complete_graph_vanishes() {
        let e = complete_from_weights(&[0.5, 0.3, 0.2]);
        let s = standardized(&e);
        for v in s.iter() {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn t_step_values() {
        let e = two_vertex();
        let t0 = t_step(&e, StepCount::Finite(0)).unwrap();
        assert_eq!(t0[(0, 0)], 0.5);
        assert_eq!(t0[(0, 1)], 0.0);

        let t1 = t_step(&e, StepCount::Finite(1)).unwrap();
        assert_eq!(t1, *e.matrix());

        let t2 = t_step(&e, StepCount::Finite(2)).unwrap();
        assert!((t2[(0, 0)] - 0.26).abs() < 1e-14);
        assert!((t2[(0, 1)] - 0.24).abs() < 1e-14);

        let tinf = t_step(&e, StepCount::Infinite).unwrap();
        for v in tinf.iter() {
            assert!((v - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn t_step_limit_rejected_on_disconnected() {
        let e = ExchangeMatrix::new(dmatrix![0.5, 0.0; 0.0, 0.5], labels(2)).unwrap();
        assert!(matches!(
            t_step(&e, StepCount::Infinite),
            Err(Error::NotRegular { .. })
        ));
    }

    #[test]
    fn t_step_limit_rejected_on_bipartite() {
        let e = path3().strip_diagonal().unwrap();
        assert!(matches!(
            t_step(&e, StepCount::Infinite),
            Err(Error::NotRegular { .. })
        ));
    }

    #[test]
    fn complete_graph_all_pairs_equivalent() {
        let e = complete_from_weights(&[0.5, 0.3, 0.2]);
        let pairs = find_equivalent_pairs(&e, EQUIVALENCE_TOL);
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn path_graph_endpoints_equivalent() {
        // Both endpoints jump to the middle vertex with probability one and
        // never to each other, so their transition profiles agree for every
        // k, including themselves.
        let pairs = find_equivalent_pairs(&path3(), EQUIVALENCE_TOL);
        assert_eq!(pairs, vec![(0, 2)]);
    }

    #[test]
    fn looped_path_has_no_equivalent_pair() {
        // a self-loop at one endpoint breaks the profile symmetry
        let e = ExchangeMatrix::new(
            dmatrix![0.1, 0.2, 0.0; 0.2, 0.0, 0.25; 0.0, 0.25, 0.0],
            labels(3),
        )
        .unwrap();
        let pairs = find_equivalent_pairs(&e, EQUIVALENCE_TOL);
        assert!(pairs.is_empty());
    }

    #[test]
    fn path_graph_endpoints_weakly_equivalent() {
        let pairs = weakly_equivalent_pairs(&path3(), EQUIVALENCE_TOL).unwrap();
        assert_eq!(pairs, vec![(0, 2)]);
    }

    #[test]
    fn two_vertex_zero_diagonal_vacuously_weakly_equivalent() {
        let e = ExchangeMatrix::new(dmatrix![0.0, 0.5; 0.5, 0.0], labels(2)).unwrap();
        let pairs = weakly_equivalent_pairs(&e, EQUIVALENCE_TOL).unwrap();
        assert_eq!(pairs, vec![(0, 1)]);
    }

    #[test]
    fn four_cycle_diagonal_pairs_weakly_equivalent() {
        let e = ExchangeMatrix::new(
            dmatrix![
                0.0, 0.125, 0.0, 0.125;
                0.125, 0.0, 0.125, 0.0;
                0.0, 0.125, 0.0, 0.125;
                0.125, 0.0, 0.125, 0.0
            ],
            labels(4),
        )
        .unwrap();
        let pairs = weakly_equivalent_pairs(&e, EQUIVALENCE_TOL).unwrap();
        assert_eq!(pairs, vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn weak_equivalence_requires_zero_diagonal() {
        let err = weakly_equivalent_pairs(&two_vertex(), EQUIVALENCE_TOL).unwrap_err();
        assert!(matches!(err, Error::NonzeroDiagonal { index: 0, .. }));
    }

    #[test]
    fn ncut_bound_values() {
        let basis = decompose(&two_vertex()).unwrap();
        let (b1, x1) = ncut_relaxation_bound(&basis, 1).unwrap();
        assert_eq!(b1, 1.0);
        assert_eq!(x1.ncols(), 1);
        assert!(x1.iter().all(|&v| (v - 1.0).abs() < 1e-12));

        let (b2, x2) = ncut_relaxation_bound(&basis, 2).unwrap();
        assert!((b2 - 1.2).abs() < 1e-12);
        // X0' Π X0 = I
        let pi = DMatrix::from_diagonal(basis.weights());
        let gram = x2.transpose() * pi * &x2;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expect).abs() < 1e-10);
            }
        }
        assert!(ncut_relaxation_bound(&basis, 3).is_err());
        assert!(ncut_relaxation_bound(&basis, 0).is_err());
    }

    #[test]
    fn ncut_bound_two_on_disconnected() {
        let e = ExchangeMatrix::new(
            dmatrix![
                0.2, 0.2, 0.0, 0.0;
                0.2, 0.1, 0.0, 0.0;
                0.0, 0.0, 0.1, 0.1;
                0.0, 0.0, 0.1, 0.0
            ],
            labels(4),
        )
        .unwrap();
        let basis = decompose(&e).unwrap();
        let (bound, _) = ncut_relaxation_bound(&basis, 2).unwrap();
        assert!((bound - 2.0).abs() < 1e-10);
    }

    #[test]
    fn coords_csv_round_trip() {
        let e = ExchangeMatrix::new(
            dmatrix![0.1, 0.15, 0.05; 0.15, 0.2, 0.1; 0.05, 0.1, 0.1],
            labels(3),
        )
        .unwrap();
        let basis = decompose(&e).unwrap();
        let mut buf = Vec::new();
        basis.coords_to_csv(2, &mut buf).unwrap();
        let (lab, f, coords) = coords_from_csv(buf.as_slice()).unwrap();
        assert_eq!(lab, basis.labels());
        for i in 0..3 {
            assert!((f[i] - basis.weights()[i]).abs() < 1e-11);
            for a in 0..2 {
                assert!((coords[(i, a)] - basis.raw_coordinates()[(i, a + 1)]).abs() < 1e-10);
            }
        }
    }
}
