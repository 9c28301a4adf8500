//! Temperature-annealed soft clustering.
//!
//! A soft partition of the `n` vertices into `m` groups is a row-stochastic
//! membership matrix `Z`. Clustering minimizes the free energy
//! `F[Z] = Δ_W[Z] + T·I[Z]` — within-group inertia plus temperature times
//! the object-group mutual information — through the fixed-point update
//!
//! ```text
//! z'_ig = ρ_g exp(-D_ig/T) / Σ_h ρ_h exp(-D_ih/T)
//! ```
//!
//! where `D_ig` is the squared distance from vertex `i` to the centroid of
//! group `g`, obtained coordinate-free from the distance matrix. Groups
//! whose membership columns become proportional are equivalent and are
//! merged without changing the free energy; the annealing schedule sweeps
//! the relative temperature upward from a hard start (`Z = I`) until a
//! single effective group remains.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::flow::ExchangeMatrix;
use crate::mds::centroid_and_inertia;
use crate::numfmt::{fmt_num, parse_num};

/// Row-sum tolerance enforced on membership matrices.
const ROW_SUM_TOL: f64 = 1e-12;

/// Groups with volume below this are considered empty and dropped at merge
/// time; the fixed-point update keeps them at zero forever anyway.
const EMPTY_GROUP_TOL: f64 = 1e-14;

/// Default relative-overlap tolerance for merging equivalent groups.
pub const MERGE_TOL: f64 = 1e-10;

/// Default fixed-point iteration cap.
pub const EM_MAX_ITER: usize = 10_000;

/// Default convergence tolerance on the largest membership change.
pub const EM_TOL: f64 = 1e-9;

/// Row-stochastic soft assignment of `n` vertices to `m` groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    z: DMatrix<f64>,
}

impl Membership {
    /// Validates nonnegativity and unit row sums (within 1e-12).
    pub fn new(z: DMatrix<f64>) -> Result<Self> {
        let (n, m) = z.shape();
        if n == 0 || m == 0 {
            return Err(Error::DimensionMismatch("empty membership".into()));
        }
        for i in 0..n {
            let mut sum = 0.0;
            for g in 0..m {
                let v = z[(i, g)];
                if v < 0.0 || v.is_nan() {
                    return Err(Error::BadParameter(format!(
                        "membership z[{i},{g}] = {v} negative or NaN"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::BadParameter(format!(
                    "membership row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Membership { z })
    }

    /// Hard singleton memberships: the n-group identity.
    pub fn identity(n: usize) -> Self {
        Membership {
            z: DMatrix::identity(n, n),
        }
    }

    /// Everybody in one group.
    pub fn single_group(n: usize) -> Self {
        Membership {
            z: DMatrix::from_element(n, 1, 1.0),
        }
    }

    /// Hard membership from per-vertex group indices in `0..m`.
    pub fn hard(assignments: &[usize], m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadParameter("zero groups".into()));
        }
        let mut z = DMatrix::zeros(assignments.len(), m);
        for (i, &g) in assignments.iter().enumerate() {
            if g >= m {
                return Err(Error::BadParameter(format!(
                    "assignment {g} out of range for {m} groups"
                )));
            }
            z[(i, g)] = 1.0;
        }
        Membership::new(z)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    /// Number of membership columns (groups, merged or not).
    pub fn groups(&self) -> usize {
        self.z.ncols()
    }

    /// Largest absolute entry difference with another membership of the
    /// same shape.
    pub fn max_abs_diff(&self, other: &Membership) -> f64 {
        let mut max = 0.0f64;
        for (a, b) in self.z.iter().zip(other.z.iter()) {
            max = max.max((a - b).abs());
        }
        max
    }
}

/// Group volumes, overlaps, associations and per-group vertex
/// distributions.
#[derive(Debug, Clone)]
pub struct GroupStats {
    /// Volumes `ρ_g = Σ_i f_i z_ig`; they sum to one.
    pub rho: DVector<f64>,
    /// Overlap `Θ = Z' Π Z`; `θ_gg ≤ ρ_g` with equality iff group g is hard.
    pub overlap: DMatrix<f64>,
    /// Association `A = Z' E Z`; all entries sum to one.
    pub association: DMatrix<f64>,
    /// Vertex distribution `π^g_i = f_i z_ig / ρ_g` per group; `None` for
    /// empty groups.
    pub pi: Vec<Option<DVector<f64>>>,
}

/// Volumes, overlaps, associations and group distributions of a membership
/// over a weighted graph.
pub fn group_stats(z: &Membership, e: &ExchangeMatrix) -> GroupStats {
    let f = e.weights();
    let zm = z.matrix();
    let n = z.n();
    let m = z.groups();
    assert_eq!(n, e.n(), "membership rows must match graph order");

    let mut rho = DVector::zeros(m);
    for g in 0..m {
        rho[g] = (0..n).map(|i| f[i] * zm[(i, g)]).sum();
    }

    let mut overlap = DMatrix::zeros(m, m);
    for g in 0..m {
        for h in g..m {
            let v: f64 = (0..n).map(|i| f[i] * zm[(i, g)] * zm[(i, h)]).sum();
            overlap[(g, h)] = v;
            overlap[(h, g)] = v;
        }
    }

    let association = zm.transpose() * e.matrix() * zm;

    let pi = (0..m)
        .map(|g| {
            if rho[g] > 0.0 {
                Some(DVector::from_iterator(
                    n,
                    (0..n).map(|i| f[i] * zm[(i, g)] / rho[g]),
                ))
            } else {
                None
            }
        })
        .collect();

    GroupStats {
        rho,
        overlap,
        association,
        pi,
    }
}

/// Entropies and mutual information of the object-group joint
/// distribution `f_i z_ig`, in nats.
#[derive(Debug, Clone, Copy)]
pub struct InfoStats {
    /// `I(O,Z) = H(O) + H(Z) - H(O,Z)`.
    pub mutual: f64,
    /// Vertex entropy `H(O) = -Σ_i f_i ln f_i`.
    pub h_objects: f64,
    /// Group entropy `H(Z) = -Σ_g ρ_g ln ρ_g`.
    pub h_groups: f64,
    /// Overall softness `H(Z|O) = H(Z) - I`; zero exactly for hard
    /// memberships.
    pub softness: f64,
}

fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Object-group mutual information and the entropies around it.
pub fn mutual_information(z: &Membership, f: &DVector<f64>) -> InfoStats {
    let n = z.n();
    let m = z.groups();
    assert_eq!(n, f.len(), "weights must match membership rows");
    let zm = z.matrix();

    let h_objects = -(0..n).map(|i| xlnx(f[i])).sum::<f64>();
    let mut h_groups = 0.0;
    for g in 0..m {
        let rho: f64 = (0..n).map(|i| f[i] * zm[(i, g)]).sum();
        h_groups -= xlnx(rho);
    }
    let mut h_joint = 0.0;
    for i in 0..n {
        for g in 0..m {
            h_joint -= xlnx(f[i] * zm[(i, g)]);
        }
    }
    let mutual = (h_objects + h_groups - h_joint).max(0.0);
    InfoStats {
        mutual,
        h_objects,
        h_groups,
        softness: (h_groups - mutual).max(0.0),
    }
}

/// Free energy of a membership at temperature `T`, with the inertia
/// decomposition it is built from.
#[derive(Debug, Clone, Copy)]
pub struct FreeEnergy {
    /// `F = Δ_W + T·I`.
    pub free_energy: f64,
    /// Within-group inertia `Δ_W = Σ_g ρ_g Δ_g`.
    pub within_inertia: f64,
    /// Between-group inertia `Δ_B = Σ_g ρ_g D_g0`.
    pub between_inertia: f64,
    /// Object-group mutual information.
    pub mutual: f64,
}

/// Per-group centroid data: squared distances from every vertex to the
/// group centroid, plus the group's own inertia. `None` for empty groups.
type GroupCentroids = Vec<Option<(DVector<f64>, f64)>>;

/// Squared distances from every vertex to each nonempty group centroid,
/// plus volumes.
fn group_centroid_distances(z: &Membership, d: &DistanceMatrix) -> (DVector<f64>, GroupCentroids) {
    let f = d.weights();
    let zm = z.matrix();
    let n = z.n();
    let m = z.groups();
    let mut rho = DVector::zeros(m);
    for g in 0..m {
        rho[g] = (0..n).map(|i| f[i] * zm[(i, g)]).sum();
    }
    let per_group = (0..m)
        .map(|g| {
            if rho[g] > 0.0 {
                let pi = DVector::from_iterator(n, (0..n).map(|i| f[i] * zm[(i, g)] / rho[g]));
                Some(centroid_and_inertia(d, &pi))
            } else {
                None
            }
        })
        .collect();
    (rho, per_group)
}

/// Free energy `F = Δ_W + T·I` of a membership.
///
/// The weights carried by `d` must be the graph weights. Both inertia parts
/// are computed independently through the centroid identities, so
/// `Δ_W + Δ_B` reproduces the total inertia.
pub fn free_energy(z: &Membership, d: &DistanceMatrix, t: f64) -> FreeEnergy {
    let f = d.weights();
    assert_eq!(z.n(), d.n(), "membership rows must match distance order");
    let (_, delta) = centroid_and_inertia(d, f);
    let (rho, per_group) = group_centroid_distances(z, d);

    let mut within = 0.0;
    let mut between = 0.0;
    for g in 0..z.groups() {
        if let Some((dist_g, delta_g)) = &per_group[g] {
            within += rho[g] * delta_g;
            let d_g0: f64 = (0..z.n()).map(|j| f[j] * dist_g[j]).sum::<f64>() - delta;
            between += rho[g] * d_g0;
        }
    }
    let info = mutual_information(z, f);
    FreeEnergy {
        free_energy: within + t * info.mutual,
        within_inertia: within,
        between_inertia: between,
        mutual: info.mutual,
    }
}

/// One fixed-point update at temperature `T > 0`.
///
/// Exponentials are computed with the per-row maximum of `-D_ig/T`
/// subtracted, so relative temperatures down to 1e-4 neither overflow nor
/// underflow. Empty groups receive zero membership and stay empty.
pub fn em_step(z: &Membership, d: &DistanceMatrix, t: f64) -> Membership {
    assert!(t > 0.0, "temperature must be positive");
    assert_eq!(z.n(), d.n(), "membership rows must match distance order");
    let n = z.n();
    let m = z.groups();
    let (rho, per_group) = group_centroid_distances(z, d);

    let mut next = DMatrix::zeros(n, m);
    let mut exponents = vec![f64::NEG_INFINITY; m];
    for i in 0..n {
        let mut max_exp = f64::NEG_INFINITY;
        for g in 0..m {
            if let Some((dist_g, _)) = &per_group[g] {
                let a = -dist_g[i] / t;
                exponents[g] = a;
                max_exp = max_exp.max(a);
            } else {
                exponents[g] = f64::NEG_INFINITY;
            }
        }
        let mut sum = 0.0;
        for g in 0..m {
            if exponents[g].is_finite() {
                let w = rho[g] * (exponents[g] - max_exp).exp();
                next[(i, g)] = w;
                sum += w;
            }
        }
        for g in 0..m {
            next[(i, g)] /= sum;
        }
    }
    Membership { z: next }
}

/// Repeats [`em_step`] until the largest membership change drops below
/// `tol` or `max_iter` is reached. Non-convergence is reported through the
/// returned flag, never as an error.
pub fn iterate_to_convergence(
    z: &Membership,
    d: &DistanceMatrix,
    t: f64,
    max_iter: usize,
    tol: f64,
) -> (Membership, usize, bool) {
    assert!(max_iter >= 1, "max_iter must be at least 1");
    assert!(tol > 0.0, "tolerance must be positive");
    let mut current = z.clone();
    for iter in 1..=max_iter {
        let next = em_step(&current, d, t);
        let delta = next.max_abs_diff(&current);
        current = next;
        if delta < tol {
            return (current, iter, true);
        }
    }
    (current, max_iter, false)
}

/// Merges groups whose relative overlap `θ_gh / √(θ_gg θ_hh)` reaches
/// `1 - tol`, by adding their membership columns (transitive closure
/// applied). Empty groups are dropped. Free energy and inertias are
/// invariant under the merge.
pub fn merge_equivalent_groups(z: &Membership, e: &ExchangeMatrix, tol: f64) -> Membership {
    let f = e.weights();
    let zm = z.matrix();
    let n = z.n();
    assert_eq!(n, e.n(), "membership rows must match graph order");

    let kept: Vec<usize> = (0..z.groups())
        .filter(|&g| {
            let rho: f64 = (0..n).map(|i| f[i] * zm[(i, g)]).sum();
            rho >= EMPTY_GROUP_TOL
        })
        .collect();
    let m = kept.len();

    let mut theta = DMatrix::zeros(m, m);
    for (a, &g) in kept.iter().enumerate() {
        for (b, &h) in kept.iter().enumerate().skip(a) {
            let v: f64 = (0..n).map(|i| f[i] * zm[(i, g)] * zm[(i, h)]).sum();
            theta[(a, b)] = v;
            theta[(b, a)] = v;
        }
    }

    // union-find over kept columns
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..m {
        for b in (a + 1)..m {
            let rel = theta[(a, b)] / (theta[(a, a)] * theta[(b, b)]).sqrt();
            if rel >= 1.0 - tol {
                let ra = find(&mut parent, a);
                let rb = find(&mut parent, b);
                if ra != rb {
                    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                    parent[hi] = lo;
                }
            }
        }
    }

    // classes ordered by smallest member column
    let mut class_of_root = std::collections::BTreeMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (a, &col) in kept.iter().enumerate() {
        let root = find(&mut parent, a);
        let idx = *class_of_root.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[idx].push(col);
    }

    let mut merged = DMatrix::zeros(n, classes.len());
    for (c, members) in classes.iter().enumerate() {
        for &g in members {
            for i in 0..n {
                merged[(i, c)] += zm[(i, g)];
            }
        }
    }
    Membership { z: merged }
}

/// One accepted annealing step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub t_rel: f64,
    /// Effective group count after merging.
    pub effective_groups: usize,
    pub within_inertia: f64,
    pub mutual: f64,
    pub free_energy: f64,
    /// Overall softness `H(Z|O)`.
    pub softness: f64,
    /// Variation of information against the reference partition, when one
    /// was supplied.
    pub vi: Option<f64>,
    /// Whether the fixed-point iteration converged at this temperature.
    pub converged: bool,
}

/// Per-temperature diagnostics of an annealing run.
#[derive(Debug, Clone, Default)]
pub struct AnnealingTrace {
    pub records: Vec<TraceRecord>,
}

impl AnnealingTrace {
    /// Writes the trace as CSV with columns
    /// `T,T_rel,M,Delta_W,I,F,H_Z_given_O,VI` (VI empty without a
    /// reference).
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "T,T_rel,M,Delta_W,I,F,H_Z_given_O,VI")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                fmt_num(r.t),
                fmt_num(r.t_rel),
                r.effective_groups,
                fmt_num(r.within_inertia),
                fmt_num(r.mutual),
                fmt_num(r.free_energy),
                fmt_num(r.softness),
                r.vi.map(fmt_num).unwrap_or_default()
            )?;
        }
        Ok(())
    }

    /// Parses a trace CSV written by [`AnnealingTrace::to_csv`].
    pub fn from_csv<R: std::io::BufRead>(reader: R) -> Result<Self> {
        let mut records = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::CsvParse {
                row: idx,
                col: 0,
                msg: format!("io error: {e}"),
            })?;
            if idx == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(Error::CsvParse {
                    row: idx,
                    col: fields.len(),
                    msg: "expected 8 columns".into(),
                });
            }
            let num = |c: usize| {
                parse_num(fields[c]).ok_or(Error::CsvParse {
                    row: idx,
                    col: c + 1,
                    msg: "bad number".into(),
                })
            };
            records.push(TraceRecord {
                t: num(0)?,
                t_rel: num(1)?,
                effective_groups: fields[2].trim().parse().map_err(|_| Error::CsvParse {
                    row: idx,
                    col: 3,
                    msg: "bad group count".into(),
                })?,
                within_inertia: num(3)?,
                mutual: num(4)?,
                free_energy: num(5)?,
                softness: num(6)?,
                vi: if fields[7].trim().is_empty() {
                    None
                } else {
                    Some(num(7)?)
                },
                converged: true,
            });
        }
        Ok(AnnealingTrace { records })
    }
}

/// Serializable snapshot of a membership at one annealing step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipSnapshot {
    pub t: f64,
    pub t_rel: f64,
    pub labels: Vec<String>,
    /// Group volumes.
    pub rho: Vec<f64>,
    /// Per-vertex membership vectors, one row per label.
    pub memberships: Vec<Vec<f64>>,
}

impl MembershipSnapshot {
    pub fn new(z: &Membership, f: &DVector<f64>, labels: &[String], t: f64, t_rel: f64) -> Self {
        let n = z.n();
        let m = z.groups();
        let zm = z.matrix();
        let rho = (0..m)
            .map(|g| (0..n).map(|i| f[i] * zm[(i, g)]).sum())
            .collect();
        let memberships = (0..n)
            .map(|i| (0..m).map(|g| zm[(i, g)]).collect())
            .collect();
        MembershipSnapshot {
            t,
            t_rel,
            labels: labels.to_vec(),
            rho,
            memberships,
        }
    }

    pub fn to_membership(&self) -> Result<Membership> {
        let n = self.memberships.len();
        let m = self.memberships.first().map(Vec::len).unwrap_or(0);
        let mut z = DMatrix::zeros(n, m);
        for (i, row) in self.memberships.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch("ragged membership rows".into()));
            }
            for (g, &v) in row.iter().enumerate() {
                z[(i, g)] = v;
            }
        }
        Membership::new(z)
    }
}

/// Options for [`anneal`].
#[derive(Debug, Clone)]
pub struct AnnealingOptions {
    pub em_max_iter: usize,
    pub em_tol: f64,
    pub merge_tol: f64,
    /// Stop as soon as a single effective group remains.
    pub stop_when_single: bool,
    /// Collapse to one group when `H(Z)` or `Δ - F` become negligible,
    /// killing metastable micro-groups. Off by default to reproduce raw
    /// traces.
    pub forced_coalescence: bool,
    pub coalescence_entropy_tol: f64,
    pub coalescence_free_energy_tol: f64,
}

impl Default for AnnealingOptions {
    fn default() -> Self {
        AnnealingOptions {
            em_max_iter: EM_MAX_ITER,
            em_tol: EM_TOL,
            merge_tol: MERGE_TOL,
            stop_when_single: false,
            forced_coalescence: false,
            coalescence_entropy_tol: 1e-6,
            coalescence_free_energy_tol: 1e-9,
        }
    }
}

/// Geometric ladder of relative temperatures from `start` up to at least
/// `end` (the last value may overshoot).
pub fn geometric_schedule(start: f64, end: f64, ratio: f64) -> Result<Vec<f64>> {
    if start <= 0.0
        || end <= start
        || ratio <= 1.0
        || !(start.is_finite() && end.is_finite() && ratio.is_finite())
    {
        return Err(Error::BadParameter(format!(
            "schedule requires 0 < start < end and ratio > 1 (got start={start}, end={end}, ratio={ratio})"
        )));
    }
    let mut values = Vec::new();
    let mut t = start;
    loop {
        values.push(t);
        if t >= end {
            break;
        }
        t *= ratio;
    }
    Ok(values)
}

/// Soft hierarchical descendant clustering over an ascending ladder of
/// relative temperatures.
///
/// Starts from the identity membership at the lowest temperature; each step
/// iterates the fixed point to convergence, merges equivalent groups,
/// records a trace row and seeds the next temperature with the converged
/// membership. Returns the trace and the membership kept at every step.
pub fn anneal(
    d: &DistanceMatrix,
    e: &ExchangeMatrix,
    schedule: &[f64],
    opts: &AnnealingOptions,
    reference: Option<&Membership>,
) -> Result<(AnnealingTrace, Vec<Membership>)> {
    if schedule.is_empty() {
        return Err(Error::BadParameter("empty temperature schedule".into()));
    }
    for w in schedule.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::BadParameter(
                "temperature schedule must be strictly increasing".into(),
            ));
        }
    }
    if schedule[0] <= 0.0 || schedule[0].is_nan() {
        return Err(Error::BadParameter("temperatures must be positive".into()));
    }
    if let Some(r) = reference {
        if r.n() != d.n() {
            return Err(Error::DimensionMismatch(
                "reference partition order differs from graph order".into(),
            ));
        }
    }

    let n = d.n();
    let f = d.weights();
    let (_, delta) = centroid_and_inertia(d, f);
    // An all-zero distance matrix has zero inertia; any positive scale
    // works since the fixed point is then temperature-independent.
    let scale = if delta > 0.0 { delta } else { 1.0 };

    let mut z = Membership::identity(n);
    let mut trace = AnnealingTrace::default();
    let mut memberships = Vec::with_capacity(schedule.len());

    for &t_rel in schedule {
        let t = t_rel * scale;
        let (converged_z, _iters, converged) =
            iterate_to_convergence(&z, d, t, opts.em_max_iter, opts.em_tol);
        z = merge_equivalent_groups(&converged_z, e, opts.merge_tol);

        if opts.forced_coalescence && z.groups() > 1 {
            let info = mutual_information(&z, f);
            let fe = free_energy(&z, d, t);
            if info.h_groups < opts.coalescence_entropy_tol
                || fe.free_energy - delta > -opts.coalescence_free_energy_tol
            {
                z = Membership::single_group(n);
            }
        }

        let fe = free_energy(&z, d, t);
        let info = mutual_information(&z, f);
        let vi = reference.map(|r| variation_of_information(&z, r, f));
        trace.records.push(TraceRecord {
            t,
            t_rel,
            effective_groups: z.groups(),
            within_inertia: fe.within_inertia,
            mutual: fe.mutual,
            free_energy: fe.free_energy,
            softness: info.softness,
            vi,
            converged,
        });
        memberships.push(z.clone());

        if opts.stop_when_single && z.groups() == 1 {
            break;
        }
    }
    Ok((trace, memberships))
}

/// Variation of information `H(Z) + H(R) - 2 I(Z,R)` between two soft
/// partitions over the same weighted vertex set. Symmetric, nonnegative,
/// zero for identical hard partitions.
pub fn variation_of_information(z: &Membership, r: &Membership, f: &DVector<f64>) -> f64 {
    let n = z.n();
    assert_eq!(n, r.n(), "memberships must cover the same vertices");
    assert_eq!(n, f.len(), "weights must match membership rows");
    let zm = z.matrix();
    let rm = r.matrix();
    let mz = z.groups();
    let mr = r.groups();

    let mut joint = DMatrix::zeros(mz, mr);
    for i in 0..n {
        for g in 0..mz {
            if zm[(i, g)] == 0.0 {
                continue;
            }
            for h in 0..mr {
                joint[(g, h)] += f[i] * zm[(i, g)] * rm[(i, h)];
            }
        }
    }
    let rho_z: Vec<f64> = (0..mz).map(|g| joint.row(g).sum()).collect();
    let rho_r: Vec<f64> = (0..mr).map(|h| joint.column(h).sum()).collect();
    let h_z: f64 = -rho_z.iter().map(|&v| xlnx(v)).sum::<f64>();
    let h_r: f64 = -rho_r.iter().map(|&v| xlnx(v)).sum::<f64>();
    let mut mutual = 0.0;
    for g in 0..mz {
        for h in 0..mr {
            let j = joint[(g, h)];
            if j > 0.0 {
                mutual += j * (j / (rho_z[g] * rho_r[h])).ln();
            }
        }
    }
    (h_z + h_r - 2.0 * mutual).max(0.0)
}
