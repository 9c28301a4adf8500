//! Euclidean distances and soft spectral clustering on weighted graphs.
//!
//! The pipeline runs in four stages:
//!
//! 1. **Ingest** ([`flow`]): read raw flow counts, symmetrize them
//!    (half-sum, geometric mean, or a quasi-symmetric fit) and normalize
//!    into an exchange matrix — optionally stripping the diagonal.
//! 2. **Spectral analysis** ([`spectral`]): eigenvalues, raw coordinates,
//!    t-step matrices, vertex equivalence, the normalized-cut relaxation
//!    bound.
//! 3. **Distances** ([`distance`]): chi-square, diffusive, frozen, commute,
//!    absorption, sif, shortest-path and jump distances, plus Schoenberg
//!    transformations and the Markov/electrical cross-checks.
//! 4. **Geometry and clustering** ([`mds`], [`cluster`]): weighted classical
//!    MDS with embeddability certification, and temperature-annealed soft
//!    clustering with full diagnostics.
//!
//! All operations are pure functions over immutable inputs and are safe to
//! call concurrently; outputs are deterministic, including eigenvector
//! signs.

pub mod cluster;
pub mod distance;
pub mod error;
pub mod flow;
pub mod mds;
pub mod numfmt;
pub mod spectral;

pub use cluster::{
    anneal, em_step, free_energy, geometric_schedule, group_stats, iterate_to_convergence,
    merge_equivalent_groups, mutual_information, variation_of_information, AnnealingOptions,
    AnnealingTrace, FreeEnergy, GroupStats, InfoStats, Membership, MembershipSnapshot, TraceRecord,
};
pub use distance::{
    absorption_visits, dirichlet_energy, electrical_commute, fundamental_matrix, jump_distance,
    natural_distance, natural_distance_with, schoenberg_transform, shortest_path_distance,
    DistanceFlags, DistanceMatrix, DistanceOptions, GSpec, PhiSpec,
};
pub use error::{Error, Result};
pub use flow::{
    fit_quasi_symmetric, symmetrize, to_exchange, ExchangeMatrix, FlowMatrix, SymmetrizationMethod,
};
pub use mds::{centroid_and_inertia, is_squared_euclidean, mds, Embedding};
pub use spectral::{
    decompose, find_equivalent_pairs, ncut_relaxation_bound, standardized, t_step,
    weakly_equivalent_pairs, SpectralBasis, StepCount,
};
