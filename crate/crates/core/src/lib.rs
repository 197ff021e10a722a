//! Product-state classical capacity (Holevo capacity) of single-qubit
//! noisy channels.
//!
//! - [`qlinalg`]: 2×2 / block-diagonal 3×3 complex matrices, states,
//!   entropies, Bloch vectors.
//! - [`channels`]: the channel catalog, operator-sum application, CPTP and
//!   unitality checks, the affine Bloch-vector form, channel files.
//! - [`holevo`]: ensembles, the Holevo quantity, closed-form capacities and
//!   restricted two-state scans.
//! - [`optimizer`]: a general multi-start ensemble optimizer used to audit
//!   the closed forms.

pub mod channels;
pub mod error;
pub mod holevo;
pub mod optimizer;
pub mod qlinalg;
pub mod search;

pub use channels::{
    make_channel, validate_cptp, AffineMap, ChannelDefinition, ChannelKind, QuantumChannel,
};
pub use error::{Error, Result};
pub use holevo::{
    capacity_amplitude_scan, capacity_closed_form, capacity_splaying_scan, eigenvalue_formulas,
    holevo_chi, CapacityResult, Ensemble, Method, RestrictedSearchParams, ScanGrid, SplayingScan,
};
pub use optimizer::{
    audit_channel, optimize_ensemble, AuditReport, Convergence, EnsembleParams, OptimizedEnsemble,
    OptimizerConfig,
};
pub use qlinalg::{
    binary_entropy, bloch_to_density, density_to_bloch, eigenvalues_hermitian, von_neumann_entropy,
    BlochVector, ComplexMatrix, DensityMatrix,
};
