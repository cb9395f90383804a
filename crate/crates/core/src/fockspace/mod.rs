//! Truncated Fock-space numerics.
//!
//! Every mode is cut off at `d` levels. States and operators are only
//! trusted on the low-occupation sector (levels `<= d/2`); the cutoff rules
//! in [`cutoff`] choose `d` from the analytic photon statistics.

pub mod cutoff;
mod density;
mod measurement;
mod state;
mod unitary;

pub use cutoff::{leakage_cutoff, low_sector_cutoff, FockCutoff, PhotonStatistics, LEAKAGE_TOLERANCE};
pub use density::{entropy, thermal_state, trace_distance, DensityMatrix, EIGEN_CLIP, HERMITIAN_TOLERANCE};
pub use measurement::{vacuum_or_not, Branch, MeasurementOutcome, VacuumOrNot, DEGENERATE_BRANCH};
pub use state::{coherent_state, TruncatedState};
pub use unitary::{
    gaussian_unitary, gaussian_unitary_on_sectors, GaussianUnitary, GaussianUnitarySpec, UNITARY_DEFECT_TOLERANCE,
};

pub(crate) use density::{hermitian_defect, hermitian_eigenvalues, thermal_weights, trace_norm};
pub(crate) use measurement::remove_vacuum;
