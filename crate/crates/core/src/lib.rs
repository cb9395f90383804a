//! Sequential-decoding receivers for the pure-loss bosonic channel and for
//! quantum reading.
//!
//! The crate is organised bottom-up:
//!
//! - [`fockspace`]: truncated Fock-space states, Gaussian unitaries, the
//!   vacuum-or-not measurement and density-matrix functionals.
//! - [`ensembles`]: capacity formulas and the coherent / Type-II / Type-III
//!   state families with their closed-form overlaps.
//! - [`codec`]: random codebooks, the loss channel and Gram matrices.
//! - [`seqdecoder`]: the decoding engines (Gram chain, span trajectories,
//!   the physical Fock receiver, conditional pulse nulling) and Monte Carlo
//!   error estimation.
//! - [`bounds`]: numerical checks of the lemmas used in the error analysis.
//!
//! Message indices are zero-based throughout.

pub mod bounds;
pub mod codec;
pub mod ensembles;
mod error;
pub mod fockspace;
pub mod rng;
pub mod seqdecoder;

pub use error::{Error, Result};

pub use codec::{apply_loss, codeword_gram, generate_codebook, Codebook, GramMatrix, Prior};
pub use ensembles::{
    analytic_overlap, bpsk_capacity, g_capacity, phase_average, private_capacity, reading_state, ChannelParams,
    FamilyTag, StateFamily, Symbol,
};
pub use fockspace::{
    coherent_state, entropy, gaussian_unitary, thermal_state, trace_distance, vacuum_or_not, DensityMatrix, FockCutoff,
    GaussianUnitary, GaussianUnitarySpec, TruncatedState,
};
pub use seqdecoder::{
    average_error_exact, gram_chain_success, monte_carlo_error, simulate_trajectory, Decision, DecodeOutcome, Engine,
    ErrorEstimate, SpanRepresentation,
};

/// Complex scalar used for all amplitudes.
pub type C64 = num_complex::Complex64;
