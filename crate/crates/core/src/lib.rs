//! Photon-number tomography: simulate displaced, lossy, optionally pre-squeezed photon
//! counting on a truncated Fock-space state and reconstruct the density matrix from the
//! resulting count tables.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the command-line front end
//! and parallel table construction live in the `photomo` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod fock;
pub mod measurement;
pub mod quadrature;
pub mod quasiprob;
pub mod reconstruction;
mod special;

pub use error::{Error, Flagged, Result, SRange, ValidationError, Warning};
pub use fock::{
    annihilation_operator, build_state, displacement_operator, fidelity, squeeze_operator,
    trace_distance, BuiltState, DensityMatrix, OperatorMatrix, SqueezeSpec, StateSpec,
};
pub use measurement::{
    apply_efficiency, build_table, displaced_number_probabilities, invert_efficiency, pre_squeeze,
    sample_counts, Counts, ForwardModel, Inversion, Locking, MeasurementTable, PhotonDistribution,
    Shots, TableData,
};
pub use quadrature::{gauss_legendre, make_grid, GridSpec, PhaseSpaceGrid};
pub use quasiprob::{characteristic_function, verify_squeeze_scaling, weight_function, ScalingCheck};
pub use reconstruction::{
    admissible_s_range, effective_efficiency, kernel, q_from_zero_counts, reconstruct,
    reconstruct_raw, t_operator, KernelParams, QDistribution, RadialRule, ReconstructionReport,
};

pub use num_complex::Complex64;
