//! Squeezing operations for a charged particle in a time-dependent
//! quadratic potential.
//!
//! The classical and quantum motion under `H = p²/2 + beta(tau) q²/2` is
//! fixed by a 2×2 symplectic matrix `u(tau, tau0)`. This crate integrates
//! that matrix, classifies it by its trace, scans the Mathieu plane of a
//! Paul trap, designs soft pulses that produce exact squeezed Fourier
//! operations, transports Gaussian moments and converts the results to
//! laboratory units.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod evolution;
pub mod mathieu;
pub mod packets;
pub mod physical;
pub mod profile;
pub mod report;
pub mod symplectic;

pub use design::{
    beta_from_theta, build_pulse, solve_theta_coeffs, theta_eval, validate_lemma, verify_design,
    Derivative, DesignFunction, DesignReport, DesignedPulse, LemmaReport, Stage, Tail, ThetaAnsatz,
    ThetaFn,
};
pub use error::{Error, ErrorKind, Result};
pub use evolution::{
    apply_to_state, classify, integrate, integrate_path, integrate_symmetric, monodromy,
    IntegratorConfig, Method, Zone, ZoneReport,
};
pub use mathieu::{
    find_double_zero, scan_grid, trace_locus, DoubleZero, Entry, LocusPoint, NewtonOptions,
    ScanGrid, ScanRect,
};
pub use packets::{
    backcast_error, congruence, delta_q, gaussian_init, propagate, shadow, Covariance, MomentState,
};
pub use physical::{BeltConvention, PhysicalContext};
pub use profile::{BetaProfile, Interpolation, Piece};
pub use symplectic::{
    compose, free_motion, is_equidiagonal, rotation_matrix, squeeze_compose, squeezed_fourier,
    symmetric_product, CanonicalState, SymplecticMatrix2,
};
