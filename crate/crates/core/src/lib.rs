//! Inverse spectral theory for reflectionless Jacobi matrices.
//!
//! The crate evaluates Herglotz functions given by piecewise-constant Krein
//! functions, runs the gap-modification flow into the canonical class
//! X(K), builds half-line spectral measures, reconstructs Jacobi
//! coefficients from them and computes the extremal constant `A(K)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod extremal;
pub mod gap_flow;
pub mod inverse;
pub mod krein;
pub mod linalg;
pub mod measures;
pub mod operators;
pub mod par;
pub mod quadrature;

pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, Format, Report};
pub use extremal::{brute_force_a, minimize_a, objective, ExtremalConfig, ExtremalReport, GapJumps};
pub use gap_flow::{flow_steps, flow_to_canonical, gap_modify, is_canonical, CanonicalKrein, CompactSet};
pub use inverse::{free_deviation, reconstruct, verify_reconstruction, Reconstruction};
pub use krein::{xi_free, HerglotzRep, StepFunction};
pub use measures::{
    moments, nu_plus, quadrature_discretize, rho_from_herglotz, total_mass, Atom, FSelector, SpectralMeasure,
};
pub use num_complex::Complex64;
pub use operators::{
    green_diag, metric, reflectionless_residual, shift, HalfLineRestriction, JacobiCoefficients, Tail,
};
pub use par::Execution;
