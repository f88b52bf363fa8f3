//! Pseudospectral simulation of the Schrödinger–KdV system on a periodic box,
//! with conserved-quantity monitoring, solitary waves, virial budgets and
//! local-mass decay diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conserved;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrate;
pub mod model;
pub mod monitor;
pub mod sum;
pub mod virial;
pub mod waves;

pub use conserved::{conserved_triple, drift_report, ConservedTriple};
pub use error::{Error, Result};
pub use grid::{Grid, Truncation};
pub use integrate::{evolve, Integrator, IntegratorOptions, Observer, Scheme, StepPlan};
pub use model::{rhs, FieldState, ModelParams};
pub use num_complex::Complex64;
