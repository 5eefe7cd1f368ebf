//! Qudit cloning attacks on prime-dimensional QKD: Bob/Eve fidelity
//! trade-offs, the symmetric cloner, mutual informations, critical
//! disturbances and the phase-covariant cloner.

pub mod clone;
pub mod cloner;
pub mod config;
pub mod error;
pub mod info;
pub mod optimize;
pub mod output;
pub mod phasecov;
pub mod qudit;
pub mod verify;

pub use clone::{fidelities_closed_form, fidelities_oracle, fourier_dual, DualMatrix, FidelitySet, ParameterMatrix};
pub use cloner::{optimize_v, symmetric_solution, BalancedCloner, CurvePoint, SymmetricSolution, VOptimum};
pub use error::{Error, Result};
pub use info::{critical_disturbance, table_sweep, AttackKind, CriticalDisturbanceRecord};
pub use qudit::{Dimension, MubLabel, QuditState};
