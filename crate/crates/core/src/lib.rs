//! Dressed-state master equation for two dipole-coupled two-level atoms:
//! decay rates, Liouvillian construction, analytic and numeric evolution,
//! and two-qubit concurrence.

pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod liouville;
pub mod params;
pub mod validation;

pub use entanglement::ConcurrenceValue;
pub use error::{Error, Result};
pub use linalg::{Basis, DensityMatrix, EigenSystem, Mode, Superoperator};
pub use liouville::{ComplexFrequencies, TableOneCoefficients};
pub use nalgebra;
pub use num_complex::Complex64 as C64;
pub use params::{RateSet, SystemParams, Thermal, ValidityReport};
pub use validation::{CriterionResult, ValidationOptions};
