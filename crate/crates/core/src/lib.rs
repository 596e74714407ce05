//! Explicit unitary irreducible representations of su(1,1), u(3) and su(3),
//! built by vector coherent state induction and K-matrix theory.
//!
//! * [`am`]: exact SU(2) Clebsch-Gordan and Racah coefficients.
//! * [`su11`]: lowest-weight discrete series of su(1,1).
//! * [`u3`]: u(3) irreps in the canonical U(2)-coupled basis.
//! * [`su3`]: su(3) irreps in the SO(3)-coupled rotor basis.
//! * [`kmatrix`]: S-matrix recursion, orthonormalisation and unitarisation.
//! * [`repcheck`]: commutator, Hermiticity and Schur checks.
//! * [`document`]: the versioned JSON exchange format.

pub mod am;
pub mod document;
pub mod error;
pub mod kmatrix;
pub mod matrix;
pub mod radical;
pub mod repcheck;
pub mod su11;
pub mod su3;
pub mod u3;

pub use am::Spin;
pub use error::{Error, Result};
pub use matrix::{Entry, OperatorMatrix, Precision, SurdMatrix};
pub use radical::{Radical, SurdSum};
