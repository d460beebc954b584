//! Characteristic-dependent linear network coding toolkit.
//!
//! The numeric core ([`linalg`], [`netmodel`], [`ineq`]) is generic over a
//! [`ff::Field`]; the aliases below fix the prime-field instantiation used by
//! the network families, the explicit codes and the search.

pub mod ff;
pub mod linalg;
pub mod netmodel;
pub mod families;
pub mod codes;
pub mod solver;
pub mod ineq;

pub use ff::{char_divides, Field, FieldError, Fp, PrimeField, Rationals};
pub use linalg::{h_cond, h_joint, solve_left, LinalgError, Matrix, Subspace};

pub type FpMatrix = Matrix<PrimeField>;
pub type QMatrix = Matrix<Rationals>;
pub type FpSubspace = Subspace<PrimeField>;
pub type QSubspace = Subspace<Rationals>;
pub type FpCode = netmodel::FractionalCode<PrimeField>;
pub type QCode = netmodel::FractionalCode<Rationals>;
