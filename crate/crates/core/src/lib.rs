//! Quaternionic Hessian-type equations on flat hyperkähler tori.
//!
//! Layers, bottom up:
//! - [`quat`], [`quatlin`]: quaternions and hyperhermitian matrix algebra.
//! - [`cones`]: symmetric functions of eigenvalues and their admissible cones.
//! - [`torus`]: periodic grids, derivative schemes and quaternionic Hessians.
//! - [`forms`]: exterior algebra on `C^{2n}` and Hodge identities.
//! - [`solver`]: Newton-Krylov with continuity for `f(lambda(Omega + Hess phi)) = H + log b`.

pub mod cones;
pub mod forms;
pub mod quat;
pub mod quatlin;
pub mod solver;
pub mod torus;

pub use quat::Quat;
pub use quatlin::{HypMatrix, QMatrix, QuatLinError};
