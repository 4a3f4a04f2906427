//! Weak Galerkin discretization of the two-field Biot consolidation model on
//! polygonal meshes, with backward Euler time stepping and a manufactured
//! solution convergence harness.

pub mod analysis;
pub mod basis;
pub mod checks;
pub mod error;
pub mod forms;
pub mod mesh;
pub mod parallel;
pub mod problems;
pub mod quadrature;
pub mod stepper;
pub mod study;
pub mod system;
pub mod weakops;
pub mod weakspace;

pub use error::{Result, WgError};
