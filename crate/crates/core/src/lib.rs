//! Reconstruction and verification of surfaces with prescribed Gauss map and
//! extrinsic curvature in three-dimensional unimodular Lie groups.
//!
//! * [`lie`]: structure constants, connection table, bracket.
//! * [`fields`]: grid fields, finite differences, stereographic projection.
//! * [`positive`] and [`negative`]: frame coefficients, fundamental forms and
//!   integrability residuals for the two curvature signs.
//! * [`pde`]: coefficients of the second-order equation satisfied by the
//!   Gauss map when `mu1 = mu2`.
//! * [`correspondence`]: curvature transfer between the round sphere and
//!   Euclidean space.
//! * [`su2`]: unit-quaternion integration, loop closure, the embedding oracle
//!   and mesh export.
//! * [`scenarios`]: built-in Gauss maps used by the CLI and the test suite.

// `!(x > 0.0)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correspondence;
pub mod error;
pub mod fields;
pub mod lie;
pub mod mesh;
pub mod negative;
pub mod pde;
pub mod positive;
pub mod report;
pub mod scenarios;
pub mod su2;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type CVec3 = nalgebra::Vector3<C64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type CMat3 = nalgebra::Matrix3<C64>;

/// Lifts a real algebra vector to complex components.
pub fn complexify(v: &Vec3) -> CVec3 {
    v.map(|x| C64::new(x, 0.0))
}

/// `[n x]`, the matrix of `w -> n x w`.
pub fn cross_matrix(n: &Vec3) -> Mat3 {
    Mat3::new(0.0, -n[2], n[1], n[2], 0.0, -n[0], -n[1], n[0], 0.0)
}
