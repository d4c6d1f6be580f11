//! Thin Kirchhoff beams with beam-to-beam contact.

// Negated comparisons treat NaN as failure; index loops mirror the matrix notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod beam_element;
pub mod benchmarks;
pub mod checks;
pub mod contact;
pub mod dirichlet;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod projection;
pub mod quadrature;
pub mod scalar;
pub mod scenario;
pub mod solver;
pub mod sparse;

pub use scalar::Real;

/// Double-precision instances of the generic kernels.
pub type Vector3 = linalg::Vec3<f64>;
pub type Element = geometry::ElementDofs<f64>;
pub type BeamMaterial = beam_element::Material<f64>;
pub type Law = contact::PenaltyLaw<f64>;
pub type BeamMesh = model::Mesh<f64>;
pub type BeamModel = model::Model<f64>;
pub type Schedule = dirichlet::DirichletSchedule<f64>;
