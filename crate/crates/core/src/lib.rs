//! Nonlinear two-dimensional magnetostatics with higher-order Lagrange
//! finite elements.
//!
//! The discrete problem is the minimization of the quadrature-based
//! magnetic energy
//!
//! ```text
//! W(a_h) = <w(Curl a_h), 1>_h - <h_s, Curl a_h>_h
//! ```
//!
//! over a `P_{k+1}` Lagrange space with homogeneous Dirichlet data, solved
//! by a damped Newton method with Armijo backtracking. The crate also
//! provides a Zarantonello fixed-point reference solver, a pull-back of
//! laws and sources onto reference domains, and a refinement-study
//! harness.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases at the crate root fix the scalar to `f64`, which is what
//! the tolerances throughout the test-suite assume.

// NaN-rejecting checks are written as `!(x > 0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod error;
pub mod femspace;
pub mod geometry;
pub mod harness;
pub mod materials;
pub mod mesh;
pub mod quadrature;
pub mod solver;

mod real;

pub use error::{Error, Result};
pub use real::Real;

pub use assembly::{Problem, Source, SparseMatrix};
pub use femspace::{CoefficientVector, FESpace};
pub use geometry::DomainMap;
pub use materials::{BrauerParams, MaterialEval, MaterialLaw};
pub use mesh::Mesh;
pub use quadrature::QuadratureRule;
pub use solver::{NewtonConfig, NewtonReport};

pub type Mesh64 = Mesh<f64>;
pub type FESpace64 = FESpace<f64>;
pub type Problem64 = Problem<f64>;
pub type QuadratureRule64 = QuadratureRule<f64>;
pub type CoefficientVector64 = CoefficientVector<f64>;
pub type SparseMatrix64 = SparseMatrix<f64>;
pub type BrauerParams64 = BrauerParams<f64>;
pub type NewtonConfig64 = NewtonConfig<f64>;
pub type NewtonReport64 = NewtonReport<f64>;

pub type Mesh32 = Mesh<f32>;
pub type FESpace32 = FESpace<f32>;
pub type Problem32 = Problem<f32>;
