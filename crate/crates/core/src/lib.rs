//! Proximity problems between sets in geodesic metric spaces.
//!
//! The crate computes nearest and farthest pairs between finite samples of
//! sets, diagnoses whether those problems are well-posed, and builds the
//! small "drop" perturbations that make them well-posed. It works in
//! Euclidean space, the hyperbolic plane (hyperboloid model) and finite
//! metric trees, with spheres available as comparison targets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod model_space;
pub mod par;
pub mod proximity;
pub mod regularizer;
pub mod setkit;
pub mod variational;

pub use error::{Error, Result};
pub use model_space::{Point, Space};
pub use proximity::Mode;
pub use setkit::FiniteSet;
