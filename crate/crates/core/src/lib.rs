//! Numerical laboratory for families of pseudoconvex domains: geodesic
//! curvature of boundaries, horizontal lifts, weighted Bergman kernels and
//! their variation, plurisubharmonicity scans and holomorphic motions.
//!
//! All planar fibre integrals use the measure `i dζ∧dζ̄`, which is twice the
//! Lebesgue area element. Kernel values are reported in that convention, so
//! the unit-disk kernel is `1/(2π(1 − ζη̄)²)` rather than the Lebesgue
//! `1/(π(1 − ζη̄)²)`.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::should_implement_trait
)]

pub mod bergman;
pub mod cli;
pub mod error;
pub mod exprs;
pub mod geometry;
pub mod lifts;
pub mod linalg;
pub mod normfam;
pub mod quad;
pub mod realtoy;
pub mod variation;

pub use error::{Error, ParseError, Result};
pub use num_complex::Complex64;
