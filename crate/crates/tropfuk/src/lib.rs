//! Exact enumeration of tropical Morse trees and one-loop graphs on the circle
//! `R/dZ`, the Fukaya product tensors they assemble into, and checkers for the
//! A-infinity and quantum A-infinity relations on the elliptic curve.
//!
//! Everything is exact: coordinates are `BigRational`, coefficients are signed
//! integer counts, and q-series are truncated at a rational cutoff.

pub mod base_geometry;
pub mod exec;
pub mod fukaya_products;
pub mod graded_tensor;
pub mod perm_operad;
pub mod rat;
pub mod stable_graph;
pub mod tropical_moduli;

pub use rat::Rational;
