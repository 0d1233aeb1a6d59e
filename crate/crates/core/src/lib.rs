//! Dual Orlicz quermassintegrals and curvature measures of convex bodies and
//! polytopes, with a solver for the discrete dual Orlicz-Minkowski problem.

pub mod density;
pub mod error;
pub mod geom;
pub mod measures;
pub mod par;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
