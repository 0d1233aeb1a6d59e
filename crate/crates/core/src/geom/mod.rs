//! Convex bodies containing the origin.
//!
//! Directions and points live in `Vector3<f64>` for both supported dimensions;
//! a planar direction simply carries a zero third component. All values are
//! immutable after construction.

mod hemisphere;
mod io;
mod polytope;
mod star;
mod vertices;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use hemisphere::{min_positive_part, PositivePart};
pub use io::PolytopeRecord;
pub use polytope::{hausdorff_distance, hull_radial, HPolytope};
pub use star::StarBody;
pub use vertices::{Facet, Geometry};

/// Ambient dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn from_usize(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }

    #[inline]
    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Total spherical measure of the unit sphere (2π or 4π).
    pub fn sphere_measure(self) -> f64 {
        match self {
            Dim::Two => 2.0 * PI,
            Dim::Three => 4.0 * PI,
        }
    }
}

/// A unit vector on the sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    v: Vector3<f64>,
    dim: Dim,
}

impl Direction {
    /// Normalizes `coords` (length 2 or 3).
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = Dim::from_usize(coords.len())?;
        let mut v = Vector3::zeros();
        for (k, c) in coords.iter().enumerate() {
            v[k] = *c;
        }
        Self::from_vector(v, dim)
    }

    /// Normalizes `v`, dropping the third component in the plane.
    pub fn from_vector(mut v: Vector3<f64>, dim: Dim) -> Result<Self> {
        if dim == Dim::Two {
            v[2] = 0.0;
        }
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidDirection(format!("non-finite coordinates {v:?}")));
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidDirection("zero vector".into()));
        }
        Ok(Self { v: v / norm, dim })
    }

    /// Planar direction at angle `theta` from `e₁`.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            v: Vector3::new(theta.cos(), theta.sin(), 0.0),
            dim: Dim::Two,
        }
    }

    /// Spatial direction with polar cosine `cos_theta` (about `e₃`) and azimuth `phi`.
    pub fn from_polar(cos_theta: f64, phi: f64) -> Self {
        let c = cos_theta.clamp(-1.0, 1.0);
        let s = (1.0 - c * c).max(0.0).sqrt();
        Self {
            v: Vector3::new(s * phi.cos(), s * phi.sin(), c),
            dim: Dim::Three,
        }
    }

    /// Coordinate axis `e_k` (zero-based).
    pub fn axis(dim: Dim, k: usize) -> Self {
        let mut v = Vector3::zeros();
        v[k] = 1.0;
        Self { v, dim }
    }

    #[inline]
    pub fn dim(&self) -> Dim {
        self.dim
    }

    #[inline]
    pub fn vector(&self) -> &Vector3<f64> {
        &self.v
    }

    /// The `n` meaningful coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.v.as_slice()[..self.dim.n()]
    }

    #[inline]
    pub fn dot(&self, other: &Direction) -> f64 {
        self.v.dot(&other.v)
    }

    #[inline]
    pub fn dot_vec(&self, x: &Vector3<f64>) -> f64 {
        self.v.dot(x)
    }

    /// Polar angle in `[0, 2π)`; meaningful in the plane.
    pub fn angle(&self) -> f64 {
        let a = self.v[1].atan2(self.v[0]);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            v: -self.v,
            dim: self.dim,
        }
    }
}

/// Two orthonormal vectors spanning the plane orthogonal to `u` (3-D).
pub(crate) fn orthonormal_basis(u: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if u[0].abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = u.cross(&helper).normalize();
    let e2 = u.cross(&e1);
    (e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_normalizes() {
        let d = Direction::new(&[3.0, 4.0]).unwrap();
        assert!((d.vector().norm() - 1.0).abs() < 1e-12);
        assert_eq!(d.coords().len(), 2);
        assert!((d.coords()[0] - 0.6).abs() < 1e-15);
        let d3 = Direction::new(&[1.0, 1.0, 1.0]).unwrap();
        assert!((d3.vector().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn direction_rejects_bad_input() {
        assert!(matches!(Direction::new(&[0.0, 0.0]), Err(Error::InvalidDirection(_))));
        assert!(matches!(Direction::new(&[1.0]), Err(Error::UnsupportedDimension(1))));
        assert!(matches!(
            Direction::new(&[1.0, 0.0, 0.0, 0.0]),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(Direction::new(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn angle_is_in_range() {
        for k in 0..16 {
            let t = k as f64 * PI / 8.0;
            let a = Direction::from_angle(t).angle();
            assert!((0.0..2.0 * PI).contains(&a));
            assert!((a - t).abs() < 1e-12 || (a - t + 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        for u in [Vector3::x(), Vector3::new(1.0, 2.0, -3.0).normalize(), Vector3::z()] {
            let (a, b) = orthonormal_basis(&u);
            assert!(a.dot(&u).abs() < 1e-14 && b.dot(&u).abs() < 1e-14 && a.dot(&b).abs() < 1e-14);
            assert!((a.norm() - 1.0).abs() < 1e-14 && (b.norm() - 1.0).abs() < 1e-14);
        }
    }
}
