use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;

use super::{orthonormal_basis, Dim, Direction};
use crate::error::{Error, Result};

type RadialFn = dyn Fn(&Direction) -> f64 + Send + Sync;

/// Star body given by a caller-supplied continuous radial function.
#[derive(Clone)]
pub struct StarBody {
    dim: Dim,
    radial: Arc<RadialFn>,
}

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarBody").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl StarBody {
    pub fn from_fn<F>(dim: Dim, radial: F) -> Self
    where
        F: Fn(&Direction) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            radial: Arc::new(radial),
        }
    }

    /// Centred Euclidean ball of radius `r`.
    pub fn ball(dim: Dim, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("ball radius {r} must be positive")));
        }
        Ok(Self::from_fn(dim, move |_| r))
    }

    /// Centred axis-aligned ellipsoid with semi-axes `axes`.
    pub fn ellipsoid(axes: &[f64]) -> Result<Self> {
        let dim = Dim::from_usize(axes.len())?;
        if axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidInput("ellipsoid semi-axes must be positive".into()));
        }
        let ax = axes.to_vec();
        Ok(Self::from_fn(dim, move |u| {
            let q: f64 = u.coords().iter().zip(&ax).map(|(c, a)| (c / a).powi(2)).sum();
            1.0 / q.sqrt()
        }))
    }

    #[inline]
    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// `ρ(u)`; validated to be finite and positive.
    pub fn radial(&self, u: &Direction) -> Result<f64> {
        let r = (self.radial)(u);
        if r > 0.0 && r.is_finite() {
            Ok(r)
        } else {
            Err(Error::InvalidInput(format!(
                "radial function returned {r} at {:?}",
                u.coords()
            )))
        }
    }

    /// Outer unit normal at the boundary point `ρ(u)u`, by central differences
    /// of the radial function. Assumes a convex body with a `C¹` boundary.
    pub fn outer_normal(&self, u: &Direction) -> Result<Direction> {
        const STEP: f64 = 1e-6;
        let x = u.vector();
        let rho = self.radial(u)?;
        let tangents: Vec<Vector3<f64>> = match self.dim {
            Dim::Two => vec![Vector3::new(-x[1], x[0], 0.0)],
            Dim::Three => {
                let (a, b) = orthonormal_basis(x);
                vec![a, b]
            }
        };
        let mut partials = Vec::with_capacity(tangents.len());
        for t in &tangents {
            let plus = Direction::from_vector(x + t * STEP, self.dim)?;
            let minus = Direction::from_vector(x - t * STEP, self.dim)?;
            let drho = (self.radial(&plus)? - self.radial(&minus)?) / (2.0 * STEP);
            partials.push(x * drho + t * rho);
        }
        let normal = match self.dim {
            // Rotate the boundary tangent clockwise.
            Dim::Two => Vector3::new(partials[0][1], -partials[0][0], 0.0),
            Dim::Three => {
                let n = partials[0].cross(&partials[1]);
                if n.dot(x) < 0.0 {
                    -n
                } else {
                    n
                }
            }
        };
        Direction::from_vector(normal, self.dim)
    }
}
