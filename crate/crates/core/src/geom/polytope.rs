use std::sync::OnceLock;

use nalgebra::Vector3;

use super::hemisphere::min_positive_part;
use super::vertices::{enumerate, Geometry};
use super::{Dim, Direction};
use crate::error::{Error, Result};

/// Relative slack under which two facet ratios count as a tie.
const TIE_REL: f64 = 1e-12;

/// Convex polytope `{x : ⟨x, uᵢ⟩ ≤ hᵢ}` containing the origin in its interior.
///
/// This is the Wulff shape of the discrete function `uᵢ ↦ hᵢ`. Redundant
/// halfspaces are allowed; their facets are empty.
#[derive(Clone, Debug)]
pub struct HPolytope {
    dim: Dim,
    normals: Vec<Direction>,
    supports: Vec<f64>,
    geometry: OnceLock<Geometry>,
}

impl PartialEq for HPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.normals == other.normals && self.supports == other.supports
    }
}

impl HPolytope {
    /// Validates and builds a polytope.
    ///
    /// Requires at least `n + 1` normals not contained in any closed
    /// hemisphere and strictly positive finite supports.
    pub fn new(normals: Vec<Direction>, supports: Vec<f64>) -> Result<Self> {
        let dim = normals
            .first()
            .map(|d| d.dim())
            .ok_or_else(|| Error::InvalidPolytope("no normals".into()))?;
        if normals.len() != supports.len() {
            return Err(Error::InvalidPolytope(format!(
                "{} normals but {} supports",
                normals.len(),
                supports.len()
            )));
        }
        if let Some(bad) = normals.iter().find(|d| d.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim.n(),
                found: bad.dim().n(),
            });
        }
        if normals.len() < dim.n() + 1 {
            return Err(Error::InvalidPolytope(format!(
                "{} normals is fewer than n + 1 = {}",
                normals.len(),
                dim.n() + 1
            )));
        }
        check_supports(&supports)?;
        let ones = vec![1.0; normals.len()];
        let pp = min_positive_part(dim, &normals, &ones, &[]);
        if pp.worst <= 1e-10 * normals.len() as f64 {
            return Err(Error::InvalidPolytope(format!(
                "normals lie in a closed hemisphere (witness {:?})",
                pp.witness.coords()
            )));
        }
        Ok(Self {
            dim,
            normals,
            supports,
            geometry: OnceLock::new(),
        })
    }

    /// Builds from raw coordinate rows.
    pub fn from_rows(rows: &[Vec<f64>], supports: Vec<f64>) -> Result<Self> {
        let normals = rows
            .iter()
            .map(|r| Direction::new(r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(normals, supports)
    }

    /// Regular polygon with `m` facets at angles `2πk/m`, all supports `h`.
    pub fn regular_polygon(m: usize, h: f64) -> Result<Self> {
        let normals = (0..m)
            .map(|k| Direction::from_angle(2.0 * std::f64::consts::PI * k as f64 / m as f64))
            .collect();
        Self::new(normals, vec![h; m])
    }

    /// Axis-aligned cube (or square) `[-h, h]ⁿ`; normals ordered `+e₁, -e₁, +e₂, …`.
    pub fn cube(dim: Dim, h: f64) -> Result<Self> {
        let mut normals = Vec::new();
        for k in 0..dim.n() {
            normals.push(Direction::axis(dim, k));
            normals.push(Direction::axis(dim, k).negated());
        }
        let m = normals.len();
        Self::new(normals, vec![h; m])
    }

    /// Cross-polytope with facet normals `(±1, …, ±1)/√n`, all supports `h`.
    pub fn cross_polytope(dim: Dim, h: f64) -> Result<Self> {
        let n = dim.n();
        let mut normals = Vec::new();
        for mask in 0..(1usize << n) {
            let coords: Vec<f64> = (0..n)
                .map(|k| if mask & (1 << k) == 0 { 1.0 } else { -1.0 })
                .collect();
            normals.push(Direction::new(&coords)?);
        }
        let m = normals.len();
        Self::new(normals, vec![h; m])
    }

    /// Same normals, new supports. Only positivity is rechecked.
    pub fn with_supports(&self, supports: Vec<f64>) -> Result<Self> {
        if supports.len() != self.normals.len() {
            return Err(Error::InvalidPolytope(format!(
                "expected {} supports, got {}",
                self.normals.len(),
                supports.len()
            )));
        }
        check_supports(&supports)?;
        Ok(Self {
            dim: self.dim,
            normals: self.normals.clone(),
            supports,
            geometry: OnceLock::new(),
        })
    }

    /// Dilation `λP`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("scale factor {lambda} must be positive")));
        }
        self.with_supports(self.supports.iter().map(|h| h * lambda).collect())
    }

    #[inline]
    pub fn dim(&self) -> Dim {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.normals.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    #[inline]
    pub fn normals(&self) -> &[Direction] {
        &self.normals
    }

    #[inline]
    pub fn supports(&self) -> &[f64] {
        &self.supports
    }

    fn check_dim(&self, u: &Direction) -> Result<()> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.n(),
                found: u.dim().n(),
            });
        }
        Ok(())
    }

    /// Ratios `hᵢ/⟨u, uᵢ⟩` over facets facing `u`, and their minimum.
    fn min_ratio(&self, u: &Direction) -> Result<f64> {
        self.check_dim(u)?;
        let mut best = f64::INFINITY;
        for (n, h) in self.normals.iter().zip(&self.supports) {
            let d = u.dot(n);
            if d > 0.0 {
                best = best.min(h / d);
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::NoBoundingFacet)
        }
    }

    /// Radial function `ρ_P(u) = min {hᵢ/⟨u,uᵢ⟩ : ⟨u,uᵢ⟩ > 0}`.
    pub fn wulff_radial(&self, u: &Direction) -> Result<f64> {
        self.min_ratio(u)
    }

    /// Facet hit by the ray through `u` (the radial Gauss image of `u`).
    ///
    /// Ties are broken by the lowest facet index.
    pub fn face_assign(&self, u: &Direction) -> Result<usize> {
        let best = self.min_ratio(u)?;
        let cutoff = best * (1.0 + TIE_REL);
        self.normals
            .iter()
            .zip(&self.supports)
            .position(|(n, h)| {
                let d = u.dot(n);
                d > 0.0 && h / d <= cutoff
            })
            .ok_or(Error::NoBoundingFacet)
    }

    /// Radial function together with the assigned facet.
    pub fn radial_and_face(&self, u: &Direction) -> Result<(f64, usize)> {
        let f = self.face_assign(u)?;
        Ok((self.supports[f] / u.dot(&self.normals[f]), f))
    }

    /// Vertices and facets, computed once.
    pub fn geometry(&self) -> Result<&Geometry> {
        if let Some(g) = self.geometry.get() {
            return Ok(g);
        }
        let g = enumerate(self.dim, &self.normals, &self.supports)?;
        if g.vertices.len() < self.dim.n() + 1 {
            return Err(Error::DegenerateVertex(format!(
                "only {} vertices found",
                g.vertices.len()
            )));
        }
        Ok(self.geometry.get_or_init(|| g))
    }

    /// Support function `h_P(v) = max_{x ∈ P} ⟨x, v⟩`, evaluated over the vertices.
    pub fn support_eval(&self, v: &Direction) -> Result<f64> {
        self.check_dim(v)?;
        let g = self.geometry()?;
        let h = g
            .vertices
            .iter()
            .map(|x| v.dot_vec(x))
            .fold(f64::NEG_INFINITY, f64::max);
        if h.is_finite() {
            Ok(h)
        } else {
            Err(Error::Unbounded)
        }
    }

    /// Radial function of the polar body, `1 / h_P(u)`.
    pub fn polar_radial(&self, u: &Direction) -> Result<f64> {
        Ok(1.0 / self.support_eval(u)?)
    }

    /// Whether facet `i` has positive `(n-1)`-volume.
    pub fn facet_is_live(&self, i: usize) -> Result<bool> {
        Ok(!self.geometry()?.facets[i].is_empty())
    }

    /// Vertex positions of the realized polytope.
    pub fn vertices(&self) -> Result<&[Vector3<f64>]> {
        Ok(&self.geometry()?.vertices)
    }
}

fn check_supports(supports: &[f64]) -> Result<()> {
    for (index, &value) in supports.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveSupport { index, value });
        }
    }
    Ok(())
}

/// Radial function of the convex hull of the points `fᵢ uᵢ`.
///
/// Uses `⟨f⟩ = [1/f]*`, so `ρ_{⟨f⟩}(u) = 1 / h_{[1/f]}(u)`.
pub fn hull_radial(normals: &[Direction], scales: &[f64], u: &Direction) -> Result<f64> {
    if let Some((index, &value)) = scales
        .iter()
        .enumerate()
        .find(|(_, s)| !(**s > 0.0 && s.is_finite()))
    {
        return Err(Error::NonPositiveSupport { index, value });
    }
    let wulff = HPolytope::new(normals.to_vec(), scales.iter().map(|s| 1.0 / s).collect())?;
    wulff.polar_radial(u)
}

/// `max_{u ∈ grid} |h_P(u) - h_Q(u)|`, a lower bound for the Hausdorff distance.
pub fn hausdorff_distance(p: &HPolytope, q: &HPolytope, grid: &[Direction]) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim().n(),
            found: q.dim().n(),
        });
    }
    let (gp, gq) = (p.geometry()?, q.geometry()?);
    let support = |g: &Geometry, u: &Direction| {
        g.vertices
            .iter()
            .map(|x| u.dot_vec(x))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let gaps = crate::par::map(grid, |u| (support(gp, u) - support(gq, u)).abs());
    Ok(gaps.into_iter().fold(0.0, f64::max))
}
