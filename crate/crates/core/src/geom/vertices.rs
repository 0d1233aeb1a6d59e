//! Vertex and facet enumeration for halfspace polytopes.
//!
//! Each facet line (2-D) or facet plane (3-D, via in-plane lines) is clipped
//! against every other halfspace. Redundant halfspaces come out empty, and of
//! two coincident halfspaces only the lower index keeps its facet.

use nalgebra::{Vector2, Vector3};

use super::{orthonormal_basis, Dim, Direction};
use crate::error::{Error, Result};

/// A realized facet: ordered boundary loop plus its `(n-1)`-volume.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// Indices into [`Geometry::vertices`], counter-clockwise when viewed from
    /// outside. Empty for facets that do not touch the polytope.
    pub vertex_loop: Vec<usize>,
    /// Length (2-D) or area (3-D).
    pub measure: f64,
}

impl Facet {
    pub fn is_empty(&self) -> bool {
        self.vertex_loop.is_empty()
    }
}

/// Vertex enumeration result, aligned with the halfspace list.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub vertices: Vec<Vector3<f64>>,
    pub facets: Vec<Facet>,
}

/// Line `⟨c, y⟩ = d` with unit `c`, tagged with an id for the coincidence rule.
#[derive(Clone, Copy, Debug)]
struct Line {
    c: Vector2<f64>,
    d: f64,
    id: usize,
}

/// Clips every line against all other halfplanes `⟨c, y⟩ ≤ d`.
///
/// Returns, per line, the segment `(start, end)` oriented along the
/// counter-clockwise tangent, or `None` when the line misses the region.
type Segment = (Vector2<f64>, Vector2<f64>);

fn clip_lines(lines: &[Line], tol: f64) -> Result<Vec<Option<Segment>>> {
    let mut out = Vec::with_capacity(lines.len());
    for (k, lk) in lines.iter().enumerate() {
        let base = lk.c * lk.d;
        let tangent = Vector2::new(-lk.c[1], lk.c[0]);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut empty = false;
        for (j, lj) in lines.iter().enumerate() {
            if j == k {
                continue;
            }
            let a = tangent.dot(&lj.c);
            let b = lj.d - lk.d * lk.c.dot(&lj.c);
            if a.abs() <= 1e-14 {
                if b < -tol {
                    empty = true;
                    break;
                }
                if b.abs() <= tol && lk.c.dot(&lj.c) > 0.0 && lj.id < lk.id {
                    empty = true;
                    break;
                }
                continue;
            }
            let s = b / a;
            if a > 0.0 {
                hi = hi.min(s);
            } else {
                lo = lo.max(s);
            }
        }
        if empty || hi - lo <= tol {
            out.push(None);
            continue;
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Unbounded);
        }
        out.push(Some((base + tangent * lo, base + tangent * hi)));
    }
    Ok(out)
}

fn dedup_push(store: &mut Vec<Vector3<f64>>, p: Vector3<f64>, tol: f64) -> usize {
    if let Some(i) = store.iter().position(|q| (q - p).norm() <= tol) {
        return i;
    }
    store.push(p);
    store.len() - 1
}

pub(crate) fn enumerate(dim: Dim, normals: &[Direction], supports: &[f64]) -> Result<Geometry> {
    let scale = supports.iter().copied().fold(0.0, f64::max);
    let tol = 1e-12 * scale;
    let merge_tol = 1e-9 * scale;
    match dim {
        Dim::Two => enumerate_2d(normals, supports, tol, merge_tol),
        Dim::Three => enumerate_3d(normals, supports, tol, merge_tol),
    }
}

fn enumerate_2d(
    normals: &[Direction],
    supports: &[f64],
    tol: f64,
    merge_tol: f64,
) -> Result<Geometry> {
    let lines: Vec<Line> = normals
        .iter()
        .zip(supports)
        .enumerate()
        .map(|(id, (u, h))| Line {
            c: Vector2::new(u.vector()[0], u.vector()[1]),
            d: *h,
            id,
        })
        .collect();
    let segments = clip_lines(&lines, tol)?;
    let mut vertices = Vec::new();
    let mut facets = Vec::with_capacity(normals.len());
    for seg in segments {
        match seg {
            Some((a, b)) if (b - a).norm() > merge_tol => {
                let ia = dedup_push(&mut vertices, Vector3::new(a[0], a[1], 0.0), merge_tol);
                let ib = dedup_push(&mut vertices, Vector3::new(b[0], b[1], 0.0), merge_tol);
                facets.push(Facet {
                    vertex_loop: vec![ia, ib],
                    measure: (b - a).norm(),
                });
            }
            // Edges shorter than the merge tolerance collapse to a vertex.
            _ => facets.push(Facet {
                vertex_loop: Vec::new(),
                measure: 0.0,
            }),
        }
    }
    Ok(Geometry { vertices, facets })
}

fn enumerate_3d(
    normals: &[Direction],
    supports: &[f64],
    tol: f64,
    merge_tol: f64,
) -> Result<Geometry> {
    let mut vertices = Vec::new();
    let mut facets = Vec::with_capacity(normals.len());
    for (i, (ui, hi)) in normals.iter().zip(supports).enumerate() {
        let u = ui.vector();
        let (e1, e2) = orthonormal_basis(u);
        let mut lines = Vec::with_capacity(normals.len());
        let mut empty = false;
        for (j, (uj, hj)) in normals.iter().zip(supports).enumerate() {
            if j == i {
                continue;
            }
            let c = Vector2::new(e1.dot(uj.vector()), e2.dot(uj.vector()));
            let rhs = hj - hi * u.dot(uj.vector());
            let norm = c.norm();
            if norm <= 1e-12 {
                if u.dot(uj.vector()) > 0.0 && (rhs < -tol || (rhs.abs() <= tol && j < i)) {
                    empty = true;
                    break;
                }
                continue;
            }
            lines.push(Line {
                c: c / norm,
                d: rhs / norm,
                id: j,
            });
        }
        if empty {
            facets.push(Facet {
                vertex_loop: Vec::new(),
                measure: 0.0,
            });
            continue;
        }
        let segments = clip_lines(&lines, tol)?;
        let mut local: Vec<Vector2<f64>> = Vec::new();
        for (a, b) in segments.into_iter().flatten() {
            for p in [a, b] {
                if !local.iter().any(|q| (q - p).norm() <= merge_tol) {
                    local.push(p);
                }
            }
        }
        if local.len() < 3 {
            facets.push(Facet {
                vertex_loop: Vec::new(),
                measure: 0.0,
            });
            continue;
        }
        let centre = local.iter().fold(Vector2::zeros(), |acc, p| acc + p) / local.len() as f64;
        local.sort_by(|p, q| {
            let ap = (p[1] - centre[1]).atan2(p[0] - centre[0]);
            let aq = (q[1] - centre[1]).atan2(q[0] - centre[0]);
            ap.total_cmp(&aq)
        });
        let mut area = 0.0;
        for k in 0..local.len() {
            let p = local[k];
            let q = local[(k + 1) % local.len()];
            area += p[0] * q[1] - p[1] * q[0];
        }
        area *= 0.5;
        if area <= tol * tol {
            facets.push(Facet {
                vertex_loop: Vec::new(),
                measure: 0.0,
            });
            continue;
        }
        // (e1, e2, u) is right-handed, so increasing in-plane angle is
        // counter-clockwise seen from outside.
        let base = u * *hi;
        let vertex_loop = local
            .iter()
            .map(|p| dedup_push(&mut vertices, base + e1 * p[0] + e2 * p[1], merge_tol))
            .collect();
        facets.push(Facet {
            vertex_loop,
            measure: area,
        });
    }
    Ok(Geometry { vertices, facets })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes(dim: Dim) -> Vec<Direction> {
        let mut out = Vec::new();
        for k in 0..dim.n() {
            out.push(Direction::axis(dim, k));
            out.push(Direction::axis(dim, k).negated());
        }
        out
    }

    #[test]
    fn square_has_four_unit_corners() {
        let g = enumerate(Dim::Two, &axes(Dim::Two), &[1.0; 4]).unwrap();
        assert_eq!(g.vertices.len(), 4);
        for v in &g.vertices {
            assert!((v[0].abs() - 1.0).abs() < 1e-14 && (v[1].abs() - 1.0).abs() < 1e-14);
        }
        assert!(g.facets.iter().all(|f| (f.measure - 2.0).abs() < 1e-14));
    }

    #[test]
    fn redundant_halfspace_has_empty_facet() {
        let mut n = axes(Dim::Two);
        n.push(Direction::axis(Dim::Two, 0));
        let g = enumerate(Dim::Two, &n, &[1.0, 1.0, 1.0, 1.0, 5.0]).unwrap();
        assert!(g.facets[4].is_empty());
        assert_eq!(g.vertices.len(), 4);
    }

    #[test]
    fn duplicate_halfspace_keeps_lower_index() {
        let mut n = axes(Dim::Two);
        n.push(Direction::axis(Dim::Two, 0));
        let g = enumerate(Dim::Two, &n, &[1.0; 5]).unwrap();
        assert!(!g.facets[0].is_empty());
        assert!(g.facets[4].is_empty());
    }

    #[test]
    fn cube_faces_have_area_four() {
        let g = enumerate(Dim::Three, &axes(Dim::Three), &[1.0; 6]).unwrap();
        assert_eq!(g.vertices.len(), 8);
        for f in &g.facets {
            assert_eq!(f.vertex_loop.len(), 4);
            assert!((f.measure - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cube_loops_are_counter_clockwise_from_outside() {
        let normals = axes(Dim::Three);
        let g = enumerate(Dim::Three, &normals, &[1.0; 6]).unwrap();
        for (f, u) in g.facets.iter().zip(&normals) {
            let p: Vec<_> = f.vertex_loop.iter().map(|&i| g.vertices[i]).collect();
            let n = (p[1] - p[0]).cross(&(p[2] - p[1]));
            assert!(n.dot(u.vector()) > 0.0);
        }
    }
}
