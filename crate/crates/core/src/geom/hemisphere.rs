//! Minimum over the sphere of `ξ ↦ Σ wᵢ ⟨ξ, uᵢ⟩₊`.
//!
//! On every cell of the great-circle arrangement `{⟨ξ, uᵢ⟩ = 0}` the function
//! is a restricted linear form, which is geodesically concave wherever it is
//! nonnegative, so its minimum sits on an arrangement vertex. Those vertices
//! are enumerated exactly and merged with an optional caller grid.

use nalgebra::Vector3;

use super::{orthonormal_basis, Dim, Direction};

/// Result of a positive-part scan.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivePart {
    /// Minimum of the positive-part integral over all candidates.
    pub worst: f64,
    /// Direction attaining it (centre of the tied minimizers).
    pub witness: Direction,
}

fn positive_part(xi: &Vector3<f64>, dirs: &[Direction], weights: &[f64]) -> f64 {
    dirs.iter()
        .zip(weights)
        .map(|(u, w)| w * u.dot_vec(xi).max(0.0))
        .sum()
}

fn arrangement_vertices(dim: Dim, dirs: &[Direction]) -> Vec<Vector3<f64>> {
    let mut out = Vec::new();
    match dim {
        Dim::Two => {
            for u in dirs {
                let v = u.vector();
                let perp = Vector3::new(-v[1], v[0], 0.0);
                out.push(perp);
                out.push(-perp);
            }
        }
        Dim::Three => {
            for (i, a) in dirs.iter().enumerate() {
                let (e1, e2) = orthonormal_basis(a.vector());
                out.extend([e1, -e1, e2, -e2]);
                for b in &dirs[i + 1..] {
                    let c = a.vector().cross(b.vector());
                    let n = c.norm();
                    if n > 1e-12 {
                        out.push(c / n);
                        out.push(-c / n);
                    }
                }
            }
        }
    }
    for u in dirs {
        out.push(*u.vector());
        out.push(-*u.vector());
    }
    out
}

/// Scans arrangement vertices plus `grid` for the minimum positive-part integral.
///
/// Ties (within `1e-12` of the total weight) are averaged into a single
/// witness so that flat minima report their centre.
pub fn min_positive_part(
    dim: Dim,
    dirs: &[Direction],
    weights: &[f64],
    grid: &[Direction],
) -> PositivePart {
    let mut candidates = arrangement_vertices(dim, dirs);
    candidates.extend(grid.iter().map(|d| *d.vector()));
    if candidates.is_empty() {
        candidates.push(Vector3::x());
    }
    let values: Vec<f64> = candidates
        .iter()
        .map(|xi| positive_part(xi, dirs, weights))
        .collect();
    let (best_idx, worst) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let total: f64 = weights.iter().map(|w| w.abs()).sum();
    let slack = 1e-12 * total.max(f64::MIN_POSITIVE);
    let mut centre = Vector3::zeros();
    for (xi, v) in candidates.iter().zip(&values) {
        if *v <= worst + slack {
            centre += xi;
        }
    }
    let witness = Direction::from_vector(centre, dim)
        .or_else(|_| Direction::from_vector(candidates[best_idx], dim))
        .unwrap_or_else(|_| Direction::axis(dim, 0));
    PositivePart { worst, witness }
}
