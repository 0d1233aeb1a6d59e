use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Dim, HPolytope};
use crate::error::{Error, Result};

/// Serializable halfspace description: `dim`, one normal row per facet, supports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeRecord {
    pub dim: usize,
    pub normals: Vec<Vec<f64>>,
    pub supports: Vec<f64>,
}

impl PolytopeRecord {
    pub fn to_polytope(&self) -> Result<HPolytope> {
        let dim = Dim::from_usize(self.dim)?;
        if let Some(row) = self.normals.iter().find(|r| r.len() != dim.n()) {
            return Err(Error::DimensionMismatch {
                expected: dim.n(),
                found: row.len(),
            });
        }
        HPolytope::from_rows(&self.normals, self.supports.clone())
    }
}

impl From<&HPolytope> for PolytopeRecord {
    fn from(p: &HPolytope) -> Self {
        Self {
            dim: p.dim().n(),
            normals: p.normals().iter().map(|d| d.coords().to_vec()).collect(),
            supports: p.supports().to_vec(),
        }
    }
}

impl HPolytope {
    /// OFF mesh of the realized polytope.
    ///
    /// 3-D: one face per nonempty facet. 2-D: a single face listing the
    /// polygon's vertices in counter-clockwise order (z = 0).
    pub fn to_off(&self) -> Result<String> {
        let g = self.geometry()?;
        let faces: Vec<Vec<usize>> = match self.dim() {
            Dim::Three => g
                .facets
                .iter()
                .filter(|f| !f.is_empty())
                .map(|f| f.vertex_loop.clone())
                .collect(),
            Dim::Two => {
                let mut order: Vec<usize> = (0..g.vertices.len()).collect();
                order.sort_by(|&a, &b| {
                    let (va, vb) = (g.vertices[a], g.vertices[b]);
                    va[1].atan2(va[0]).total_cmp(&vb[1].atan2(vb[0]))
                });
                vec![order]
            }
        };
        let mut s = String::from("OFF\n");
        let _ = writeln!(s, "{} {} 0", g.vertices.len(), faces.len());
        for v in &g.vertices {
            let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
        }
        for f in &faces {
            let idx: Vec<String> = f.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{} {}", f.len(), idx.join(" "));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let p = HPolytope::cube(Dim::Three, 1.5).unwrap();
        let rec = PolytopeRecord::from(&p);
        assert_eq!(rec.to_polytope().unwrap(), p);
    }

    #[test]
    fn record_rejects_ragged_rows() {
        let rec = PolytopeRecord {
            dim: 2,
            normals: vec![vec![1.0, 0.0], vec![0.0, 1.0, 0.0], vec![-1.0, -1.0]],
            supports: vec![1.0; 3],
        };
        assert!(matches!(rec.to_polytope(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn off_square_and_cube() {
        let sq = HPolytope::cube(Dim::Two, 1.0).unwrap().to_off().unwrap();
        let lines: Vec<&str> = sq.lines().collect();
        assert_eq!(lines[0], "OFF");
        assert_eq!(lines[1], "4 1 0");
        assert!(lines[6].starts_with("4 "));
        let cube = HPolytope::cube(Dim::Three, 1.0).unwrap().to_off().unwrap();
        assert!(cube.lines().nth(1).unwrap() == "8 6 0");
    }
}
