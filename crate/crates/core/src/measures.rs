//! Dual Orlicz quermassintegral `V_φ` and curvature measure `C̃_φ` of
//! polytopes and star bodies.

use std::fmt::Write as _;

use log::debug;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::geom::{Dim, Direction, HPolytope, StarBody};
use crate::par::{self, Accumulator};
use crate::quadrature::{gauss_legendre, triangle_rule, LabeledNode, Scheme, SphericalRule};

/// Default Gauss order on boundary segments (2-D).
pub const BOUNDARY_ORDER_2D: usize = 32;
/// Default collapsed-Gauss order on boundary triangles (3-D).
pub const BOUNDARY_ORDER_3D: usize = 5;
/// Uniform refinements of each fan triangle in the 3-D boundary form.
pub const BOUNDARY_SUBDIVISION_3D: u32 = 2;

/// `μ = Σ λᵢ δ_{uᵢ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    directions: Vec<Direction>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(directions: Vec<Direction>, weights: Vec<f64>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidInput("measure has no atoms".into()));
        }
        if directions.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} directions but {} weights",
                directions.len(),
                weights.len()
            )));
        }
        let dim = directions[0].dim();
        if let Some(d) = directions.iter().find(|d| d.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim.n(),
                found: d.dim().n(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(format!("weight {w} is not a finite nonnegative number")));
        }
        Ok(Self {
            directions,
            weights,
        })
    }

    /// `m` equally spaced atoms on S¹ of mass `2π/m` each, starting at angle 0.
    pub fn uniform_circle(m: usize) -> Result<Self> {
        let w = 2.0 * std::f64::consts::PI / m as f64;
        Self::new(
            (0..m).map(|k| Direction::from_angle(w * k as f64)).collect(),
            vec![w; m],
        )
    }

    pub fn dim(&self) -> Dim {
        self.directions[0].dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `|μ|`.
    pub fn total(&self) -> f64 {
        par::sum(self.weights.iter().copied())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.directions.clone(),
            self.weights.iter().map(|w| c * w).collect(),
        )
    }

    /// CSV rows `facet_index, nx, ny[, nz], support, mass`; the support column
    /// is left empty without `supports`.
    pub fn to_csv(&self, supports: Option<&[f64]>) -> String {
        table_csv(self.dim(), &self.directions, supports, &self.weights)
    }
}

/// Per-facet masses `C̃(P, {uᵢ})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureResult {
    pub per_face: Vec<f64>,
    pub total: f64,
}

impl CurvatureResult {
    pub fn to_csv(&self, p: &HPolytope) -> String {
        table_csv(p.dim(), p.normals(), Some(p.supports()), &self.per_face)
    }
}

fn table_csv(dim: Dim, dirs: &[Direction], supports: Option<&[f64]>, masses: &[f64]) -> String {
    let mut out = String::from(match dim {
        Dim::Two => "facet_index,nx,ny,support,mass\n",
        Dim::Three => "facet_index,nx,ny,nz,support,mass\n",
    });
    for (i, (u, m)) in dirs.iter().zip(masses).enumerate() {
        let _ = write!(out, "{i}");
        for c in u.coords() {
            let _ = write!(out, ",{}", c + 0.0);
        }
        match supports {
            Some(h) => {
                let _ = write!(out, ",{}", h[i]);
            }
            None => out.push(','),
        }
        let _ = writeln!(out, ",{m}");
    }
    out
}

/// `(Φ(λρ, u), Ψ(λρ, u))` at every node.
pub(crate) fn node_values(
    nodes: &[LabeledNode],
    d: &Density,
    scale: f64,
) -> Result<Vec<(f64, f64)>> {
    par::map(nodes, |nd| {
        let r = scale * nd.rho;
        Ok((d.tail_integral(r, &nd.dir)?, d.curvature_density(r, &nd.dir)))
    })
    .into_iter()
    .collect()
}

/// Reduces node values in node order into `(V_φ, C̃)`.
pub(crate) fn reduce_nodes(
    nodes: &[LabeledNode],
    values: &[(f64, f64)],
    m: usize,
) -> (f64, CurvatureResult) {
    let mut quermass = Accumulator::new();
    let mut faces = vec![Accumulator::new(); m];
    for (nd, (tail, dens)) in nodes.iter().zip(values) {
        quermass.add(nd.weight * tail);
        faces[nd.face].add(nd.weight * dens);
    }
    let per_face: Vec<f64> = faces.iter().map(Accumulator::value).collect();
    let total = par::sum(per_face.iter().copied());
    (quermass.value(), CurvatureResult { per_face, total })
}

fn check_dims(p: &HPolytope, d: &Density) -> Result<()> {
    if p.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim().n(),
            found: d.dim().n(),
        });
    }
    Ok(())
}

/// `V_φ(P)` and `C̃(P, ·)` from one pass over the nodes.
pub fn quermass_and_curvature(
    p: &HPolytope,
    d: &Density,
    scheme: &Scheme,
) -> Result<(f64, CurvatureResult)> {
    check_dims(p, d)?;
    let nodes = scheme.labeled_nodes(p)?;
    let values = node_values(&nodes, d, 1.0)?;
    Ok(reduce_nodes(&nodes, &values, p.len()))
}

/// `V_φ(P) = ∫ Φ(ρ_P(u), u) du`.
pub fn quermass(p: &HPolytope, d: &Density, scheme: &Scheme) -> Result<f64> {
    check_dims(p, d)?;
    let nodes = scheme.labeled_nodes(p)?;
    let tails: Vec<f64> = par::map(&nodes, |nd| d.tail_integral(nd.rho, &nd.dir))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(par::sum(nodes.iter().zip(&tails).map(|(nd, t)| nd.weight * t)))
}

/// `V_φ(K)` for a star body.
pub fn quermass_star(k: &StarBody, d: &Density, rule: &SphericalRule) -> Result<f64> {
    if k.dim() != d.dim() || rule.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim().n(),
            found: if k.dim() != d.dim() { k.dim().n() } else { rule.dim().n() },
        });
    }
    let tails: Vec<f64> = par::map(rule.nodes(), |u| d.tail_integral(k.radial(u)?, u))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(par::sum(rule.weights().iter().zip(&tails).map(|(w, t)| w * t)))
}

/// `C̃(P, {uᵢ}) = ∫_{α*_P({uᵢ})} φ(ρu)ρⁿ du` for every facet.
pub fn curvature_measure(p: &HPolytope, d: &Density, scheme: &Scheme) -> Result<CurvatureResult> {
    check_dims(p, d)?;
    let nodes = scheme.labeled_nodes(p)?;
    let dens = par::map(&nodes, |nd| d.curvature_density(nd.rho, &nd.dir));
    let mut faces = vec![Accumulator::new(); p.len()];
    for (nd, v) in nodes.iter().zip(&dens) {
        faces[nd.face].add(nd.weight * v);
    }
    let per_face: Vec<f64> = faces.iter().map(Accumulator::value).collect();
    let total = par::sum(per_face.iter().copied());
    Ok(CurvatureResult { per_face, total })
}

/// `∫ g(α_P(u)) Ψ_P(u) du = Σᵢ g(uᵢ) C̃(P, {uᵢ})`.
pub fn integrate_spherical_form<G>(p: &HPolytope, d: &Density, g: G, scheme: &Scheme) -> Result<f64>
where
    G: Fn(&Direction) -> f64,
{
    let c = curvature_measure(p, d, scheme)?;
    Ok(par::sum(
        p.normals().iter().zip(&c.per_face).map(|(u, m)| g(u) * m),
    ))
}

/// `∫ g(ν_K(ρ_K(u)u)) φ(ρu)ρⁿ du` for a star body with a smooth boundary.
pub fn integrate_spherical_form_star<G>(
    k: &StarBody,
    d: &Density,
    g: G,
    rule: &SphericalRule,
) -> Result<f64>
where
    G: Fn(&Direction) -> f64 + Sync + Send,
{
    let terms: Vec<f64> = par::map(rule.nodes(), |u| {
        let rho = k.radial(u)?;
        Ok(g(&k.outer_normal(u)?) * d.curvature_density(rho, u))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(par::sum(rule.weights().iter().zip(&terms).map(|(w, t)| w * t)))
}

/// `Σᵢ hᵢ g(uᵢ) ∫_{Fᵢ} φ dHⁿ⁻¹`.
///
/// Segments (2-D) are split into pieces no longer than `hᵢ` with Gauss order
/// `order` on each; facets (3-D) are fanned from their centroid, each triangle
/// refined twice and integrated with `triangle_rule(order)`. Empty facets
/// contribute zero.
pub fn integrate_boundary_form<G>(p: &HPolytope, d: &Density, g: G, order: usize) -> Result<f64>
where
    G: Fn(&Direction) -> f64 + Sync + Send,
{
    check_dims(p, d)?;
    if order == 0 {
        return Err(Error::InvalidInput("boundary quadrature order must be positive".into()));
    }
    let geo = p.geometry()?;
    let phi_at = |x: &Vector3<f64>| -> Result<f64> {
        let r = x.norm();
        Ok(d.phi(r, &Direction::from_vector(*x, p.dim())?))
    };
    let gl = gauss_legendre(order);
    let tri = triangle_rule(order);
    let terms: Vec<Result<f64>> = par::map_range(p.len(), |i| {
        let facet = &geo.facets[i];
        if facet.is_empty() || facet.measure <= 0.0 {
            debug!("facet {i} is empty and contributes nothing");
            return Ok(0.0);
        }
        let h = p.supports()[i];
        let weight = g(&p.normals()[i]);
        if weight == 0.0 {
            return Ok(0.0);
        }
        let vs: Vec<Vector3<f64>> = facet.vertex_loop.iter().map(|&k| geo.vertices[k]).collect();
        let mut acc = Accumulator::new();
        match p.dim() {
            Dim::Two => {
                let (a, b) = (vs[0], vs[1]);
                let len = (b - a).norm();
                let pieces = ((len / h).ceil() as usize).clamp(1, 4096);
                let step = 1.0 / pieces as f64;
                for k in 0..pieces {
                    for (x, w) in gl.0.iter().zip(&gl.1) {
                        let s = step * (k as f64 + 0.5 * (x + 1.0));
                        acc.add(0.5 * step * w * len * phi_at(&(a + (b - a) * s))?);
                    }
                }
            }
            Dim::Three => {
                let c = vs.iter().fold(Vector3::zeros(), |s, v| s + v) / vs.len() as f64;
                for k in 0..vs.len() {
                    let (v1, v2) = (vs[k], vs[(k + 1) % vs.len()]);
                    for (a, b, e) in subdivide(c, v1, v2, BOUNDARY_SUBDIVISION_3D) {
                        let jac = (b - a).cross(&(e - a)).norm();
                        for (s, t, w) in &tri {
                            acc.add(w * jac * phi_at(&(a + (b - a) * *s + (e - a) * *t))?);
                        }
                    }
                }
            }
        }
        Ok(h * weight * acc.value())
    });
    let mut total = Accumulator::new();
    for t in terms {
        total.add(t?);
    }
    Ok(total.value())
}

type Tri = (Vector3<f64>, Vector3<f64>, Vector3<f64>);

fn subdivide(a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>, levels: u32) -> Vec<Tri> {
    let mut tris = vec![(a, b, c)];
    for _ in 0..levels {
        tris = tris
            .into_iter()
            .flat_map(|(a, b, c)| {
                let (ab, bc, ca) = ((a + b) / 2.0, (b + c) / 2.0, (c + a) / 2.0);
                [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
            })
            .collect();
    }
    tris
}

/// Facet lengths (2-D) or areas (3-D) at the facet normals.
pub fn surface_area_measure(p: &HPolytope) -> Result<DiscreteMeasure> {
    let geo = p.geometry()?;
    DiscreteMeasure::new(
        p.normals().to_vec(),
        geo.facets.iter().map(|f| if f.is_empty() { 0.0 } else { f.measure }).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Anisotropy, Claims, RadialProfile};
    use std::f64::consts::{PI, SQRT_2};

    fn power(dim: Dim, q: f64) -> Density {
        Density::power_law(dim, q, Anisotropy::Constant(1.0)).unwrap()
    }

    fn arcs() -> Scheme {
        Scheme::Arcs { gauss_order: 16 }
    }

    fn square() -> HPolytope {
        HPolytope::cube(Dim::Two, 1.0).unwrap()
    }

    #[test]
    fn disk_quermass() {
        let d = power(Dim::Two, -1.0);
        let rule = SphericalRule::circle(64).unwrap();
        for r in [1.0, 0.5, 3.0] {
            let v = quermass_star(&StarBody::ball(Dim::Two, r).unwrap(), &d, &rule).unwrap();
            assert!((v - 2.0 * PI / r).abs() < 1e-12 * v);
        }
    }

    #[test]
    fn square_closed_forms() {
        let d = power(Dim::Two, -1.0);
        let (v, c) = quermass_and_curvature(&square(), &d, &arcs()).unwrap();
        assert!((v - 4.0 * SQRT_2).abs() < 1e-12);
        for m in &c.per_face {
            assert!((m - SQRT_2).abs() < 1e-12);
        }
        assert!((c.total - 4.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(quermass(&square(), &d, &arcs()).unwrap(), v);
        let scaled = curvature_measure(&square().scaled(3.0).unwrap(), &d, &arcs()).unwrap();
        for m in &scaled.per_face {
            assert!((m - SQRT_2 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quermass_is_monotone_decreasing() {
        let d = power(Dim::Two, -0.5);
        let small = quermass(&square(), &d, &arcs()).unwrap();
        let big = quermass(&HPolytope::cube(Dim::Two, 2.0).unwrap(), &d, &arcs()).unwrap();
        assert!(small > big);
    }

    #[test]
    fn fine_polygon_approximates_disk() {
        let d = power(Dim::Two, -1.0);
        let p = HPolytope::regular_polygon(360, 1.0).unwrap();
        let c = curvature_measure(&p, &d, &arcs()).unwrap();
        let w = 2.0 * PI / 360.0;
        for m in &c.per_face {
            assert!((m - w).abs() < 1e-4 * w);
        }
    }

    #[test]
    fn spherical_form_examples() {
        let d = power(Dim::Two, -1.0);
        let p = square();
        let one = integrate_spherical_form(&p, &d, |_| 1.0, &arcs()).unwrap();
        assert!((one - 4.0 * SQRT_2).abs() < 1e-12);
        let e1 = p.normals()[0];
        let ind = integrate_spherical_form(&p, &d, |u| (u.dot(&e1) > 0.5) as u8 as f64, &arcs()).unwrap();
        assert!((ind - SQRT_2).abs() < 1e-12);
        let lin = integrate_spherical_form(&p, &d, |u| u.coords()[0], &arcs()).unwrap();
        assert!(lin.abs() < 1e-12);
    }

    #[test]
    fn boundary_form_square() {
        let d = power(Dim::Two, -1.0);
        let p = square();
        let all = integrate_boundary_form(&p, &d, |_| 1.0, BOUNDARY_ORDER_2D).unwrap();
        assert!((all - 4.0 * SQRT_2).abs() < 1e-12, "{all}");
        let e1 = p.normals()[0];
        let one = integrate_boundary_form(&p, &d, |u| (u.dot(&e1) > 0.5) as u8 as f64, 32).unwrap();
        assert!((one - SQRT_2).abs() < 1e-12);
        let redundant = HPolytope::from_rows(
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            vec![1.0, 1.0, 1.0, 1.0, 5.0],
        )
        .unwrap();
        let with = integrate_boundary_form(&redundant, &d, |_| 1.0, 32).unwrap();
        assert!((with - 4.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn cube_forms_agree() {
        let d = power(Dim::Three, -1.0);
        let p = HPolytope::cube(Dim::Three, 1.0).unwrap();
        let sph = integrate_spherical_form(&p, &d, |_| 1.0, &Scheme::default_for(Dim::Three)).unwrap();
        let bnd = integrate_boundary_form(&p, &d, |_| 1.0, BOUNDARY_ORDER_3D).unwrap();
        assert!((sph - bnd).abs() < 1e-3 * bnd, "{sph} vs {bnd}");
        // Mass identity holds exactly for the node sums.
        let v = quermass(&p, &d, &Scheme::default_for(Dim::Three)).unwrap();
        assert!((sph - v).abs() < 1e-12 * v);
    }

    #[test]
    fn redundant_facet_carries_no_mass() {
        let p = HPolytope::from_rows(
            &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            vec![1.0, 1.0, 1.0, 1.0, 5.0],
        )
        .unwrap();
        let s = surface_area_measure(&p).unwrap();
        assert_eq!(s.weights(), &[2.0, 2.0, 2.0, 2.0, 0.0]);
        let c = curvature_measure(&p, &power(Dim::Two, -2.0), &arcs()).unwrap();
        assert_eq!(c.per_face[4], 0.0);
        let cube = surface_area_measure(&HPolytope::cube(Dim::Three, 1.0).unwrap()).unwrap();
        assert!(cube.weights().iter().all(|w| (w - 4.0).abs() < 1e-12));
    }

    #[test]
    fn mass_identity_power_law() {
        for q in [-0.5, -1.0, -2.5] {
            let d = Density::power_law(
                Dim::Two,
                q,
                Anisotropy::NormPower {
                    p: 4.0,
                    exponent: q - 2.0,
                },
            )
            .unwrap();
            let p = HPolytope::regular_polygon(7, 1.3).unwrap();
            let (v, c) = quermass_and_curvature(&p, &d, &arcs()).unwrap();
            assert!((c.total + q * v).abs() < 1e-12 * c.total);
        }
    }

    #[test]
    fn exp_density_matches_closed_form_on_disk() {
        // Φ(r) = (1 + r) e^{-r} for ψ = e^{-r}, n = 2.
        let d = Density::radial(
            Dim::Two,
            RadialProfile::Exp {
                amplitude: 1.0,
                scale: 1.0,
            },
            Anisotropy::Constant(1.0),
            None,
            Claims::default(),
        )
        .unwrap();
        let rule = SphericalRule::circle(16).unwrap();
        let v = quermass_star(&StarBody::ball(Dim::Two, 2.0).unwrap(), &d, &rule).unwrap();
        let exact = 2.0 * PI * 3.0 * (-2f64).exp();
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn star_spherical_form_on_disk() {
        let d = power(Dim::Two, -1.0);
        let rule = SphericalRule::circle(256).unwrap();
        let k = StarBody::ball(Dim::Two, 1.0).unwrap();
        let v = integrate_spherical_form_star(&k, &d, |u| u.coords()[0].powi(2), &rule).unwrap();
        assert!((v - PI).abs() < 1e-8);
    }

    #[test]
    fn csv_layout() {
        let d = power(Dim::Two, -1.0);
        let c = curvature_measure(&square(), &d, &arcs()).unwrap();
        let csv = c.to_csv(&square());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("facet_index,nx,ny,support,mass"));
        assert_eq!(lines.count(), 4);
        let mu = DiscreteMeasure::uniform_circle(3).unwrap();
        assert!(mu.to_csv(None).lines().nth(1).unwrap().contains(",,"));
    }
}
