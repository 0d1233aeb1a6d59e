//! Integration rules on S¹ and S², exact per-facet arc partitions for
//! polygons, and the small 1-D/triangle rules used on facets.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{Dim, Direction, HPolytope};
use crate::par;

/// Default number of angles for planar grid rules.
pub const DEFAULT_CIRCLE_RESOLUTION: usize = 2048;
/// Default polar × azimuth resolution for spatial grid rules.
pub const DEFAULT_SPHERE_RESOLUTION: (usize, usize) = (64, 128);
/// Default Gauss order per arc.
pub const DEFAULT_ARC_ORDER: usize = 16;

/// Legendre `P_n(z)` and `P_{n-1}(z)` by the three-term recurrence.
fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let (mut p1, mut p2) = (1.0, 0.0);
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
    }
    (p1, p2)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, q) = legendre_pair(n, z);
            let dp = n as f64 * (z * p - q) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (p, q) = legendre_pair(n, z);
        let dp = n as f64 * (z * p - q) / (z * z - 1.0);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_on(a: f64, b: f64, n: usize) -> impl Iterator<Item = (f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    x.into_iter()
        .zip(w)
        .map(move |(xi, wi)| (mid + half * xi, half * wi))
}

/// Collapsed-Gauss rule on the reference triangle `{(s,t): s,t ≥ 0, s+t ≤ 1}`.
///
/// Returns `(s, t, weight)`; weights sum to 1/2. With `k` points per axis
/// the rule is exact for total degree `2k - 2`.
pub fn triangle_rule(k: usize) -> Vec<(f64, f64, f64)> {
    let (x, w) = gauss_legendre(k);
    let mut out = Vec::with_capacity(k * k);
    for (xi, wi) in x.iter().zip(&w) {
        let s = 0.5 * (1.0 + xi);
        for (xj, wj) in x.iter().zip(&w) {
            let r = 0.5 * (1.0 + xj);
            out.push((s, r * (1.0 - s), 0.25 * wi * wj * (1.0 - s)));
        }
    }
    out
}

/// Quadrature nodes and positive weights on `S^{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalRule {
    dim: Dim,
    nodes: Vec<Direction>,
    weights: Vec<f64>,
}

impl SphericalRule {
    /// Uniform trapezoid rule with `n` angles `2πk/n`.
    pub fn circle(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("circle rule needs at least one node".into()));
        }
        let h = 2.0 * PI / n as f64;
        Ok(Self {
            dim: Dim::Two,
            nodes: (0..n).map(|k| Direction::from_angle(h * k as f64)).collect(),
            weights: vec![h; n],
        })
    }

    /// Gauss-Legendre in `cos θ` times a uniform (half-shifted) azimuth rule.
    pub fn product(polar: usize, azimuth: usize) -> Result<Self> {
        if polar == 0 || azimuth == 0 {
            return Err(Error::InvalidInput("product rule needs positive resolution".into()));
        }
        let (z, wz) = gauss_legendre(polar);
        let h = 2.0 * PI / azimuth as f64;
        let mut nodes = Vec::with_capacity(polar * azimuth);
        let mut weights = Vec::with_capacity(polar * azimuth);
        for (zi, wi) in z.iter().zip(&wz) {
            for j in 0..azimuth {
                nodes.push(Direction::from_polar(*zi, h * (j as f64 + 0.5)));
                weights.push(wi * h);
            }
        }
        Ok(Self {
            dim: Dim::Three,
            nodes,
            weights,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wⱼ f(uⱼ)`, evaluated in parallel and summed in node order.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&Direction) -> f64 + Sync + Send,
    {
        let vals = par::map(&self.nodes, f);
        par::sum(vals.iter().zip(&self.weights).map(|(v, w)| v * w))
    }
}

/// Builds the default-shaped rule: `n = 2` → `resolution` angles;
/// `n = 3` → `resolution × 2·resolution` product rule.
pub fn make_rule(n: usize, resolution: usize) -> Result<SphericalRule> {
    match Dim::from_usize(n)? {
        Dim::Two => SphericalRule::circle(resolution),
        Dim::Three => SphericalRule::product(resolution, 2 * resolution),
    }
}

/// Direction grid used for support-function sup-norms
/// (4096 angles in the plane, 64 × 256 in space).
pub fn hausdorff_grid(dim: Dim) -> Vec<Direction> {
    match dim {
        Dim::Two => SphericalRule::circle(4096).map(|r| r.nodes).unwrap_or_default(),
        Dim::Three => SphericalRule::product(64, 256)
            .map(|r| r.nodes)
            .unwrap_or_default(),
    }
}

/// One arc of a polygon's radial partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    /// Start angle in `[0, 2π)`.
    pub start: f64,
    /// End angle, `start < end ≤ start + 2π`.
    pub end: f64,
    /// Facet whose points are seen from the origin along this arc.
    pub owner: usize,
    pub nodes: Vec<Direction>,
    pub weights: Vec<f64>,
}

/// Exact decomposition of S¹ into the preimages of a polygon's facets under
/// the radial Gauss map, with Gauss nodes on every arc.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcPartition {
    arcs: Vec<Arc>,
}

impl ArcPartition {
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Vertex angles, sorted in `[0, 2π)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.arcs.iter().map(|a| a.start).collect()
    }

    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&Direction) -> f64,
    {
        par::sum(
            self.arcs
                .iter()
                .flat_map(|a| a.nodes.iter().zip(&a.weights))
                .map(|(u, w)| w * f(u)),
        )
    }
}

/// Splits `[a, b]` until each panel is at most 2.5 times as long as its distance
/// to `normal ± π/2`, where the radial function of the facet line blows up.
fn graded_panels(a: f64, b: f64, normal: f64, depth: usize, out: &mut Vec<(f64, f64)>) {
    let rel = |t: f64| (t - normal + PI).rem_euclid(2.0 * PI) - PI;
    let (ra, rb) = (rel(a), rel(b));
    let dist = (ra + 0.5 * PI).min(0.5 * PI - rb);
    if b - a <= 2.5 * dist || depth >= 40 {
        out.push((a, b));
        return;
    }
    let m = 0.5 * (a + b);
    graded_panels(a, m, normal, depth + 1, out);
    graded_panels(m, b, normal, depth + 1, out);
}

/// Partitions S¹ by the facets of a planar polytope.
pub fn arc_partition(p: &HPolytope, gauss_order: usize) -> Result<ArcPartition> {
    if p.dim() != Dim::Two {
        return Err(Error::UnsupportedDimension(p.dim().n()));
    }
    if gauss_order == 0 {
        return Err(Error::InvalidInput("gauss_order must be positive".into()));
    }
    let g = p.geometry()?;
    let mut arcs = Vec::new();
    let angle = |v: &nalgebra::Vector3<f64>| {
        let a = v[1].atan2(v[0]);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    };
    for (owner, f) in g.facets.iter().enumerate() {
        if f.is_empty() {
            continue;
        }
        let start = angle(&g.vertices[f.vertex_loop[0]]);
        let mut end = angle(&g.vertices[f.vertex_loop[1]]);
        if end <= start {
            end += 2.0 * PI;
        }
        let normal = p.normals()[owner].angle();
        let mut panels = Vec::new();
        graded_panels(start, end, normal, 0, &mut panels);
        let (nodes, weights) = panels
            .iter()
            .flat_map(|&(a, b)| gauss_on(a, b, gauss_order))
            .map(|(t, w)| (Direction::from_angle(t), w))
            .unzip();
        arcs.push(Arc {
            start,
            end,
            owner,
            nodes,
            weights,
        });
    }
    arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
    for k in 0..arcs.len() {
        let next = &arcs[(k + 1) % arcs.len()];
        let target = if k + 1 == arcs.len() {
            next.start + 2.0 * PI
        } else {
            next.start
        };
        if (arcs[k].end - target).abs() > 1e-9 {
            return Err(Error::DegenerateVertex(format!(
                "arc of facet {} ends at {} but the next starts at {}",
                arcs[k].owner, arcs[k].end, target
            )));
        }
    }
    if arcs.len() < 3 {
        return Err(Error::DegenerateVertex(format!("only {} arcs", arcs.len())));
    }
    Ok(ArcPartition { arcs })
}

/// Quadrature node tagged with the facet its ray hits and the radial value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledNode {
    pub dir: Direction,
    pub weight: f64,
    pub face: usize,
    pub rho: f64,
}

/// How integrals over the sphere are discretized for a given polytope.
#[derive(Clone, Debug, PartialEq)]
pub enum Scheme {
    /// Exact arc partition with Gauss nodes per arc (planar only).
    Arcs { gauss_order: usize },
    /// Fixed rule; each node assigned to its facet by `face_assign`.
    Grid(SphericalRule),
}

impl Scheme {
    /// Arcs (order 16) in the plane, the 64 × 128 product rule in space.
    pub fn default_for(dim: Dim) -> Self {
        match dim {
            Dim::Two => Scheme::Arcs {
                gauss_order: DEFAULT_ARC_ORDER,
            },
            Dim::Three => Scheme::Grid(
                SphericalRule::product(DEFAULT_SPHERE_RESOLUTION.0, DEFAULT_SPHERE_RESOLUTION.1)
                    .expect("default resolution is positive"),
            ),
        }
    }

    /// Nodes for integrating over S^{n-1} against `p`'s radial Gauss map.
    pub fn labeled_nodes(&self, p: &HPolytope) -> Result<Vec<LabeledNode>> {
        match self {
            Scheme::Arcs { gauss_order } => {
                let part = arc_partition(p, *gauss_order)?;
                Ok(labeled_from_arcs(p, &part))
            }
            Scheme::Grid(rule) => {
                if rule.dim() != p.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: p.dim().n(),
                        found: rule.dim().n(),
                    });
                }
                let assigned = par::map(rule.nodes(), |u| p.radial_and_face(u));
                assigned
                    .into_iter()
                    .zip(rule.nodes().iter().zip(rule.weights()))
                    .map(|(r, (u, w))| {
                        let (rho, face) = r?;
                        Ok(LabeledNode {
                            dir: *u,
                            weight: *w,
                            face,
                            rho,
                        })
                    })
                    .collect()
            }
        }
    }
}

pub(crate) fn labeled_from_arcs(p: &HPolytope, part: &ArcPartition) -> Vec<LabeledNode> {
    let mut out = Vec::new();
    for arc in part.arcs() {
        let (n, h) = (p.normals()[arc.owner], p.supports()[arc.owner]);
        for (u, w) in arc.nodes.iter().zip(&arc.weights) {
            out.push(LabeledNode {
                dir: *u,
                weight: *w,
                face: arc.owner,
                rho: h / u.dot(&n),
            });
        }
    }
    out
}
