//! Instance files.
//!
//! One TOML document with optional `[polytope]`, `[body]`, `[measure]`,
//! `[density]`, `[quadrature]`, `[solver]` and `[verify]` tables.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dual_orlicz::density::{Anisotropy, Claims, Density, DirectionalTable, RadialProfile, TailBounds};
use dual_orlicz::geom::{Dim, Direction, HPolytope, PolytopeRecord, StarBody};
use dual_orlicz::measures::DiscreteMeasure;
use dual_orlicz::quadrature::{make_rule, Scheme};
use dual_orlicz::solver::SolverConfig;
use dual_orlicz::verify::CheckKind;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub polytope: Option<PolytopeBlock>,
    pub body: Option<BodyBlock>,
    pub measure: Option<MeasureBlock>,
    pub density: Option<DensityBlock>,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub verify: VerifyBlock,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolytopeBlock {
    Explicit { normals: Vec<Vec<f64>>, supports: Vec<f64> },
    Regular { m: usize, #[serde(default = "one")] h: f64 },
    Cube { dim: usize, #[serde(default = "one")] h: f64 },
    CrossPolytope { dim: usize, #[serde(default = "one")] h: f64 },
    /// A `polytope.toml` written by `solve` or `export`.
    File { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodyBlock {
    Ball { dim: usize, #[serde(default = "one")] radius: f64 },
    Ellipsoid { axes: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureBlock {
    Explicit { directions: Vec<Vec<f64>>, weights: Vec<f64> },
    /// Planar atoms given by angle in radians.
    Angles { angles: Vec<f64>, weights: Vec<f64> },
    UniformCircle { m: usize },
}

#[derive(Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Phi2Block {
    Constant(f64),
    Table { directions: Vec<Vec<f64>>, values: Vec<f64> },
    NormPower { p: f64, exponent: f64 },
}

impl Default for Phi2Block {
    fn default() -> Self {
        Phi2Block::Constant(1.0)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailBlock {
    pub r1: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityBlock {
    /// `|x|^{q-n} φ₂(x/|x|)`.
    Power {
        q: f64,
        #[serde(default)]
        phi2: Phi2Block,
    },
    /// `a·exp(-|x|/s) φ₂(x/|x|)`.
    RadialExp {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        phi2: Phi2Block,
        tail: Option<TailBlock>,
        #[serde(default)]
        c2_claimed: bool,
        #[serde(default)]
        strictly_decreasing: bool,
    },
    /// `Σ cₖ|x|^{eₖ} φ₂(x/|x|)` with `terms = [[c, e], ...]`.
    RadialPowerSum {
        terms: Vec<[f64; 2]>,
        #[serde(default)]
        phi2: Phi2Block,
        tail: Option<TailBlock>,
        #[serde(default)]
        c2_claimed: bool,
        #[serde(default)]
        strictly_decreasing: bool,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureBlock {
    /// Gauss nodes per arc (planar arc scheme).
    pub gauss_order: Option<usize>,
    /// Use a fixed rule instead: `resolution` angles, or `resolution × 2·resolution` in space.
    pub resolution: Option<usize>,
    pub tail_rel_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub tol_kkt: Option<f64>,
    pub max_iters: Option<usize>,
    pub step_init: Option<f64>,
    pub backtrack_ratio: Option<f64>,
    pub max_backtracks: Option<usize>,
    pub constraint_tol: Option<f64>,
    pub multistart_count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    /// Check names; absent means every check applicable to the density.
    pub checks: Option<Vec<String>>,
}

fn one() -> f64 {
    1.0
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if let Some(PolytopeBlock::File { path }) = &cfg.polytope {
            let p = cfg.base.join(path);
            if !p.exists() {
                bail!("polytope file {} does not exist", p.display());
            }
        }
        Ok(cfg)
    }

    pub fn polytope(&self) -> Result<Option<HPolytope>> {
        let Some(block) = &self.polytope else { return Ok(None) };
        let p = match block {
            PolytopeBlock::Explicit { normals, supports } => {
                HPolytope::from_rows(normals, supports.clone())?
            }
            PolytopeBlock::Regular { m, h } => HPolytope::regular_polygon(*m, *h)?,
            PolytopeBlock::Cube { dim, h } => HPolytope::cube(Dim::from_usize(*dim)?, *h)?,
            PolytopeBlock::CrossPolytope { dim, h } => {
                HPolytope::cross_polytope(Dim::from_usize(*dim)?, *h)?
            }
            PolytopeBlock::File { path } => {
                let p = self.base.join(path);
                let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                let rec: PolytopeRecord =
                    toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
                rec.to_polytope()?
            }
        };
        Ok(Some(p))
    }

    pub fn body(&self) -> Result<Option<StarBody>> {
        Ok(match &self.body {
            None => None,
            Some(BodyBlock::Ball { dim, radius }) => Some(StarBody::ball(Dim::from_usize(*dim)?, *radius)?),
            Some(BodyBlock::Ellipsoid { axes }) => Some(StarBody::ellipsoid(axes)?),
        })
    }

    pub fn measure(&self) -> Result<Option<DiscreteMeasure>> {
        Ok(match &self.measure {
            None => None,
            Some(MeasureBlock::Explicit { directions, weights }) => {
                let dirs = directions
                    .iter()
                    .map(|c| Direction::new(c))
                    .collect::<dual_orlicz::Result<Vec<_>>>()?;
                Some(DiscreteMeasure::new(dirs, weights.clone())?)
            }
            Some(MeasureBlock::Angles { angles, weights }) => {
                let dirs = angles.iter().map(|&t| Direction::from_angle(t)).collect();
                Some(DiscreteMeasure::new(dirs, weights.clone())?)
            }
            Some(MeasureBlock::UniformCircle { m }) => Some(DiscreteMeasure::uniform_circle(*m)?),
        })
    }

    pub fn density(&self, dim: Dim) -> Result<Density> {
        let block = self
            .density
            .as_ref()
            .ok_or_else(|| anyhow!("missing [density] block"))?;
        let d = match block {
            DensityBlock::Power { q, phi2 } => Density::power_law(dim, *q, anisotropy(phi2, dim)?)?,
            DensityBlock::RadialExp {
                amplitude,
                scale,
                phi2,
                tail,
                c2_claimed,
                strictly_decreasing,
            } => Density::radial(
                dim,
                RadialProfile::Exp {
                    amplitude: *amplitude,
                    scale: *scale,
                },
                anisotropy(phi2, dim)?,
                tail_bounds(tail.as_ref())?,
                Claims {
                    c2_claimed: *c2_claimed,
                    strictly_decreasing_phixn: *strictly_decreasing,
                },
            )?,
            DensityBlock::RadialPowerSum {
                terms,
                phi2,
                tail,
                c2_claimed,
                strictly_decreasing,
            } => Density::radial(
                dim,
                RadialProfile::Monomials(terms.iter().map(|[c, e]| (*c, *e)).collect()),
                anisotropy(phi2, dim)?,
                tail_bounds(tail.as_ref())?,
                Claims {
                    c2_claimed: *c2_claimed,
                    strictly_decreasing_phixn: *strictly_decreasing,
                },
            )?,
        };
        Ok(match self.quadrature.tail_rel_tol {
            Some(t) => d.with_tail_tolerance(t),
            None => d,
        })
    }

    pub fn scheme(&self, dim: Dim) -> Result<Scheme> {
        let q = &self.quadrature;
        Ok(match (q.resolution, dim) {
            (Some(r), _) => Scheme::Grid(make_rule(dim.n(), r)?),
            (None, Dim::Two) => match q.gauss_order {
                Some(0) => bail!("gauss_order must be positive"),
                Some(g) => Scheme::Arcs { gauss_order: g },
                None => Scheme::default_for(dim),
            },
            (None, Dim::Three) => Scheme::default_for(dim),
        })
    }

    pub fn solver(&self, dim: Dim) -> Result<SolverConfig> {
        let s = &self.solver;
        let mut c = SolverConfig::default_for(dim);
        c.tol_kkt = s.tol_kkt.unwrap_or(c.tol_kkt);
        c.max_iters = s.max_iters.unwrap_or(c.max_iters);
        c.step_init = s.step_init.unwrap_or(c.step_init);
        c.backtrack_ratio = s.backtrack_ratio.unwrap_or(c.backtrack_ratio);
        c.max_backtracks = s.max_backtracks.unwrap_or(c.max_backtracks);
        c.constraint_tol = s.constraint_tol.unwrap_or(c.constraint_tol);
        c.multistart_count = s.multistart_count.unwrap_or(c.multistart_count);
        c.seed = self.seed.unwrap_or(c.seed);
        c.scheme = self.scheme(dim)?;
        c.validate()?;
        Ok(c)
    }

    pub fn checks(&self, d: &Density) -> Result<Vec<CheckKind>> {
        match &self.verify.checks {
            Some(names) => names
                .iter()
                .map(|n| {
                    let k = CheckKind::parse(n)?;
                    if k.needs_power_law() && d.homogeneity().is_none() {
                        bail!("check '{n}' needs a power-law density");
                    }
                    Ok(k)
                })
                .collect(),
            None => Ok(CheckKind::ALL
                .into_iter()
                .filter(|k| d.homogeneity().is_some() || !k.needs_power_law())
                .collect()),
        }
    }
}

fn anisotropy(b: &Phi2Block, dim: Dim) -> Result<Anisotropy> {
    Ok(match b {
        Phi2Block::Constant(c) => Anisotropy::Constant(*c),
        Phi2Block::NormPower { p, exponent } => Anisotropy::NormPower {
            p: *p,
            exponent: *exponent,
        },
        Phi2Block::Table { directions, values } => {
            let dirs = directions
                .iter()
                .map(|c| {
                    if c.len() != dim.n() {
                        bail!("phi2 table direction has {} coordinates, expected {}", c.len(), dim.n());
                    }
                    Ok(Direction::new(c)?)
                })
                .collect::<Result<Vec<_>>>()?;
            Anisotropy::Table(DirectionalTable::new(dirs, values.clone())?)
        }
    })
}

fn tail_bounds(t: Option<&TailBlock>) -> Result<Option<TailBounds>> {
    t.map(|t| TailBounds::new(t.r1, t.c1, t.c2, t.alpha1, t.alpha2).map_err(Into::into))
        .transpose()
}

impl RunConfig {
    /// Rule for star bodies: `resolution` if given, else 1024 angles or 64 × 128.
    pub fn star_rule(&self, dim: Dim) -> Result<dual_orlicz::quadrature::SphericalRule> {
        let r = match (self.quadrature.resolution, dim) {
            (Some(r), _) => r,
            (None, Dim::Two) => 1024,
            (None, Dim::Three) => 64,
        };
        Ok(make_rule(dim.n(), r)?)
    }
}
