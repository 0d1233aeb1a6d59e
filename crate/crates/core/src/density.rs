//! Weight functions `φ` on `ℝⁿ \ {o}` and their radial tails
//! `Φ(t, u) = ∫_t^∞ φ(ru) r^{n-1} dr`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Dim, Direction};
use crate::par::Accumulator;
use crate::quadrature::{gauss_legendre, gauss_on, SphericalRule};

pub type DirFn = Arc<dyn Fn(&Direction) -> f64 + Send + Sync>;
pub type RayFn = Arc<dyn Fn(f64, &Direction) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default relative tolerance of numerically evaluated tails.
pub const DEFAULT_TAIL_REL_TOL: f64 = 1e-12;

/// Constants of the sufficient growth condition
/// `sup_{|x|>r₁} φ|x|^{n-α₁-1} ≤ C₁` and `inf_{|x|<r₁} φ|x|^{n-α₂-1} ≥ C₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    pub r1: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl TailBounds {
    pub fn new(r1: f64, c1: f64, c2: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        let b = Self {
            r1,
            c1,
            c2,
            alpha1,
            alpha2,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0 && self.r1.is_finite()) {
            return Err(Error::InvalidDensity(format!("r1 = {} must be positive", self.r1)));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite() && self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(Error::InvalidDensity("C1 and C2 must be positive and finite".into()));
        }
        if !(self.alpha1 < -1.0 && self.alpha2 < -1.0) {
            return Err(Error::InvalidDensity(format!(
                "alpha1 = {}, alpha2 = {} must both be < -1",
                self.alpha1, self.alpha2
            )));
        }
        Ok(())
    }

    /// `C₁ ∫_T^∞ r^{α₁} dr`, valid for `T ≥ r₁`.
    pub fn remainder(&self, t: f64) -> f64 {
        self.c1 * t.powf(self.alpha1 + 1.0) / (-self.alpha1 - 1.0)
    }
}

/// Directional factor `φ₂` of a separable density `ψ(|x|) φ₂(x/|x|)`.
#[derive(Clone)]
pub enum Anisotropy {
    Constant(f64),
    /// `‖u‖_p^exponent` for an `ℓ_p` norm.
    NormPower { p: f64, exponent: f64 },
    /// Values tabulated at directions; linear in angle (2-D) or
    /// kernel-smoothed (3-D) in between.
    Table(DirectionalTable),
    Custom(DirFn),
}

impl fmt::Debug for Anisotropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anisotropy::Constant(c) => write!(f, "Constant({c})"),
            Anisotropy::NormPower { p, exponent } => write!(f, "NormPower(p={p}, exp={exponent})"),
            Anisotropy::Table(t) => write!(f, "Table({} entries)", t.values.len()),
            Anisotropy::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Anisotropy {
    pub fn eval(&self, u: &Direction) -> f64 {
        match self {
            Anisotropy::Constant(c) => *c,
            Anisotropy::NormPower { p, exponent } => {
                let norm = if p.is_infinite() {
                    u.coords().iter().fold(0.0f64, |m, c| m.max(c.abs()))
                } else {
                    u.coords().iter().map(|c| c.abs().powf(*p)).sum::<f64>().powf(1.0 / p)
                };
                norm.powf(*exponent)
            }
            Anisotropy::Table(t) => t.eval(u),
            Anisotropy::Custom(f) => f(u),
        }
    }

    /// Sampled `(min, max)` over the sphere; exact for constants.
    pub fn range(&self, dim: Dim) -> (f64, f64) {
        if let Anisotropy::Constant(c) = self {
            return (*c, *c);
        }
        let rule = match dim {
            Dim::Two => SphericalRule::circle(4096),
            Dim::Three => SphericalRule::product(64, 128),
        }
        .expect("fixed positive resolution");
        rule.nodes()
            .iter()
            .map(|u| self.eval(u))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

/// Tabulated directional values.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalTable {
    directions: Vec<Direction>,
    values: Vec<f64>,
    /// Kernel concentration for the 3-D smoother.
    sharpness: f64,
}

impl DirectionalTable {
    pub fn new(directions: Vec<Direction>, values: Vec<f64>) -> Result<Self> {
        if directions.is_empty() || directions.len() != values.len() {
            return Err(Error::InvalidDensity(
                "table needs matching, nonempty directions and values".into(),
            ));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidDensity("table values must be positive".into()));
        }
        let dim = directions[0].dim();
        if directions.iter().any(|d| d.dim() != dim) {
            return Err(Error::InvalidDensity("table directions mix dimensions".into()));
        }
        let (mut directions, mut values) = (directions, values);
        if dim == Dim::Two {
            let mut order: Vec<usize> = (0..directions.len()).collect();
            order.sort_by(|&a, &b| directions[a].angle().total_cmp(&directions[b].angle()));
            directions = order.iter().map(|&i| directions[i]).collect();
            values = order.iter().map(|&i| values[i]).collect();
        }
        let sharpness = 4.0 * (directions.len() as f64).max(1.0);
        Ok(Self {
            directions,
            values,
            sharpness,
        })
    }

    pub fn eval(&self, u: &Direction) -> f64 {
        let k = self.values.len();
        if k == 1 {
            return self.values[0];
        }
        match u.dim() {
            Dim::Two => {
                let t = u.angle();
                let angle = |i: usize| self.directions[i].angle();
                let upper = (0..k).find(|&i| angle(i) >= t).unwrap_or(k);
                let (lo, hi) = if upper == 0 || upper == k {
                    (k - 1, 0)
                } else {
                    (upper - 1, upper)
                };
                let (mut a, mut b) = (angle(lo), angle(hi));
                let mut tt = t;
                if b <= a {
                    b += 2.0 * std::f64::consts::PI;
                    if tt < a {
                        tt += 2.0 * std::f64::consts::PI;
                    }
                }
                if b - a <= 0.0 {
                    a = b - 1.0;
                }
                let s = ((tt - a) / (b - a)).clamp(0.0, 1.0);
                self.values[lo] * (1.0 - s) + self.values[hi] * s
            }
            Dim::Three => {
                let (mut num, mut den) = (0.0, 0.0);
                for (d, v) in self.directions.iter().zip(&self.values) {
                    let w = (self.sharpness * (u.dot(d) - 1.0)).exp();
                    num += w * v;
                    den += w;
                }
                num / den
            }
        }
    }
}

/// Radial profile `ψ(r)`.
#[derive(Clone)]
pub enum RadialProfile {
    /// `A e^{-r/s}`.
    Exp { amplitude: f64, scale: f64 },
    /// `Σ aₖ r^{eₖ}`.
    Monomials(Vec<(f64, f64)>),
    Custom(ScalarFn),
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Exp { amplitude, scale } => write!(f, "Exp({amplitude}, {scale})"),
            RadialProfile::Monomials(t) => write!(f, "Monomials({t:?})"),
            RadialProfile::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Exp { amplitude, scale } => amplitude * (-r / scale).exp(),
            RadialProfile::Monomials(terms) => terms.iter().map(|(a, e)| a * r.powf(*e)).sum(),
            RadialProfile::Custom(f) => f(r),
        }
    }

    /// Growth constants derivable in closed form for the built-in profiles.
    pub fn default_bounds(&self, dim: Dim) -> Option<TailBounds> {
        let n = dim.n() as f64;
        match self {
            RadialProfile::Exp { amplitude, scale } => {
                let (r1, alpha1, alpha2) = (1.0, -2.0, -2.0);
                let power = n - 1.0 - alpha1;
                let peak = (scale * power).max(r1);
                let c1 = amplitude * (-peak / scale).exp() * peak.powf(power);
                // The lower bound cannot hold near the origin; C₂ = 1 is a claim
                // that `verify_c1_bounds` will reject.
                Some(TailBounds {
                    r1,
                    c1,
                    c2: 1.0,
                    alpha1,
                    alpha2,
                })
            }
            RadialProfile::Monomials(terms) => {
                let qs: Vec<f64> = terms.iter().map(|(_, e)| e + n).collect();
                let qmax = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let qmin = qs.iter().copied().fold(f64::INFINITY, f64::min);
                if !(qmax < 0.0) || terms.iter().any(|(a, _)| !(*a > 0.0)) {
                    return None;
                }
                let r1: f64 = 1.0;
                let c1 = terms
                    .iter()
                    .zip(&qs)
                    .map(|((a, _), q)| a * r1.powf(q - qmax))
                    .sum();
                let c2 = terms
                    .iter()
                    .zip(&qs)
                    .filter(|(_, q)| **q == qmin)
                    .map(|((a, _), _)| a)
                    .sum();
                Some(TailBounds {
                    r1,
                    c1,
                    c2,
                    alpha1: qmax - 1.0,
                    alpha2: qmin - 1.0,
                })
            }
            RadialProfile::Custom(_) => None,
        }
    }
}

/// Which of the structural conditions the caller asserts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    /// Divergence of the cone quermassintegral as the cone apex shrinks.
    pub c2_claimed: bool,
    /// `φ(x)|x|ⁿ` strictly decreasing along every ray.
    pub strictly_decreasing_phixn: bool,
}

#[derive(Clone)]
pub enum DensityKind {
    /// `φ(x) = |x|^{q-n} φ₂(x/|x|)`, `q < 0`.
    PowerLaw { q: f64, phi2: Anisotropy },
    /// `φ(x) = ψ(|x|) φ₂(x/|x|)`.
    Radial {
        psi: RadialProfile,
        phi2: Anisotropy,
        tail: TailBounds,
    },
    /// Arbitrary `φ(t u)` given as `(t, u) ↦ value`.
    General { phi: RayFn, tail: Option<TailBounds> },
}

impl fmt::Debug for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityKind::PowerLaw { q, phi2 } => write!(f, "PowerLaw(q={q}, phi2={phi2:?})"),
            DensityKind::Radial { psi, phi2, tail } => {
                write!(f, "Radial(psi={psi:?}, phi2={phi2:?}, tail={tail:?})")
            }
            DensityKind::General { tail, .. } => write!(f, "General(tail={tail:?})"),
        }
    }
}

/// The weight `φ` together with its declared regularity.
#[derive(Clone, Debug)]
pub struct Density {
    dim: Dim,
    kind: DensityKind,
    claims: Claims,
    rel_tol: f64,
    /// Outcome of the construction-time spot check of the decreasing claim.
    decreasing_spot_check: Option<bool>,
}

impl Density {
    /// `φ(x) = |x|^{q-n} φ₂(x/|x|)` with `q < 0`. Claims C2 and strict decrease.
    pub fn power_law(dim: Dim, q: f64, phi2: Anisotropy) -> Result<Self> {
        if !(q < 0.0 && q.is_finite()) {
            return Err(Error::InvalidDensity(format!("power law needs q < 0, got {q}")));
        }
        check_anisotropy(dim, &phi2)?;
        Self::build(
            dim,
            DensityKind::PowerLaw { q, phi2 },
            Claims {
                c2_claimed: true,
                strictly_decreasing_phixn: true,
            },
        )
    }

    /// `φ(x) = ψ(|x|) φ₂(x/|x|)`; `tail` defaults to the profile's closed-form bounds.
    pub fn radial(
        dim: Dim,
        psi: RadialProfile,
        phi2: Anisotropy,
        tail: Option<TailBounds>,
        claims: Claims,
    ) -> Result<Self> {
        check_anisotropy(dim, &phi2)?;
        let tail = match tail.or_else(|| psi.default_bounds(dim)) {
            Some(t) => t,
            None => {
                return Err(Error::TailNotIntegrable(
                    "radial profile needs explicit tail bounds".into(),
                ))
            }
        };
        tail.validate()?;
        // Fold the directional factor into the bounds.
        let (lo, hi) = phi2.range(dim);
        let tail = TailBounds {
            c1: tail.c1 * hi,
            c2: tail.c2 * lo,
            ..tail
        };
        Self::build(dim, DensityKind::Radial { psi, phi2, tail }, claims)
    }

    pub fn general(dim: Dim, phi: RayFn, tail: Option<TailBounds>, claims: Claims) -> Result<Self> {
        if let Some(t) = &tail {
            t.validate()?;
        }
        Self::build(dim, DensityKind::General { phi, tail }, claims)
    }

    fn build(dim: Dim, kind: DensityKind, claims: Claims) -> Result<Self> {
        let mut d = Self {
            dim,
            kind,
            claims,
            rel_tol: DEFAULT_TAIL_REL_TOL,
            decreasing_spot_check: None,
        };
        d.check_positive()?;
        if claims.strictly_decreasing_phixn {
            let ok = d.spot_check_decreasing();
            if !ok {
                warn!("density claims φ(x)|x|^n strictly decreasing, but the spot check failed");
            }
            d.decreasing_spot_check = Some(ok);
        }
        Ok(d)
    }

    /// Overrides the relative tolerance of numerically evaluated tails.
    pub fn with_tail_tolerance(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn claims(&self) -> Claims {
        self.claims
    }

    pub fn decreasing_spot_check(&self) -> Option<bool> {
        self.decreasing_spot_check
    }

    /// Homogeneity degree `q` for power laws.
    pub fn homogeneity(&self) -> Option<f64> {
        match &self.kind {
            DensityKind::PowerLaw { q, .. } => Some(*q),
            _ => None,
        }
    }

    /// Growth constants; derived for power laws, declared otherwise.
    pub fn tail_bounds(&self) -> Option<TailBounds> {
        match &self.kind {
            DensityKind::PowerLaw { q, phi2 } => {
                let (lo, hi) = phi2.range(self.dim);
                Some(TailBounds {
                    r1: 1.0,
                    c1: hi,
                    c2: lo,
                    alpha1: q - 1.0,
                    alpha2: q - 1.0,
                })
            }
            DensityKind::Radial { tail, .. } => Some(*tail),
            DensityKind::General { tail, .. } => *tail,
        }
    }

    /// `φ(t u)`.
    pub fn phi(&self, t: f64, u: &Direction) -> f64 {
        match &self.kind {
            DensityKind::PowerLaw { q, phi2 } => t.powf(q - self.dim.n() as f64) * phi2.eval(u),
            DensityKind::Radial { psi, phi2, .. } => psi.eval(t) * phi2.eval(u),
            DensityKind::General { phi, .. } => phi(t, u),
        }
    }

    /// Curvature density `φ(ρu) ρⁿ`.
    pub fn curvature_density(&self, rho: f64, u: &Direction) -> f64 {
        match &self.kind {
            DensityKind::PowerLaw { q, phi2 } => rho.powf(*q) * phi2.eval(u),
            _ => self.phi(rho, u) * rho.powi(self.dim.n() as i32),
        }
    }

    /// `Φ(t, u) = ∫_t^∞ φ(ru) r^{n-1} dr`.
    ///
    /// Closed form `φ₂(u)(-t^q/q)` for power laws; otherwise dyadic adaptive
    /// Gauss-Legendre on `[t, T]` with `T` doubled until the analytic
    /// remainder bound falls under the relative tolerance.
    pub fn tail_integral(&self, t: f64, u: &Direction) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("tail integral needs t > 0, got {t}")));
        }
        match &self.kind {
            DensityKind::PowerLaw { q, phi2 } => Ok(phi2.eval(u) * (-t.powf(*q) / q)),
            DensityKind::Radial { tail, .. } => self.tail_integral_numeric(t, u, tail),
            DensityKind::General { tail, .. } => match tail {
                Some(b) => self.tail_integral_numeric(t, u, b),
                None => Err(Error::TailNotIntegrable(
                    "general density without tail bounds".into(),
                )),
            },
        }
    }

    /// Numerical tail for any kind, using the supplied growth bounds.
    pub fn tail_integral_numeric(&self, t: f64, u: &Direction, bounds: &TailBounds) -> Result<f64> {
        let n1 = self.dim.n() as i32 - 1;
        numeric_tail(|r| self.phi(r, u) * r.powi(n1), t, bounds, self.rel_tol)
    }

    fn check_positive(&self) -> Result<()> {
        for u in spot_rays(self.dim) {
            for r in [1e-3, 0.1, 1.0, 10.0, 1e3] {
                let v = self.phi(r, &u);
                // Far-field values may underflow to zero.
                let ok = v.is_finite() && (v > 0.0 || (v == 0.0 && r > 1.0));
                if !ok {
                    return Err(Error::InvalidDensity(format!(
                        "phi({r} u) = {v} at u = {:?}",
                        u.coords()
                    )));
                }
            }
        }
        Ok(())
    }

    /// 32 rays × 64 log-spaced radii in `[1e-3, 1e3]`.
    fn spot_check_decreasing(&self) -> bool {
        let n = self.dim.n() as i32;
        spot_rays(self.dim).iter().all(|u| {
            let vals: Vec<f64> = (0..64)
                .map(|k| {
                    let r = 10f64.powf(-3.0 + 6.0 * k as f64 / 63.0);
                    self.phi(r, u) * r.powi(n)
                })
                .collect();
            vals.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
        })
    }
}

fn check_anisotropy(dim: Dim, phi2: &Anisotropy) -> Result<()> {
    let (lo, hi) = phi2.range(dim);
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(Error::InvalidDensity(format!(
            "directional factor must be positive and finite (range [{lo}, {hi}])"
        )));
    }
    Ok(())
}

fn spot_rays(dim: Dim) -> Vec<Direction> {
    match dim {
        Dim::Two => SphericalRule::circle(32),
        Dim::Three => SphericalRule::product(4, 8),
    }
    .expect("fixed positive resolution")
    .nodes()
    .to_vec()
}

struct GaussPair {
    low: (Vec<f64>, Vec<f64>),
    high: (Vec<f64>, Vec<f64>),
}

fn gauss_pair() -> &'static GaussPair {
    static PAIR: OnceLock<GaussPair> = OnceLock::new();
    PAIR.get_or_init(|| GaussPair {
        low: gauss_legendre(10),
        high: gauss_legendre(20),
    })
}

fn apply(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    half * rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> Result<f64> {
    let pair = gauss_pair();
    let coarse = apply(&pair.low, a, b, f);
    let fine = apply(&pair.high, a, b, f);
    if (fine - coarse).abs() <= (rel_tol * fine.abs()).max(abs_tol) {
        return Ok(fine);
    }
    if depth == 0 {
        return Err(Error::ToleranceNotMet(format!(
            "adaptive quadrature on [{a}, {b}] did not converge"
        )));
    }
    let m = 0.5 * (a + b);
    Ok(adaptive(f, a, m, rel_tol, 0.5 * abs_tol, depth - 1)?
        + adaptive(f, m, b, rel_tol, 0.5 * abs_tol, depth - 1)?)
}

/// `∫_t^∞ f` over dyadic panels `[t 2ᵏ, t 2ᵏ⁺¹]` until `C₁ T^{α₁+1}/(-α₁-1)`
/// (for `T ≥ r₁`) drops below `rel_tol` times the partial sum.
pub fn numeric_tail(
    f: impl Fn(f64) -> f64,
    t: f64,
    bounds: &TailBounds,
    rel_tol: f64,
) -> Result<f64> {
    const MAX_PANELS: usize = 4000;
    let mut acc = Accumulator::new();
    let mut a = t;
    for _ in 0..MAX_PANELS {
        let b = 2.0 * a;
        // Panels negligible against the partial sum need no relative accuracy.
        let floor = 1e-3 * rel_tol * acc.value().abs();
        acc.add(adaptive(&f, a, b, rel_tol * 0.1, floor, 30)?);
        a = b;
        if a >= bounds.r1 && bounds.remainder(a) <= rel_tol * acc.value() {
            return Ok(acc.value());
        }
    }
    Err(Error::ToleranceNotMet(format!(
        "tail remainder still above tolerance after {MAX_PANELS} panels"
    )))
}

/// Outcome of sampling the growth condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub samples: usize,
    /// Largest sampled `φ|x|^{n-α₁-1}` with `|x| > r₁` (`None` without samples).
    pub sup_value: Option<f64>,
    /// Smallest sampled `φ|x|^{n-α₂-1}` with `|x| < r₁`.
    pub inf_value: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    pub sup_ok: bool,
    pub inf_ok: bool,
}

impl GrowthReport {
    pub fn passed(&self) -> bool {
        self.sup_ok && self.inf_ok
    }
}

/// Samples both sides of the growth condition on 32 rays with `samples`
/// log-spaced radii per side (`(r₁, 10⁴r₁]` and `[10⁻⁴r₁, r₁)`).
pub fn verify_c1_bounds(d: &Density, samples: usize) -> Result<GrowthReport> {
    let b = d.tail_bounds().ok_or_else(|| {
        Error::TailNotIntegrable("density has no tail bounds to verify".into())
    })?;
    let n = d.dim().n() as f64;
    let rays = spot_rays(d.dim());
    let mut sup_value: Option<f64> = None;
    let mut inf_value: Option<f64> = None;
    for k in 0..samples {
        let frac = (k as f64 + 1.0) / samples as f64;
        let outer = b.r1 * 10f64.powf(4.0 * frac);
        let inner = b.r1 * 10f64.powf(-4.0 * frac);
        for u in &rays {
            let s = d.phi(outer, u) * outer.powf(n - b.alpha1 - 1.0);
            let i = d.phi(inner, u) * inner.powf(n - b.alpha2 - 1.0);
            sup_value = Some(sup_value.map_or(s, |v| v.max(s)));
            inf_value = Some(inf_value.map_or(i, |v| v.min(i)));
        }
    }
    let slack = 1e-12;
    Ok(GrowthReport {
        samples,
        sup_value,
        inf_value,
        c1: b.c1,
        c2: b.c2,
        sup_ok: sup_value.is_none_or(|v| v <= b.c1 * (1.0 + slack)),
        inf_ok: inf_value.is_none_or(|v| v >= b.c2 * (1.0 - slack)),
    })
}

/// `∫_{⟨u,u₀⟩ ≥ b₀} Φ(a, u) du` for each `a`: the complement quermassintegral
/// of the cone `{⟨x̄, u₀⟩ ≥ b₀, |x| ≥ a}`. Divergence as `a → 0⁺` is the
/// second structural condition.
pub fn c2_probe(d: &Density, u0: &Direction, b0: f64, a_sequence: &[f64]) -> Result<Vec<f64>> {
    if u0.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim().n(),
            found: u0.dim().n(),
        });
    }
    if !(b0 > 0.0 && b0 < 1.0) {
        return Err(Error::InvalidInput(format!("b0 = {b0} must lie in (0, 1)")));
    }
    if a_sequence.iter().any(|a| !(*a > 0.0)) || a_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput(
            "a_sequence must be positive and strictly decreasing".into(),
        ));
    }
    let half = b0.acos();
    let cap: Vec<(Direction, f64)> = match d.dim() {
        Dim::Two => {
            let centre = u0.angle();
            let panels = 8;
            let width = 2.0 * half / panels as f64;
            (0..panels)
                .flat_map(|p| {
                    let a = centre - half + p as f64 * width;
                    gauss_on(a, a + width, 16).collect::<Vec<_>>()
                })
                .map(|(t, w)| (Direction::from_angle(t), w))
                .collect()
        }
        Dim::Three => {
            let (e1, e2) = crate::geom::orthonormal_basis(u0.vector());
            let az = 64;
            let h = 2.0 * std::f64::consts::PI / az as f64;
            let mut out = Vec::new();
            for (c, w) in gauss_on(b0, 1.0, 32) {
                let s = (1.0 - c * c).max(0.0).sqrt();
                for j in 0..az {
                    let phi = h * (j as f64 + 0.5);
                    let v = u0.vector() * c + (e1 * phi.cos() + e2 * phi.sin()) * s;
                    out.push((Direction::from_vector(v, Dim::Three)?, w * h));
                }
            }
            out
        }
    };
    a_sequence
        .iter()
        .map(|&a| {
            let mut acc = Accumulator::new();
            for (u, w) in &cap {
                acc.add(w * d.tail_integral(a, u)?);
            }
            Ok(acc.value())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_1_SQRT_2, PI};

    fn power(dim: Dim, q: f64) -> Density {
        Density::power_law(dim, q, Anisotropy::Constant(1.0)).unwrap()
    }

    fn exp_density() -> Density {
        Density::radial(
            Dim::Two,
            RadialProfile::Exp {
                amplitude: 1.0,
                scale: 1.0,
            },
            Anisotropy::Constant(1.0),
            None,
            Claims::default(),
        )
        .unwrap()
    }

    #[test]
    fn tail_integral_examples() {
        let u = Direction::from_angle(0.3);
        assert!((power(Dim::Two, -1.0).tail_integral(2.0, &u).unwrap() - 0.5).abs() < 1e-15);
        for dim in [Dim::Two, Dim::Three] {
            let u = Direction::axis(dim, 0);
            assert_eq!(power(dim, -1.0).tail_integral(1.0, &u).unwrap(), 1.0);
        }
        // ∫_1^∞ e^{-r} r dr = 2/e.
        let v = exp_density().tail_integral(1.0, &u).unwrap();
        assert!((v - 2.0 / E).abs() < 1e-10 * 2.0 / E, "{v}");
    }

    #[test]
    fn power_law_closed_form_matches_numeric() {
        for dim in [Dim::Two, Dim::Three] {
            for q in [-0.5, -1.0, -2.0, -3.5] {
                let aniso = Anisotropy::NormPower {
                    p: 3.0,
                    exponent: q - dim.n() as f64,
                };
                let d = Density::power_law(dim, q, aniso).unwrap();
                let b = d.tail_bounds().unwrap();
                for t in [0.01, 0.3, 1.0, 7.0] {
                    for u in spot_rays(dim).iter().step_by(5) {
                        let exact = d.tail_integral(t, u).unwrap();
                        let num = d.tail_integral_numeric(t, u, &b).unwrap();
                        assert!((exact - num).abs() <= 1e-9 * exact, "q={q} t={t}");
                    }
                }
            }
        }
    }

    #[test]
    fn power_law_homogeneity_is_exact() {
        let d = power(Dim::Three, -1.5);
        let u = Direction::new(&[1.0, 2.0, 3.0]).unwrap();
        for (t, lam) in [(0.7, 2.0), (1.3, 0.25), (3.0, 10.0)] {
            let lhs = d.tail_integral(lam * t, &u).unwrap();
            let rhs = lam.powf(-1.5) * d.tail_integral(t, &u).unwrap();
            assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs);
        }
    }

    #[test]
    fn rejects_invalid_power_law() {
        assert!(Density::power_law(Dim::Two, 0.5, Anisotropy::Constant(1.0)).is_err());
        assert!(Density::power_law(Dim::Two, -1.0, Anisotropy::Constant(-1.0)).is_err());
        assert!(TailBounds::new(1.0, 1.0, 1.0, -0.5, -2.0).is_err());
    }

    #[test]
    fn general_density_without_bounds_is_not_integrable() {
        let d = Density::general(Dim::Two, Arc::new(|t, _| t.powi(-3)), None, Claims::default())
            .unwrap();
        assert!(matches!(
            d.tail_integral(1.0, &Direction::from_angle(0.0)),
            Err(Error::TailNotIntegrable(_))
        ));
    }

    #[test]
    fn growth_report_examples() {
        let d = power(Dim::Two, -1.0);
        let r = verify_c1_bounds(&d, 16).unwrap();
        assert!(r.passed());
        assert!((r.sup_value.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.inf_value.unwrap() - 1.0).abs() < 1e-12);
        let e = verify_c1_bounds(&exp_density(), 16).unwrap();
        assert!(e.sup_ok && !e.inf_ok);
        let empty = verify_c1_bounds(&d, 0).unwrap();
        assert!(empty.passed() && empty.sup_value.is_none());
    }

    #[test]
    fn c2_probe_examples() {
        let d = power(Dim::Two, -1.0);
        let u0 = Direction::from_angle(0.4);
        let v = c2_probe(&d, &u0, FRAC_1_SQRT_2, &[1.0, 0.1, 0.01]).unwrap();
        for (got, want) in v.iter().zip([PI / 2.0, 5.0 * PI, 50.0 * PI]) {
            assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
        }
        // Φ(0⁺, u) = 1 for ψ = e^{-r}: the cap integral stays bounded by π/2.
        let e = c2_probe(&exp_density(), &u0, FRAC_1_SQRT_2, &[1.0, 1e-2, 1e-4, 1e-6]).unwrap();
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        assert!((e[3] - PI / 2.0).abs() < 1e-5);
        let thin = c2_probe(&d, &u0, 1.0 - 1e-12, &[1.0]).unwrap();
        assert!(thin[0] < 1e-5);
        assert!(c2_probe(&d, &u0, 0.5, &[0.1, 1.0]).is_err());
    }

    #[test]
    fn c2_probe_sphere_cap() {
        // Cap area 2π(1 - b₀), Φ(a) = 1/a for q = -1.
        let d = power(Dim::Three, -1.0);
        let u0 = Direction::new(&[0.2, -0.3, 0.9]).unwrap();
        let v = c2_probe(&d, &u0, 0.5, &[2.0, 0.5]).unwrap();
        assert!((v[0] - PI / 2.0).abs() < 1e-10);
        assert!((v[1] - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn decreasing_spot_check() {
        assert_eq!(power(Dim::Two, -1.0).decreasing_spot_check(), Some(true));
        let bad = Density::radial(
            Dim::Two,
            RadialProfile::Exp {
                amplitude: 1.0,
                scale: 1.0,
            },
            Anisotropy::Constant(1.0),
            None,
            Claims {
                c2_claimed: false,
                strictly_decreasing_phixn: true,
            },
        )
        .unwrap();
        // e^{-r} r² increases on (0, 2).
        assert_eq!(bad.decreasing_spot_check(), Some(false));
    }

    #[test]
    fn table_interpolates_in_angle() {
        let t = DirectionalTable::new(
            vec![Direction::from_angle(0.0), Direction::from_angle(PI)],
            vec![1.0, 3.0],
        )
        .unwrap();
        assert!((t.eval(&Direction::from_angle(PI / 2.0)) - 2.0).abs() < 1e-12);
        assert!((t.eval(&Direction::from_angle(3.0 * PI / 2.0)) - 2.0).abs() < 1e-12);
        assert!((t.eval(&Direction::from_angle(0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monomial_bounds_hold() {
        let psi = RadialProfile::Monomials(vec![(1.0, -3.0), (0.5, -4.0)]);
        let d = Density::radial(
            Dim::Two,
            psi,
            Anisotropy::Constant(1.0),
            None,
            Claims {
                c2_claimed: true,
                strictly_decreasing_phixn: true,
            },
        )
        .unwrap();
        assert!(verify_c1_bounds(&d, 32).unwrap().passed());
        assert_eq!(d.decreasing_spot_check(), Some(true));
        // Closed form: Σ aₖ t^{qₖ}/(-qₖ) with qₖ = eₖ + 2.
        let u = Direction::from_angle(1.0);
        let exact = 1.0 * 0.8f64.powf(-1.0) / 1.0 + 0.5 * 0.8f64.powf(-2.0) / 2.0;
        assert!((d.tail_integral(0.8, &u).unwrap() - exact).abs() < 1e-10 * exact);
    }
}
