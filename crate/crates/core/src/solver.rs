//! Discrete dual Orlicz-Minkowski problem: given `μ = Σ λᵢ δ_{uᵢ}`, find a
//! polytope `P` with normals `uᵢ` and `τ > 0` such that `μ = τ C̃(P, ·)`.
//!
//! The solver maximizes `F(h) = -(1/|μ|) Σ λᵢ log hᵢ` subject to
//! `V_φ([h]) = |μ|`. Since the constraint set is reached by dilation alone,
//! the problem is reduced to an unconstrained one in `x = log h`:
//! `G(x) = F(proj(x))`, whose gradient is `C̃ᵢ/C̃_total - λᵢ/|μ|`.

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::geom::{hausdorff_distance, min_positive_part, Direction, HPolytope};
use crate::measures::{node_values, reduce_nodes, CurvatureResult, DiscreteMeasure};
use crate::par;
use crate::quadrature::{hausdorff_grid, Scheme};

/// Relative mass below which a facet counts as dead. Steps may drop a facet;
/// its gradient entry `-λᵢ/|μ|` then pulls it back, and a facet still dead at
/// the end shows up in the residual.
pub const FACET_DEATH_REL: f64 = 1e-14;
/// Relative threshold of the not-concentrated test.
pub const CONCENTRATION_REL: f64 = 1e-10;
const ARMIJO: f64 = 1e-4;
const ROUNDING_SLACK: f64 = 1e-13;
const WOLFE_DELTA: f64 = 0.1;
/// Iterations without a new best residual or objective gain before the solver gives up.
const STALL_ITERS: usize = 50;
const PROGRESS_REL: f64 = 1e-9;
const BRACKET_BUDGET: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol_kkt: f64,
    pub max_iters: usize,
    /// First trial step; later steps are Barzilai-Borwein.
    pub step_init: f64,
    pub backtrack_ratio: f64,
    pub max_backtracks: usize,
    /// Relative accuracy of the `V_φ = |μ|` constraint.
    pub constraint_tol: f64,
    pub multistart_count: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SolverConfig {
    pub fn default_for(dim: crate::geom::Dim) -> Self {
        Self {
            tol_kkt: 1e-8,
            max_iters: 500,
            step_init: 1.0,
            backtrack_ratio: 0.5,
            max_backtracks: 60,
            constraint_tol: 1e-10,
            multistart_count: 5,
            seed: 0,
            scheme: Scheme::default_for(dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.tol_kkt, self.step_init, self.constraint_tol];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(
                "tol_kkt, step_init and constraint_tol must be positive".into(),
            ));
        }
        if !(self.backtrack_ratio > 0.0 && self.backtrack_ratio < 1.0) {
            return Err(Error::InvalidInput(format!(
                "backtrack_ratio = {} must lie in (0, 1)",
                self.backtrack_ratio
            )));
        }
        if self.max_iters == 0 || self.max_backtracks == 0 || self.multistart_count == 0 {
            return Err(Error::InvalidInput(
                "max_iters, max_backtracks and multistart_count must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub objective: f64,
    /// `V_φ` of the iterate.
    pub constraint: f64,
    pub residual: f64,
    /// Accepted step length (0 for the starting point).
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverResult {
    /// Solution; for power laws dilated so that `τ = 1`.
    pub polytope: HPolytope,
    /// Solution on the constraint `V_φ = |μ|`.
    pub constrained_polytope: HPolytope,
    pub tau: f64,
    /// `F` at `constrained_polytope`.
    pub objective: f64,
    /// `V_φ(constrained_polytope)`.
    pub quermass: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `C̃(polytope, ·)`.
    pub curvature: CurvatureResult,
    pub trace: Vec<TraceEntry>,
}

impl SolverResult {
    /// `max |τ C̃ᵢ - λᵢ| / λᵢ`.
    pub fn max_relative_mass_error(&self, mu: &DiscreteMeasure) -> f64 {
        self.curvature
            .per_face
            .iter()
            .zip(mu.weights())
            .map(|(c, l)| (self.tau * c - l).abs() / l)
            .fold(0.0, f64::max)
    }
}

/// Outcome of the not-concentrated test.
#[derive(Clone, Debug, PartialEq)]
pub struct Concentration {
    pub not_concentrated: bool,
    pub worst: f64,
    pub witness: Direction,
}

/// Minimum of `ξ ↦ Σ λᵢ ⟨ξ, uᵢ⟩₊` over the exact arrangement vertices and
/// `grid`; passes if it exceeds `1e-10 |μ|`.
pub fn check_not_concentrated(mu: &DiscreteMeasure, grid: &[Direction]) -> Concentration {
    let pp = min_positive_part(mu.dim(), mu.directions(), mu.weights(), grid);
    Concentration {
        not_concentrated: pp.worst > CONCENTRATION_REL * mu.total(),
        worst: pp.worst,
        witness: pp.witness,
    }
}

/// `F(h) = -(1/|μ|) Σ λᵢ log hᵢ`.
pub fn objective_f(h: &[f64], mu: &DiscreteMeasure) -> Result<f64> {
    if h.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            found: h.len(),
        });
    }
    if let Some((index, &value)) = h.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveSupport { index, value });
    }
    let total = mu.total();
    Ok(-par::sum(mu.weights().iter().zip(h).map(|(l, h)| l * h.ln())) / total)
}

/// Ascent direction of `F` along the constraint in `log h`:
/// `C̃ᵢ/C̃_total - λᵢ/|μ|`. Sums to zero; vanishes exactly at solutions.
pub fn gradient_logspace(
    p: &HPolytope,
    d: &Density,
    mu: &DiscreteMeasure,
    scheme: &Scheme,
) -> Result<Vec<f64>> {
    let c = crate::measures::curvature_measure(p, d, scheme)?;
    Ok(gradient_from(&c, mu))
}

fn gradient_from(c: &CurvatureResult, mu: &DiscreteMeasure) -> Vec<f64> {
    let total = mu.total();
    c.per_face
        .iter()
        .zip(mu.weights())
        .map(|(ci, l)| ci / c.total - l / total)
        .collect()
}

fn residual(grad: &[f64]) -> f64 {
    grad.iter().fold(0.0, |m, g| m.max(g.abs()))
}

/// A polytope on the constraint together with its functionals.
#[derive(Clone, Debug)]
struct State {
    poly: HPolytope,
    log_h: Vec<f64>,
    quermass: f64,
    curvature: CurvatureResult,
}

/// Lowers the support numbers of dead facets to the polytope's support in
/// their direction. The body is unchanged and `F` can only increase.
fn snap_dead_facets(s: State) -> Result<State> {
    let threshold = FACET_DEATH_REL * s.curvature.total;
    let mut h = s.poly.supports().to_vec();
    let mut changed = false;
    for (i, c) in s.curvature.per_face.iter().enumerate() {
        if *c <= threshold {
            let support = s.poly.support_eval(&s.poly.normals()[i])?;
            if support < h[i] {
                h[i] = support;
                changed = true;
            }
        }
    }
    if !changed {
        return Ok(s);
    }
    let poly = s.poly.with_supports(h)?;
    let log_h = poly.supports().iter().map(|v| v.ln()).collect();
    Ok(State { poly, log_h, ..s })
}

/// Dilates `p` so that `V_φ(λP) = target`, returning the dilate and its
/// functionals. Power laws use `λ = (target/V)^{1/q}`; other densities a
/// safeguarded Newton iteration in `log λ` with `dV/dlog λ = -C̃_total`.
fn project(p: &HPolytope, d: &Density, target: f64, scheme: &Scheme, tol: f64) -> Result<State> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidInput(format!("constraint target {target} must be positive")));
    }
    let nodes = scheme.labeled_nodes(p)?;
    let eval = |s: f64| -> Result<(f64, CurvatureResult)> {
        let values = node_values(&nodes, d, s.exp())?;
        Ok(reduce_nodes(&nodes, &values, p.len()))
    };
    let finish = |s: f64, v: f64, c: CurvatureResult| -> Result<State> {
        let poly = p.scaled(s.exp())?;
        let log_h = poly.supports().iter().map(|h| h.ln()).collect();
        Ok(State {
            poly,
            log_h,
            quermass: v,
            curvature: c,
        })
    };
    let (v0, c0) = eval(0.0)?;
    if let Some(q) = d.homogeneity() {
        let s = (target / v0).ln() / q;
        let (v, c) = eval(s)?;
        return finish(s, v, c);
    }
    let gap = |v: f64| (v / target).ln();
    if gap(v0).abs() <= tol {
        return finish(0.0, v0, c0);
    }
    // V is decreasing in s; double λ until f(lo) > 0 > f(hi).
    let ln2 = std::f64::consts::LN_2;
    let dir = if gap(v0) > 0.0 { 1.0 } else { -1.0 };
    let mut prev = 0.0;
    let mut next = dir * ln2;
    let mut doublings = 1;
    while gap(eval(next)?.0) * dir > 0.0 {
        if doublings >= BRACKET_BUDGET {
            return Err(Error::BisectionBracketFailure(BRACKET_BUDGET));
        }
        prev = next;
        next += dir * ln2;
        doublings += 1;
    }
    let (mut lo, mut hi) = if dir > 0.0 { (prev, next) } else { (next, prev) };
    let mut s = 0.5 * (lo + hi);
    // Once within `tol`, up to two more Newton steps push the error towards
    // rounding so that objective differences stay resolvable.
    let mut best: Option<(f64, f64, CurvatureResult, f64)> = None;
    let mut polish = 0;
    while hi - lo > 4.0 * f64::EPSILON * s.abs().max(1.0) {
        let (v, c) = eval(s)?;
        let f = gap(v);
        if f.abs() <= tol {
            if best.as_ref().is_none_or(|b| f.abs() < b.3) {
                best = Some((s, v, c.clone(), f.abs()));
            }
            polish += 1;
            if f.abs() <= 1e-3 * tol || polish > 2 {
                break;
            }
        }
        if f > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        // d log V / ds = -C̃_total / V.
        let newton = s + f * v / c.total;
        s = if newton > lo && newton < hi && c.total > 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    match best {
        Some((s, v, c, _)) => finish(s, v, c),
        None => Err(Error::ToleranceNotMet(format!(
            "constraint projection did not reach relative accuracy {tol}"
        ))),
    }
}

/// Dilate `λP` with `V_φ(λP) = target` within `tol` relative.
pub fn project_to_constraint(
    p: &HPolytope,
    d: &Density,
    target: f64,
    scheme: &Scheme,
    tol: f64,
) -> Result<HPolytope> {
    Ok(project(p, d, target, scheme, tol)?.poly)
}

fn validate_problem(mu: &DiscreteMeasure, d: &Density, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if mu.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim().n(),
            found: d.dim().n(),
        });
    }
    if let Some(w) = mu.weights().iter().find(|w| !(**w > 0.0)) {
        return Err(Error::InvalidInput(format!("solver needs positive weights, got {w}")));
    }
    if d.homogeneity().is_none() && d.tail_bounds().is_none() {
        return Err(Error::NonIntegrableDensity(
            "density declares no growth bounds for its tail".into(),
        ));
    }
    let conc = check_not_concentrated(mu, &[]);
    if !conc.not_concentrated {
        return Err(Error::MeasureConcentrated {
            worst: conc.worst,
            witness: conc.witness.coords().to_vec(),
        });
    }
    Ok(())
}

/// Solves from `h ≡ 1`.
pub fn solve(mu: &DiscreteMeasure, d: &Density, cfg: &SolverConfig) -> Result<SolverResult> {
    solve_from(mu, d, cfg, &vec![1.0; mu.len()])
}

/// Solves from the given initial supports.
pub fn solve_from(
    mu: &DiscreteMeasure,
    d: &Density,
    cfg: &SolverConfig,
    start: &[f64],
) -> Result<SolverResult> {
    validate_problem(mu, d, cfg)?;
    if !d.claims().c2_claimed {
        warn!("density does not claim the cone divergence condition; existence is not guaranteed");
    }
    let total = mu.total();
    let weights: Vec<f64> = mu.weights().iter().map(|l| l / total).collect();
    let objective = |s: &State| -> f64 { -par::sum(weights.iter().zip(&s.log_h).map(|(w, x)| w * x)) };

    let base = HPolytope::new(mu.directions().to_vec(), start.to_vec())?;
    let mut state = project(&base, d, total, &cfg.scheme, cfg.constraint_tol)?;
    let mut grad = gradient_from(&state.curvature, mu);
    let mut obj = objective(&state);
    let mut trace = vec![TraceEntry {
        iteration: 0,
        objective: obj,
        constraint: state.quermass,
        residual: residual(&grad),
        step: 0.0,
    }];
    let mut alpha = cfg.step_init;
    let mut iterations = 0;
    let mut converged = residual(&grad) <= cfg.tol_kkt;
    let mut best_residual = residual(&grad);
    let mut since_best = 0;
    let mut best_obj = obj;

    while !converged && iterations < cfg.max_iters {
        let norm2: f64 = grad.iter().map(|g| g * g).sum();
        let live: Vec<bool> = state
            .curvature
            .per_face
            .iter()
            .map(|c| *c > FACET_DEATH_REL * state.curvature.total)
            .collect();
        // Objective resolution: rounding, plus the dilation error for
        // non-homogeneous densities.
        let noise = match d.homogeneity() {
            Some(_) => ROUNDING_SLACK * obj.abs().max(1.0),
            None => (ROUNDING_SLACK * obj.abs().max(1.0))
                .max(2.0 * cfg.constraint_tol * state.quermass / state.curvature.total),
        };
        let mut accepted = None;
        let mut trial_alpha = alpha;
        for _ in 0..cfg.max_backtracks {
            let h: Vec<f64> = state
                .log_h
                .iter()
                .zip(&grad)
                .map(|(x, g)| (x + trial_alpha * g).exp())
                .collect();
            let candidate = state
                .poly
                .with_supports(h)
                .and_then(|p| project(&p, d, total, &cfg.scheme, cfg.constraint_tol));
            match candidate {
                Ok(next) => {
                    let died = next
                        .curvature
                        .per_face
                        .iter()
                        .zip(&live)
                        .any(|(c, l)| *l && *c <= FACET_DEATH_REL * next.curvature.total);
                    let next_obj = objective(&next);
                    let armijo = next_obj >= obj + ARMIJO * trial_alpha * norm2;
                    // Near the optimum the Armijo gain drops below the objective's
                    // resolution; use the approximate Wolfe test on the slope instead.
                    let slope: f64 = gradient_from(&next.curvature, mu)
                        .iter()
                        .zip(&grad)
                        .map(|(a, b)| a * b)
                        .sum();
                    let approx_wolfe =
                        next_obj >= obj - noise && slope >= -(1.0 - 2.0 * WOLFE_DELTA) * norm2;
                    if armijo || approx_wolfe {
                        if died {
                            debug!("step {trial_alpha:e} drops a facet at iteration {iterations}");
                        }
                        accepted = Some((next, next_obj));
                        break;
                    }
                }
                Err(e) => debug!("trial step {trial_alpha:e} rejected: {e}"),
            }
            trial_alpha *= cfg.backtrack_ratio;
        }
        let Some((next, _)) = accepted else {
            debug!("line search stalled at iteration {iterations}");
            break;
        };
        let next = snap_dead_facets(next)?;
        let next_obj = objective(&next);
        iterations += 1;
        let next_grad = gradient_from(&next.curvature, mu);
        // Barzilai-Borwein step on the zero-mean part of the log-support change.
        let mut s: Vec<f64> = next.log_h.iter().zip(&state.log_h).map(|(a, b)| a - b).collect();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        s.iter_mut().for_each(|v| *v -= mean);
        let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        alpha = if sy < 0.0 {
            (ss / -sy).clamp(1e-10, 1e10)
        } else {
            (2.0 * trial_alpha).min(1e10)
        };
        state = next;
        grad = next_grad;
        obj = next_obj;
        trace.push(TraceEntry {
            iteration: iterations,
            objective: obj,
            constraint: state.quermass,
            residual: residual(&grad),
            step: trial_alpha,
        });
        converged = residual(&grad) <= cfg.tol_kkt;
        let gained = obj > best_obj + PROGRESS_REL * best_obj.abs().max(1.0);
        best_obj = best_obj.max(obj);
        if residual(&grad) < best_residual || gained {
            best_residual = best_residual.min(residual(&grad));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STALL_ITERS {
                debug!("no residual improvement in {STALL_ITERS} iterations");
                break;
            }
        }
    }

    let kkt_residual = residual(&grad);
    if !converged {
        warn!("solver stopped after {iterations} iterations with residual {kkt_residual:e}");
    }
    let (polytope, tau, curvature) = match d.homogeneity() {
        Some(q) => {
            let lambda = (total / state.curvature.total).powf(1.0 / q);
            let p = state.poly.scaled(lambda)?;
            let c = crate::measures::curvature_measure(&p, d, &cfg.scheme)?;
            (p, 1.0, c)
        }
        None => (
            state.poly.clone(),
            total / state.curvature.total,
            state.curvature.clone(),
        ),
    };
    Ok(SolverResult {
        polytope,
        constrained_polytope: state.poly,
        tau,
        objective: obj,
        quermass: state.quermass,
        kkt_residual,
        iterations,
        converged,
        curvature,
        trace,
    })
}

/// Multistart agreement report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub starts: usize,
    /// Max pairwise support-function distance of the solutions on a dense grid.
    pub max_pairwise_distance: f64,
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    /// False when the density does not claim strict radial decrease of
    /// `φ(x)|x|ⁿ`, in which case agreement is not implied.
    pub uniqueness_claimed: bool,
}

/// Initial supports drawn log-uniformly from `[0.25, 4]`.
pub fn multistart_starts(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (0.25f64.ln(), 4f64.ln());
    (0..count)
        .map(|_| (0..m).map(|_| rng.random_range(lo..hi).exp()).collect())
        .collect()
}

/// Solves from `cfg.multistart_count` random starts in parallel and compares
/// the solutions.
pub fn multistart_uniqueness_probe(
    mu: &DiscreteMeasure,
    d: &Density,
    cfg: &SolverConfig,
) -> Result<(UniquenessReport, Vec<SolverResult>)> {
    validate_problem(mu, d, cfg)?;
    let claimed = d.claims().strictly_decreasing_phixn;
    if !claimed {
        warn!("density does not claim strict radial decrease; the uniqueness report is informational");
    }
    let starts = multistart_starts(mu.len(), cfg.multistart_count, cfg.seed);
    let results: Vec<SolverResult> = par::map(&starts, |h| solve_from(mu, d, cfg, h))
        .into_iter()
        .collect::<Result<_>>()?;
    let grid = hausdorff_grid(mu.dim());
    let mut worst = 0.0f64;
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            worst = worst.max(hausdorff_distance(&results[i].polytope, &results[j].polytope, &grid)?);
        }
    }
    let report = UniquenessReport {
        starts: results.len(),
        max_pairwise_distance: worst,
        residuals: results.iter().map(|r| r.kkt_residual).collect(),
        converged: results.iter().map(|r| r.converged).collect(),
        uniqueness_claimed: claimed,
    };
    Ok((report, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Anisotropy, Claims, RadialProfile};
    use crate::geom::{Dim, StarBody};
    use crate::measures::{quermass, quermass_star};
    use crate::quadrature::SphericalRule;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn power(q: f64) -> Density {
        Density::power_law(Dim::Two, q, Anisotropy::Constant(1.0)).unwrap()
    }

    fn axes_measure(w: f64) -> DiscreteMeasure {
        let dirs = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
            .iter()
            .map(|c| Direction::new(c).unwrap())
            .collect();
        DiscreteMeasure::new(dirs, vec![w; 4]).unwrap()
    }

    fn random_measure(rng: &mut ChaCha8Rng, m: usize) -> DiscreteMeasure {
        loop {
            let dirs: Vec<Direction> = (0..m)
                .map(|_| Direction::from_angle(rng.random_range(0.0..2.0 * PI)))
                .collect();
            let w: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0f64..1.0).exp()).collect();
            let mu = DiscreteMeasure::new(dirs, w).unwrap();
            if check_not_concentrated(&mu, &[]).worst > 0.05 * mu.total() {
                return mu;
            }
        }
    }

    #[test]
    fn concentration_examples() {
        let two = DiscreteMeasure::new(
            vec![Direction::axis(Dim::Two, 0), Direction::axis(Dim::Two, 1)],
            vec![1.0, 1.0],
        )
        .unwrap();
        let c = check_not_concentrated(&two, &[]);
        assert!(!c.not_concentrated && c.worst == 0.0);
        assert!((c.witness.coords()[0] + FRAC_1_SQRT_2).abs() < 1e-12);
        let c = check_not_concentrated(&axes_measure(SQRT_2), &[]);
        assert!(c.not_concentrated);
        assert!((c.worst - SQRT_2).abs() < 1e-12);
        let one = DiscreteMeasure::new(vec![Direction::axis(Dim::Two, 1)], vec![3.0]).unwrap();
        assert!(!check_not_concentrated(&one, &[]).not_concentrated);
    }

    #[test]
    fn objective_examples() {
        let mu = axes_measure(1.0);
        assert_eq!(objective_f(&[1.0; 4], &mu).unwrap(), 0.0);
        assert!((objective_f(&[3.0; 4], &mu).unwrap() + 3f64.ln()).abs() < 1e-15);
        let v = objective_f(&[2.0, 2.0, 1.0, 1.0], &mu).unwrap();
        assert!((v + 2f64.ln() / 2.0).abs() < 1e-15);
        assert!(matches!(
            objective_f(&[1.0, 0.0, 1.0, 1.0], &mu),
            Err(Error::NonPositiveSupport { index: 1, .. })
        ));
    }

    #[test]
    fn gradient_examples() {
        let d = power(-1.0);
        let mu = axes_measure(SQRT_2);
        let scheme = Scheme::default_for(Dim::Two);
        let sq = HPolytope::cube(Dim::Two, 1.0).unwrap();
        let g = gradient_logspace(&sq, &d, &mu, &scheme).unwrap();
        assert!(residual(&g) < 1e-12);
        let pushed = sq.with_supports(vec![1.1, 1.0, 1.0, 1.0]).unwrap();
        let g = gradient_logspace(&pushed, &d, &mu, &scheme).unwrap();
        assert!(g[0] < 0.0);
        assert!(g.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let d = power(-1.0);
        let scheme = Scheme::default_for(Dim::Two);
        let sq = HPolytope::cube(Dim::Two, 1.0).unwrap();
        let same = project_to_constraint(&sq, &d, 4.0 * SQRT_2, &scheme, 1e-10).unwrap();
        assert!((same.supports()[0] - 1.0).abs() < 1e-14);
        let half = project_to_constraint(&sq, &d, 8.0 * SQRT_2, &scheme, 1e-10).unwrap();
        assert!((half.supports()[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn projection_matches_scalar_root_for_exp_density() {
        // V(λB) = 2π (1 + λ) e^{-λ} for ψ = e^{-r}; use a 360-gon as B.
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
        let target = 2.0 * PI * 3.0 * (-2f64).exp();
        let scheme = Scheme::default_for(Dim::Two);
        let p = HPolytope::regular_polygon(360, 1.0).unwrap();
        let got = project_to_constraint(&p, &d, target, &scheme, 1e-10).unwrap();
        let v = quermass(&got, &d, &scheme).unwrap();
        assert!((v - target).abs() < 2e-10 * target);
        // Independent oracle: bisection on the disk's closed form, corrected
        // by the polygon/disk quermass ratio at the found scale.
        let lam = got.supports()[0];
        let disk = quermass_star(
            &StarBody::ball(Dim::Two, lam).unwrap(),
            &d,
            &SphericalRule::circle(64).unwrap(),
        )
        .unwrap();
        assert!((disk - 2.0 * PI * (1.0 + lam) * (-lam).exp()).abs() < 1e-9);
        assert!((lam - 2.0).abs() < 1e-4, "{lam}");
        let square = HPolytope::cube(Dim::Two, 1.0).unwrap();
        let fail = project_to_constraint(&square, &d, 1e300, &scheme, 1e-10);
        assert!(matches!(fail, Err(Error::BisectionBracketFailure(_))));
    }

    #[test]
    fn canonical_square() {
        let d = power(-1.0);
        let mu = axes_measure(SQRT_2);
        let r = solve(&mu, &d, &SolverConfig::default_for(Dim::Two)).unwrap();
        assert!(r.converged && r.kkt_residual <= 1e-8);
        for h in r.polytope.supports() {
            assert!((h - 1.0).abs() < 1e-10);
        }
        assert_eq!(r.tau, 1.0);
        assert!(r.max_relative_mass_error(&mu) < 1e-10);
    }

    #[test]
    fn random_instances_converge_monotonically() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [-0.5, -1.0, -2.0] {
            let d = power(q);
            let mu = random_measure(&mut rng, 7);
            let r = solve(&mu, &d, &SolverConfig::default_for(Dim::Two)).unwrap();
            assert!(r.converged, "q={q} residual {}", r.kkt_residual);
            assert!(r.trace.windows(2).all(|w| w[1].objective >= w[0].objective - 1e-12));
            for t in &r.trace {
                assert!((t.constraint - mu.total()).abs() <= 1e-10 * mu.total());
            }
            assert!(r.max_relative_mass_error(&mu) < 1e-6);
            assert!(r.curvature.per_face.iter().all(|c| *c > 0.0));
        }
    }

    #[test]
    fn passes_through_a_dropped_facet() {
        // Growing the facet at 5.26 first squeezes out its neighbour at 5.38.
        let angles = [6.094, 0.551, 2.839, 5.377, 5.260, 4.355, 3.826, 4.496];
        let weights = vec![0.181, 0.363, 3.681, 0.412, 8.977, 4.427, 1.492, 2.214];
        let mu = DiscreteMeasure::new(angles.map(Direction::from_angle).to_vec(), weights).unwrap();
        let r = solve(&mu, &power(-1.0), &SolverConfig::default_for(Dim::Two)).unwrap();
        assert!(r.converged, "residual {}", r.kkt_residual);
        // A residual bounds absolute errors in mass fractions.
        let smallest = mu.weights().iter().copied().fold(f64::INFINITY, f64::min);
        let bound = 2.0 * r.kkt_residual * mu.total() / smallest;
        assert!(r.max_relative_mass_error(&mu) <= bound);
        assert!(r.curvature.per_face.iter().all(|c| *c > 0.0));
    }

    #[test]
    fn elongated_solution_converges() {
        let angles = [3.209, 5.598, 0.502, 4.202, 3.797, 5.553];
        let weights = vec![0.361, 0.594, 5.707, 0.234, 0.547, 0.898];
        let mu = DiscreteMeasure::new(angles.map(Direction::from_angle).to_vec(), weights).unwrap();
        let r = solve(&mu, &power(-0.5), &SolverConfig::default_for(Dim::Two)).unwrap();
        assert!(r.converged, "residual {}", r.kkt_residual);
    }

    #[test]
    fn uniform_circle_gives_near_disk() {
        let d = power(-1.0);
        let mu = DiscreteMeasure::uniform_circle(360).unwrap();
        let r = solve(&mu, &d, &SolverConfig::default_for(Dim::Two)).unwrap();
        assert!(r.converged);
        for h in r.polytope.supports() {
            assert!((h - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn scaling_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = power(-2.0);
        let mu = random_measure(&mut rng, 6);
        let cfg = SolverConfig::default_for(Dim::Two);
        let base = solve(&mu, &d, &cfg).unwrap();
        for c in [0.1, 10.0] {
            let r = solve(&mu.scaled(c).unwrap(), &d, &cfg).unwrap();
            let f = c.powf(-0.5);
            for (a, b) in r.polytope.supports().iter().zip(base.polytope.supports()) {
                assert!((a - f * b).abs() <= 1e-6 * f * b);
            }
        }
    }

    #[test]
    fn non_homogeneous_density_targets_normalized_measure() {
        let d = Density::radial(
            Dim::Two,
            RadialProfile::Monomials(vec![(1.0, -3.0), (1.0, -4.5)]),
            Anisotropy::Constant(1.0),
            None,
            Claims {
                c2_claimed: true,
                strictly_decreasing_phixn: true,
            },
        )
        .unwrap();
        let dirs = [0.3, 1.9, 2.8, 4.0, 5.2].map(Direction::from_angle).to_vec();
        let mu = DiscreteMeasure::new(dirs, vec![1.0, 0.7, 1.3, 0.9, 2.0]).unwrap();
        let r = solve(&mu, &d, &SolverConfig::default_for(Dim::Two)).unwrap();
        assert!(r.converged, "{}", r.kkt_residual);
        assert!((r.quermass - mu.total()).abs() <= 1e-10 * mu.total());
        assert!(r.max_relative_mass_error(&mu) < 1e-6);
    }

    #[test]
    fn concentrated_measure_is_rejected() {
        let two = DiscreteMeasure::new(
            vec![Direction::axis(Dim::Two, 0), Direction::axis(Dim::Two, 1)],
            vec![1.0, 1.0],
        )
        .unwrap();
        let err = solve(&two, &power(-1.0), &SolverConfig::default_for(Dim::Two)).unwrap_err();
        assert!(matches!(err, Error::MeasureConcentrated { .. }));
    }

    #[test]
    fn multistart_agrees() {
        let d = power(-2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mu = random_measure(&mut rng, 6);
        let cfg = SolverConfig::default_for(Dim::Two);
        let (rep, _) = multistart_uniqueness_probe(&mu, &d, &cfg).unwrap();
        assert_eq!(rep.starts, 5);
        assert!(rep.max_pairwise_distance <= 1e-4);
        let single = SolverConfig {
            multistart_count: 1,
            ..cfg
        };
        let (rep, _) = multistart_uniqueness_probe(&mu, &d, &single).unwrap();
        assert_eq!(rep.max_pairwise_distance, 0.0);
    }

    #[test]
    fn solves_in_space() {
        let d = Density::power_law(Dim::Three, -1.0, Anisotropy::Constant(1.0)).unwrap();
        let normals: Vec<Direction> = HPolytope::cube(Dim::Three, 1.0).unwrap().normals().to_vec();
        let w = [1.0, 2.0, 1.5, 1.5, 1.0, 3.0];
        let mu = DiscreteMeasure::new(normals, w.to_vec()).unwrap();
        // Node-wise face assignment leaves an O(h) floor on the residual.
        let cfg = SolverConfig {
            tol_kkt: 5e-3,
            ..SolverConfig::default_for(Dim::Three)
        };
        let r = solve(&mu, &d, &cfg).unwrap();
        assert!(r.converged, "{}", r.kkt_residual);
        assert!(r.max_relative_mass_error(&mu) < 2e-2);
        let strict = SolverConfig {
            tol_kkt: 1e-12,
            ..cfg
        };
        let r = solve(&mu, &d, &strict).unwrap();
        assert!(!r.converged && r.iterations < strict.max_iters);
    }
}
