use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use dual_orlicz::geom::{Dim, HPolytope, PolytopeRecord};
use dual_orlicz::measures::{quermass_and_curvature, quermass_star};
use dual_orlicz::solver::{multistart_uniqueness_probe, solve, SolverResult};
use dual_orlicz::verify::{run_suite, SuiteInput};
use dual_orlicz::Error;
use log::warn;
use serde::Serialize;

use crate::config::RunConfig;

/// Why a command did not succeed; each maps to one exit code.
#[derive(Debug)]
pub enum Failure {
    Parse(anyhow::Error),
    Numeric(anyhow::Error),
    Concentrated(anyhow::Error),
    NotConverged(String),
    ChecksFailed(Vec<String>),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::ChecksFailed(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Concentrated(_) => 4,
            Failure::NotConverged(_) => 5,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Parse(e) => format!("configuration error: {e:#}"),
            Failure::Numeric(e) => format!("numeric failure: {e:#}"),
            Failure::Concentrated(e) => format!(
                "the measure must not be concentrated in any closed hemisphere: {e:#}"
            ),
            Failure::NotConverged(s) => format!("solver did not converge: {s}"),
            Failure::ChecksFailed(names) => format!("failed checks: {}", names.join(", ")),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

fn parse<T>(r: anyhow::Result<T>) -> Outcome<T> {
    r.map_err(Failure::Parse)
}

fn numeric<T>(r: dual_orlicz::Result<T>) -> Outcome<T> {
    r.map_err(|e| match e {
        Error::MeasureConcentrated { .. } => Failure::Concentrated(e.into()),
        e => Failure::Numeric(e.into()),
    })
}

fn io<T>(r: anyhow::Result<T>) -> Outcome<T> {
    r.map_err(Failure::Numeric)
}

#[derive(Debug, Clone)]
pub struct Options {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub multistart: Option<usize>,
    pub allow_soft: bool,
}

struct Writer {
    dir: PathBuf,
}

impl Writer {
    fn new(dir: &Path) -> Outcome<Self> {
        io(fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn put(&self, name: &str, contents: &str) -> Outcome<()> {
        let p = self.dir.join(name);
        io(fs::write(&p, contents).with_context(|| format!("writing {}", p.display())))
    }
}

fn to_toml<T: Serialize>(v: &T) -> Outcome<String> {
    io(toml::to_string(v).context("serializing TOML"))
}

fn require_polytope(cfg: &RunConfig) -> Outcome<HPolytope> {
    parse(cfg.polytope())?.ok_or_else(|| Failure::Parse(anyhow!("missing [polytope] block")))
}

pub fn compute(cfg: &RunConfig, opts: &Options) -> Outcome<()> {
    let poly = parse(cfg.polytope())?;
    let body = parse(cfg.body())?;
    let dim = match (&poly, &body) {
        (Some(p), _) => p.dim(),
        (None, Some(b)) => b.dim(),
        (None, None) => return Err(Failure::Parse(anyhow!("compute needs a [polytope] or [body] block"))),
    };
    let d = parse(cfg.density(dim))?;
    let w = Writer::new(&opts.out)?;
    let mut txt = String::new();
    let _ = writeln!(txt, "dimension {}", dim.n());
    if let Some(p) = &poly {
        let scheme = parse(cfg.scheme(dim))?;
        let (v, c) = numeric(quermass_and_curvature(p, &d, &scheme))?;
        let _ = writeln!(txt, "facets {}", p.len());
        let _ = writeln!(txt, "quermass {v}");
        let _ = writeln!(txt, "curvature_total {}", c.total);
        w.put("curvature.csv", &c.to_csv(p))?;
    }
    if let Some(b) = &body {
        let rule = parse(cfg.star_rule(b.dim()))?;
        let v = numeric(quermass_star(b, &d, &rule))?;
        let _ = writeln!(txt, "body_quermass {v}");
    }
    w.put("compute.txt", &txt)
}

#[derive(Serialize)]
struct ResultFile {
    tau: f64,
    objective: f64,
    quermass: f64,
    kkt_residual: f64,
    iterations: usize,
    converged: bool,
    polytope: PolytopeRecord,
    constrained_polytope: PolytopeRecord,
}

fn trace_csv(r: &SolverResult) -> String {
    let mut s = String::from("iteration,objective,constraint,residual,step\n");
    for t in &r.trace {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            t.iteration, t.objective, t.constraint, t.residual, t.step
        );
    }
    s
}

pub fn solve_cmd(cfg: &RunConfig, opts: &Options) -> Outcome<SolverResult> {
    let mu = parse(cfg.measure())?.ok_or_else(|| Failure::Parse(anyhow!("missing [measure] block")))?;
    let dim = mu.dim();
    let d = parse(cfg.density(dim))?;
    let mut sc = parse(cfg.solver(dim))?;
    if let Some(s) = opts.seed {
        sc.seed = s;
    }
    let r = numeric(solve(&mu, &d, &sc))?;
    let w = Writer::new(&opts.out)?;
    w.put(
        "result.toml",
        &to_toml(&ResultFile {
            tau: r.tau,
            objective: r.objective,
            quermass: r.quermass,
            kkt_residual: r.kkt_residual,
            iterations: r.iterations,
            converged: r.converged,
            polytope: PolytopeRecord::from(&r.polytope),
            constrained_polytope: PolytopeRecord::from(&r.constrained_polytope),
        })?,
    )?;
    w.put("polytope.toml", &to_toml(&PolytopeRecord::from(&r.polytope))?)?;
    w.put("curvature.csv", &r.curvature.to_csv(&r.polytope))?;
    w.put("trace.csv", &trace_csv(&r))?;

    let mut rep = String::new();
    let _ = writeln!(rep, "atoms {}", mu.len());
    let _ = writeln!(rep, "converged {}", r.converged);
    let _ = writeln!(rep, "iterations {}", r.iterations);
    let _ = writeln!(rep, "kkt_residual {:e}", r.kkt_residual);
    let _ = writeln!(rep, "tau {}", r.tau);
    let _ = writeln!(rep, "max_relative_mass_error {:e}", r.max_relative_mass_error(&mu));
    if let Some(k) = opts.multistart {
        if k >= 2 {
            sc.multistart_count = k;
            let (u, _) = numeric(multistart_uniqueness_probe(&mu, &d, &sc))?;
            let _ = writeln!(rep, "\n[uniqueness]");
            let _ = writeln!(rep, "starts {}", u.starts);
            let _ = writeln!(rep, "seed {}", sc.seed);
            let _ = writeln!(rep, "max_pairwise_distance {:e}", u.max_pairwise_distance);
            let _ = writeln!(rep, "all_converged {}", u.converged.iter().all(|c| *c));
            let _ = writeln!(rep, "uniqueness_claimed {}", u.uniqueness_claimed);
        } else {
            warn!("--multistart {k} needs at least two starts; skipping the uniqueness report");
        }
    }
    w.put("report.txt", &rep)?;
    if !r.converged && !opts.allow_soft {
        return Err(Failure::NotConverged(format!(
            "residual {:e} after {} iterations (tolerance {:e})",
            r.kkt_residual, r.iterations, sc.tol_kkt
        )));
    }
    Ok(r)
}

pub fn verify_cmd(cfg: &RunConfig, opts: &Options) -> Outcome<()> {
    let p = require_polytope(cfg)?;
    let dim = p.dim();
    let d = parse(cfg.density(dim))?;
    let scheme = parse(cfg.scheme(dim))?;
    let mut sc = parse(cfg.solver(dim))?;
    if let Some(s) = opts.seed {
        sc.seed = s;
    }
    if let Some(k) = opts.multistart {
        sc.multistart_count = k;
    }
    let mu = parse(cfg.measure())?;
    if let Some(m) = &mu {
        if m.dim() != dim {
            return Err(Failure::Parse(anyhow!("measure and polytope dimensions differ")));
        }
    }
    let checks = parse(cfg.checks(&d))?;
    if checks.is_empty() {
        warn!("empty check selection; nothing to verify");
    }
    let input = SuiteInput {
        polytope: &p,
        density: &d,
        scheme: &scheme,
        measure: mu.as_ref(),
        solver: &sc,
    };
    let reports = numeric(run_suite(&input, &checks))?;
    let mut txt = String::new();
    let mut jsonl = String::new();
    for r in &reports {
        let _ = writeln!(txt, "{r}");
        let line = io(serde_json::to_string(r).context("serializing report"))?;
        let _ = writeln!(jsonl, "{line}");
    }
    let w = Writer::new(&opts.out)?;
    w.put("verify.txt", &txt)?;
    w.put("verify.jsonl", &jsonl)?;
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::ChecksFailed(failed))
    }
}

pub fn export(cfg: &RunConfig, opts: &Options) -> Outcome<()> {
    let p = require_polytope(cfg)?;
    let off = numeric(p.to_off())?;
    let w = Writer::new(&opts.out)?;
    w.put("polytope.off", &off)?;
    w.put("polytope.toml", &to_toml(&PolytopeRecord::from(&p))?)?;
    if p.dim() == Dim::Two {
        let mut csv = String::from("x,y\n");
        for v in numeric(p.vertices())? {
            let _ = writeln!(csv, "{},{}", v[0], v[1]);
        }
        w.put("vertices.csv", &csv)?;
    }
    Ok(())
}
