#![allow(dead_code)]

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dual_orlicz::geom::{Dim, Direction, HPolytope};
use dual_orlicz::measures::DiscreteMeasure;
use dual_orlicz::quadrature::hausdorff_grid;
use dual_orlicz::solver::check_not_concentrated;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_dual-orlicz"))
}

pub fn run_cli(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

/// Sorted angles with gaps in `(0.05, 0.9π)`.
pub fn spread_angles(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let mut a: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..TAU)).collect();
        a.sort_by(f64::total_cmp);
        let wrap = a[0] + TAU - a[m - 1];
        let ok = a
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain(std::iter::once(wrap))
            .all(|g| g > 0.05 && g < 0.9 * PI);
        if ok {
            return a;
        }
    }
}

pub fn random_polygon(rng: &mut ChaCha8Rng) -> HPolytope {
    let m = rng.random_range(5..=10);
    let dirs = spread_angles(rng, m)
        .into_iter()
        .map(Direction::from_angle)
        .collect();
    let h = (0..m).map(|_| rng.random_range(0.5..2.0)).collect();
    HPolytope::new(dirs, h).unwrap()
}

/// The cube's normals plus `extra` random ones, random supports.
pub fn random_polyhedron(rng: &mut ChaCha8Rng, extra: usize) -> HPolytope {
    let mut rows: Vec<Vec<f64>> = (0..3)
        .flat_map(|k| {
            [1.0, -1.0].map(|s| {
                let mut r = vec![0.0; 3];
                r[k] = s;
                r
            })
        })
        .collect();
    for _ in 0..extra {
        let z: f64 = rng.random_range(-1.0..1.0);
        let t: f64 = rng.random_range(0.0..TAU);
        let s = (1.0 - z * z).sqrt();
        rows.push(vec![s * t.cos(), s * t.sin(), z]);
    }
    let h = (0..rows.len()).map(|_| rng.random_range(0.7..1.5)).collect();
    HPolytope::from_rows(&rows, h).unwrap()
}

/// Planar measure with `m` atoms and log-uniform weights in `[0.1, 10]`,
/// redrawn until it is not concentrated.
pub fn random_measure(rng: &mut ChaCha8Rng, m: usize) -> DiscreteMeasure {
    let grid = hausdorff_grid(Dim::Two);
    loop {
        let dirs = (0..m)
            .map(|_| Direction::from_angle(rng.random_range(0.0..TAU)))
            .collect();
        let w = (0..m)
            .map(|_| rng.random_range(0.1f64.ln()..10f64.ln()).exp())
            .collect();
        let mu = DiscreteMeasure::new(dirs, w).unwrap();
        if check_not_concentrated(&mu, &grid).not_concentrated {
            return mu;
        }
    }
}

pub const SQUARE_SOLVE: &str = r#"
seed = 11

[measure]
kind = "explicit"
directions = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
weights = [1.4142135623730951, 1.4142135623730951, 1.4142135623730951, 1.4142135623730951]

[density]
kind = "power"
q = -1.0
"#;
