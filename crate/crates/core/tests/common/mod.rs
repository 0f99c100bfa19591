//! Independent oracles shared by the integration tests. None of these call
//! into the code they check.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::Rng;
use tensor1::autodiff::{eval_scalar, ScalarExpr};

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Central-difference gradient with a step scaled to each coordinate.
pub fn fd_gradient(expr: &ScalarExpr, point: &[f64]) -> Vec<f64> {
    (0..point.len())
        .map(|i| {
            let h = 1e-5 * point[i].abs().max(1.0);
            let mut hi = point.to_vec();
            let mut lo = point.to_vec();
            hi[i] += h;
            lo[i] -= h;
            let fh = eval_scalar(expr, &hi).expect("finite at shifted point");
            let fl = eval_scalar(expr, &lo).expect("finite at shifted point");
            (fh - fl) / (2.0 * h)
        })
        .collect()
}

/// Jacobian `d x^j / d q^i` (row j, column i) of a chart map by central differences.
pub fn fd_jacobian(map: &[ScalarExpr], point: &[f64]) -> DMatrix<f64> {
    let n = point.len();
    let mut m = DMatrix::zeros(map.len(), n);
    for (j, e) in map.iter().enumerate() {
        for (i, d) in fd_gradient(e, point).into_iter().enumerate() {
            m[(j, i)] = d;
        }
    }
    m
}

/// Random expression in `vars` variables whose domain is all of `R^vars`:
/// divisions, logarithms and roots only see arguments bounded away from
/// their singularities, and `tan` only sees arguments in `[-1/2, 1/2]`.
pub fn random_expr<R: Rng>(rng: &mut R, vars: usize, depth: u32) -> ScalarExpr {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.75) {
            ScalarExpr::var(rng.gen_range(0..vars))
        } else {
            ScalarExpr::constant(rng.gen_range(-2.0..2.0))
        };
    }
    let sub = |rng: &mut R| random_expr(rng, vars, depth - 1);
    let positive = |e: ScalarExpr| e.powi(2) + ScalarExpr::constant(1.0);
    match rng.gen_range(0..13) {
        0 => sub(rng) + sub(rng),
        1 => sub(rng) - sub(rng),
        2 => sub(rng) * sub(rng),
        3 => sub(rng) / positive(sub(rng)),
        4 => -sub(rng),
        5 => sub(rng).powi(rng.gen_range(2..4)),
        6 => sub(rng).sin(),
        7 => sub(rng).cos(),
        8 => (sub(rng).sin() * ScalarExpr::constant(0.5)).tan(),
        9 => sub(rng).sin().exp(),
        10 => positive(sub(rng)).ln(),
        11 => positive(sub(rng)).sqrt(),
        _ => ScalarExpr::atan2(sub(rng), positive(sub(rng))),
    }
}

/// Every multi-index of `order` slots over `1..=dim`, in the order an
/// odometer produces them (last wheel turns fastest).
pub fn odometer(dim: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut wheels = vec![1usize; order];
    loop {
        out.push(wheels.clone());
        let mut slot = order;
        loop {
            if slot == 0 {
                return out;
            }
            slot -= 1;
            if wheels[slot] < dim {
                wheels[slot] += 1;
                break;
            }
            wheels[slot] = 1;
        }
    }
}

/// Permutation sign as the determinant of the permutation matrix
/// (0 when an index repeats). Indexes are 1-based.
pub fn epsilon_oracle(indexes: &[usize]) -> f64 {
    let n = indexes.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (row, &i) in indexes.iter().enumerate() {
        m[(row, i - 1)] = 1.0;
    }
    m.determinant().round()
}

pub fn dense_matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum())
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Random point of a built-in chart, away from its singular set.
pub fn random_chart_point<R: Rng>(rng: &mut R, chart: &str) -> Vec<f64> {
    match chart {
        "polar" => vec![rng.gen_range(0.1..5.0), rng.gen_range(-PI..PI)],
        "spherical" => vec![
            rng.gen_range(0.1..5.0),
            rng.gen_range(0.1..PI - 0.1),
            rng.gen_range(-PI..PI),
        ],
        "cartesian2" => (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect(),
        "cartesian3" => (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect(),
        other => panic!("no sampler for chart {other}"),
    }
}

pub const BUILTIN_CHARTS: [&str; 4] = ["cartesian2", "cartesian3", "polar", "spherical"];
