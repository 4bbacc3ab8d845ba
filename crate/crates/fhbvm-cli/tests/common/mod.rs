// Shared across test targets; each uses a subset.
#![allow(dead_code)]
#![allow(clippy::excessive_precision)]

//! Independent adaptive-quadrature oracle for the acceptance suite.

use fhbvm_core::basis::jacobi_eval;
use fhbvm_core::special::gamma;

const GL10_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL10_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

fn gl10(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL10_NODES.iter().zip(&GL10_WEIGHTS) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> f64 {
    let mid = 0.5 * (a + b);
    let left = gl10(f, a, mid);
    let right = gl10(f, mid, b);
    let refined = left + right;
    let floor = 1e-16 * (1.0 + left.abs() + right.abs());
    if (refined - whole).abs() <= tol.max(floor) || depth == 0 {
        refined
    } else {
        let child_tol = (0.5 * tol).max(floor);
        adapt(f, a, mid, left, child_tol, depth - 1) + adapt(f, mid, b, right, child_tol, depth - 1)
    }
}

pub fn adaptive_quad(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = gl10(&f, a, b);
    adapt(&f, a, b, whole, tol, 60)
}

/// `I^α P_j(c)` through the singularity-absorbing substitution.
pub fn oracle_ialpha(alpha: f64, j: usize, c: f64, tol: f64) -> f64 {
    let inv = 1.0 / gamma(alpha + 1.0).unwrap();
    inv * adaptive_quad(
        |u| jacobi_eval(alpha, j + 1, c - u.powf(1.0 / alpha))[j],
        0.0,
        c.powf(alpha),
        tol,
    )
}

/// `J_j^α(x)`: substituted form near the singularity, direct form once the
/// kernel is smooth.
pub fn oracle_jalpha(alpha: f64, j: usize, x: f64, tol: f64) -> f64 {
    if x < 1.5 {
        let inv = 1.0 / gamma(alpha + 1.0).unwrap();
        inv * adaptive_quad(
            |u| jacobi_eval(alpha, j + 1, x - u.powf(1.0 / alpha))[j],
            (x - 1.0).powf(alpha),
            x.powf(alpha),
            tol,
        )
    } else {
        let inv = 1.0 / gamma(alpha).unwrap();
        inv * adaptive_quad(
            |t| (x - t).powf(alpha - 1.0) * jacobi_eval(alpha, j + 1, t)[j],
            0.0,
            1.0,
            tol,
        )
    }
}
