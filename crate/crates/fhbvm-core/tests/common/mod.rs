// Shared across several test targets; each uses a subset.
#![allow(dead_code)]
#![allow(clippy::excessive_precision)]

//! Shared test oracles: adaptive quadrature (independent of the solver's
//! Gauss-rule tables) and minimal complex arithmetic.

use fhbvm_core::basis::jacobi_eval;
use fhbvm_core::special::gamma;

// 10-point Gauss–Legendre rule on [−1, 1].
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
    // never chase tolerances below the rounding noise of the panel values
    let floor = 1e-16 * (1.0 + left.abs() + right.abs());
    if (refined - whole).abs() <= tol.max(floor) || depth == 0 {
        refined
    } else {
        let child_tol = (0.5 * tol).max(floor);
        adapt(f, a, mid, left, child_tol, depth - 1) + adapt(f, mid, b, right, child_tol, depth - 1)
    }
}

/// Adaptive Gauss–Legendre quadrature by interval halving.
pub fn adaptive_quad(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = gl10(&f, a, b);
    adapt(&f, a, b, whole, tol, 60)
}

/// Oracle for `∫₀¹ ω(x) g(x) dx` with `ω(x) = α(1−x)^(α−1)`, through the
/// substitution `u = (1−x)^α` that removes the endpoint singularity.
pub fn oracle_weighted_integral(alpha: f64, g: impl Fn(f64) -> f64, tol: f64) -> f64 {
    adaptive_quad(|u| g(1.0 - u.powf(1.0 / alpha)), 0.0, 1.0, tol)
}

/// Oracle for `I^α P_j(c) = (1/Γ(α)) ∫₀^c (c−τ)^(α−1) P_j(τ) dτ`, through
/// the substitution `u = (c−τ)^α`.
pub fn oracle_ialpha(alpha: f64, j: usize, c: f64, tol: f64) -> f64 {
    let inv = 1.0 / gamma(alpha + 1.0).unwrap();
    inv * adaptive_quad(
        |u| jacobi_eval(alpha, j + 1, c - u.powf(1.0 / alpha))[j],
        0.0,
        c.powf(alpha),
        tol,
    )
}

/// Oracle for `J_j^α(x) = (1/Γ(α)) ∫₀¹ (x−τ)^(α−1) P_j(τ) dτ` (`x ≥ 1`).
///
/// Near the singularity the kernel substitution `u = (x−τ)^α` removes it;
/// once the kernel is smooth the direct form is used (the substituted
/// integrand would cancel catastrophically for large x).
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

/// Barebones complex value for the iteration-matrix spectral checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C {
    pub re: f64,
    pub im: f64,
}

impl C {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn mul(self, o: C) -> C {
        C::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }

    pub fn div(self, o: C) -> C {
        let d = o.re * o.re + o.im * o.im;
        C::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }

    pub fn sub(self, o: C) -> C {
        C::new(self.re - o.re, self.im - o.im)
    }

    pub fn add(self, o: C) -> C {
        C::new(self.re + o.re, self.im + o.im)
    }

    pub fn scale(self, s: f64) -> C {
        C::new(self.re * s, self.im * s)
    }
}
