//! The scaled and shifted Jacobi polynomial basis and its quadrature rules.
//!
//! For a fractional order α ∈ (0, 1], the weight
//!
//! ```text
//! ω(x) = α(1−x)^(α−1)  on [0, 1],   ∫₀¹ ω(x) dx = 1,
//! ```
//!
//! admits the orthonormal family
//!
//! ```text
//! P_j(x) = √((2j+α)/α) · P̄_j^(α−1,0)(2x−1),   j = 0, 1, …,
//! ```
//!
//! where `P̄_j^(a,b)` is the classical Jacobi polynomial on [−1, 1]. This
//! module evaluates the family by its three-term recurrence (also well
//! outside [0, 1], as required by the memory-term kernels) and constructs
//! the k-node Gauss rule for ω by the Golub–Welsch algorithm, plus the
//! 30-node Gauss–Legendre rule on [0, 1] used for far-field kernels.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Orthonormal Jacobi basis under `ω(x) = α(1−x)^(α−1)`.
///
/// Stores the scale factors `√((2j+α)/α)` so repeated evaluations only run
/// the recurrence.
#[derive(Debug, Clone)]
pub struct JacobiBasis {
    alpha: f64,
    count: usize,
    scale: Vec<f64>,
}

impl JacobiBasis {
    /// Basis holding `P_0, …, P_{count−1}` for order `alpha`.
    pub fn new(alpha: f64, count: usize) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
        assert!(count >= 1);
        let scale = (0..count)
            .map(|j| math::sqrt((2.0 * j as f64 + alpha) / alpha))
            .collect();
        Self { alpha, count, scale }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Evaluate `P_0(x), …, P_{count−1}(x)` into `out`.
    ///
    /// The argument may exceed 1 (memory-term kernels evaluate the family at
    /// shifted arguments); values grow like `x^j` but stay in range for the
    /// orders and arguments the solver uses.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.count);
        let a = self.alpha - 1.0;
        let z = 2.0 * x - 1.0;
        out[0] = 1.0;
        if self.count > 1 {
            out[1] = (a + 1.0) + (a + 2.0) * (z - 1.0) * 0.5;
        }
        for n in 2..self.count {
            let nf = n as f64;
            let c1 = 2.0 * nf * (nf + a) * (2.0 * nf + a - 2.0);
            let c2 = (2.0 * nf + a - 1.0) * ((2.0 * nf + a) * (2.0 * nf + a - 2.0) * z + a * a);
            let c3 = 2.0 * (nf + a - 1.0) * (nf - 1.0) * (2.0 * nf + a);
            out[n] = (c2 * out[n - 1] - c3 * out[n - 2]) / c1;
        }
        for (v, s) in out.iter_mut().zip(&self.scale) {
            *v *= s;
        }
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.count];
        self.eval_into(x, &mut out);
        out
    }
}

/// Evaluate the first `s` orthonormal Jacobi polynomials at `x`.
pub fn jacobi_eval(alpha: f64, s: usize, x: f64) -> Vec<f64> {
    JacobiBasis::new(alpha, s).eval(x)
}

/// A Gauss quadrature rule on (0, 1): strictly increasing nodes, positive
/// weights summing to the weight-function mass (1 for every rule here).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Apply the rule to a scalar function.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&c, &b)| b * f(c)).sum()
    }
}

/// Monic three-term recurrence coefficients of the Jacobi family for
/// `ω(x) = α(1−x)^(α−1)` shifted to [0, 1].
fn shifted_recurrence(alpha: f64, k: usize) -> (Vec<f64>, Vec<f64>) {
    let a = alpha - 1.0;
    let mut diag = Vec::with_capacity(k);
    let mut offdiag_sq = Vec::with_capacity(k.saturating_sub(1));
    for j in 0..k {
        let aj = if j == 0 {
            -a / (a + 2.0)
        } else {
            let jf = j as f64;
            -(a * a) / ((2.0 * jf + a) * (2.0 * jf + a + 2.0))
        };
        diag.push((aj + 1.0) * 0.5);
    }
    for j in 1..k {
        let jf = j as f64;
        let bj = 4.0 * jf * jf * (jf + a) * (jf + a)
            / ((2.0 * jf + a) * (2.0 * jf + a) * (2.0 * jf + a + 1.0) * (2.0 * jf + a - 1.0));
        offdiag_sq.push(bj * 0.25);
    }
    (diag, offdiag_sq)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix, accumulating the
/// first row of the eigenvector matrix (Golub–Welsch weight extraction).
///
/// `d` holds the diagonal, `e` the subdiagonal (length ≥ n−1, entry n−1
/// unused). On success `d` holds eigenvalues and `z[i]` the first component
/// of the i-th normalized eigenvector.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = math::abs(d[m]) + math::abs(d[m + 1]);
                if math::abs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::EigenNoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = math::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { math::abs(r) } else { -math::abs(r) });
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = math::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // first-row eigenvector accumulation
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// k-node Gauss–Jacobi rule for `ω(x) = α(1−x)^(α−1)` on (0, 1).
///
/// Nodes are the zeros of `P_k`; the rule has order 2k. Weights come from
/// the squared first eigenvector components of the Golub–Welsch matrix and
/// are rescaled so they sum to 1 exactly in floating point.
pub fn gauss_jacobi(alpha: f64, k: usize) -> Result<QuadratureRule> {
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
    assert!(k >= 1);
    let (mut d, mut e_sq) = shifted_recurrence(alpha, k);
    let mut e: Vec<f64> = e_sq.drain(..).map(math::sqrt).collect();
    e.push(0.0);
    let mut z = vec![0.0; k];
    z[0] = 1.0;
    tridiagonal_ql(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("non-finite node"));
    let nodes: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut weights: Vec<f64> = order.iter().map(|&i| z[i] * z[i]).collect();

    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    if nodes.first().is_some_and(|&c| c <= 0.0) || nodes.last().is_some_and(|&c| c >= 1.0) {
        return Err(Error::EigenNoConvergence);
    }
    Ok(QuadratureRule { nodes, weights })
}

/// 30-node Gauss–Legendre rule on [0, 1] (order 60).
///
/// This is the α = 1 member of the Jacobi family, whose weight is the unit
/// mass on [0, 1].
pub fn gauss_legendre_30() -> QuadratureRule {
    gauss_jacobi(1.0, 30).expect("Legendre rule construction cannot fail")
}
