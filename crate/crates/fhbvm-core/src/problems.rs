//! Benchmark problem registry: four fractional test problems with known
//! right-hand sides, Jacobians, and (where available) exact solutions.

use alloc::vec;


use crate::linalg::DenseMatrix;
use crate::math;
use crate::solver::FdeProblem;
use crate::special::{gamma, ml_half};
use crate::{Error, Result};

/// A registered benchmark problem.
#[derive(Clone)]
pub struct BenchmarkEntry {
    pub name: &'static str,
    pub summary: &'static str,
    /// Default fractional order; adjustable only when `alpha_parametric`.
    pub default_alpha: f64,
    pub alpha_parametric: bool,
    pub default_t_end: f64,
    /// Interval parameters used in the reference experiments.
    pub suggested_m: &'static [usize],
    pub has_exact: bool,
    build: fn(f64, f64) -> FdeProblem,
}

impl BenchmarkEntry {
    /// Instantiate with optional α and horizon overrides.
    pub fn build(&self, alpha: Option<f64>, t_end: Option<f64>) -> Result<FdeProblem> {
        let alpha = match alpha {
            Some(a) if !self.alpha_parametric && a != self.default_alpha => {
                return Err(Error::Config("problem has a fixed fractional order"));
            }
            Some(a) => {
                if !(a > 0.0 && a <= 1.0) {
                    return Err(Error::Config("alpha must lie in (0, 1]"));
                }
                a
            }
            None => self.default_alpha,
        };
        let t_end = t_end.unwrap_or(self.default_t_end);
        if t_end.is_nan() || t_end <= 0.0 {
            return Err(Error::Config("horizon must be positive"));
        }
        Ok((self.build)(alpha, t_end))
    }

    pub fn build_default(&self) -> FdeProblem {
        (self.build)(self.default_alpha, self.default_t_end)
    }
}

impl core::fmt::Debug for BenchmarkEntry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BenchmarkEntry").field("name", &self.name).finish()
    }
}

/// All registered benchmark problems.
pub fn registry() -> &'static [BenchmarkEntry] {
    const ENTRIES: [BenchmarkEntry; 4] = [
        BenchmarkEntry {
            name: "ex1",
            summary: "scalar nonlinear problem with forced polynomial-power solution",
            default_alpha: 0.3,
            alpha_parametric: true,
            default_t_end: 1.0,
            suggested_m: &[2, 3, 4, 5],
            has_exact: true,
            build: |alpha, t_end| example1(alpha).with_t_end(t_end),
        },
        BenchmarkEntry {
            name: "ex2",
            summary: "stiff linear 2x2 system with Mittag-Leffler solution",
            default_alpha: 0.5,
            alpha_parametric: false,
            default_t_end: 20.0,
            suggested_m: &[5, 6, 7, 8, 9, 10],
            has_exact: true,
            build: |_, t_end| example2().with_t_end(t_end),
        },
        BenchmarkEntry {
            name: "ex3",
            summary: "nonlinear 2x2 system with algebraic-power solution",
            default_alpha: 1.0 / 3.0,
            alpha_parametric: false,
            default_t_end: 1.0,
            suggested_m: &[2],
            has_exact: true,
            build: |_, t_end| example3().with_t_end(t_end),
        },
        BenchmarkEntry {
            name: "ex4",
            summary: "fractional Brusselator model (no closed-form solution)",
            default_alpha: 0.7,
            alpha_parametric: false,
            default_t_end: 5.0,
            suggested_m: &[5],
            has_exact: false,
            build: |_, t_end| example4().with_t_end(t_end),
        },
    ];
    &ENTRIES
}

/// Look up a registry entry by name.
pub fn find(name: &str) -> Option<&'static BenchmarkEntry> {
    registry().iter().find(|e| e.name == name)
}

/// Scalar problem with solution `y(t) = t⁸ − 3t^(4+α/2) + (9/4)t^α`:
///
/// ```text
/// y^(α) = −|y|^1.5 + (8!/Γ(9−α))·t^(8−α) − 3(Γ(5+α/2)/Γ(5−α/2))·t^(4−α/2)
///         + ((3/2)t^(α/2) − t⁴)³ + (9/4)Γ(α+1),    y(0) = 0,  t ∈ [0, 1].
/// ```
pub fn example1(alpha: f64) -> FdeProblem {
    let c8 = 40320.0 / gamma_of(9.0 - alpha);
    let c4 = 3.0 * gamma_of(5.0 + alpha / 2.0) / gamma_of(5.0 - alpha / 2.0);
    let c0 = 2.25 * gamma_of(alpha + 1.0);
    let rhs = move |t: f64, y: &[f64], out: &mut [f64]| {
        let cube_base = 1.5 * math::powf(t, alpha / 2.0) - math::powf(t, 4.0);
        out[0] = -math::powf(math::abs(y[0]), 1.5)
            + c8 * math::powf(t, 8.0 - alpha)
            - c4 * math::powf(t, 4.0 - alpha / 2.0)
            + cube_base * cube_base * cube_base
            + c0;
    };
    let jacobian = |_t: f64, y: &[f64], jac: &mut DenseMatrix| {
        // d(−|y|^1.5)/dy = −1.5·|y|^0.5·sign(y), zero at y = 0
        let sign = if y[0] > 0.0 {
            1.0
        } else if y[0] < 0.0 {
            -1.0
        } else {
            0.0
        };
        jac[(0, 0)] = -1.5 * math::sqrt(math::abs(y[0])) * sign;
    };
    let exact = move |t: f64, out: &mut [f64]| {
        out[0] = math::powf(t, 8.0) - 3.0 * math::powf(t, 4.0 + alpha / 2.0)
            + 2.25 * math::powf(t, alpha);
    };
    FdeProblem::new(alpha, vec![0.0], 1.0, rhs).with_jacobian(jacobian).with_exact(exact)
}

/// Linear system `y^(1/2) = Ay`, `A = [[−50, 0], [−49, −1]]`, `y(0) = (2, 3)`,
/// with solution components built from `E_{1/2}(−λ√t)`.
pub fn example2() -> FdeProblem {
    const A: [[f64; 2]; 2] = [[-50.0, 0.0], [-49.0, -1.0]];
    let rhs = |_t: f64, y: &[f64], out: &mut [f64]| {
        out[0] = A[0][0] * y[0];
        out[1] = A[1][0] * y[0] + A[1][1] * y[1];
    };
    let jacobian = |_t: f64, _y: &[f64], jac: &mut DenseMatrix| {
        jac[(0, 0)] = A[0][0];
        jac[(0, 1)] = A[0][1];
        jac[(1, 0)] = A[1][0];
        jac[(1, 1)] = A[1][1];
    };
    let exact = |t: f64, out: &mut [f64]| {
        let sqrt_t = math::sqrt(t);
        let fast = ml_half(50.0 * sqrt_t);
        let slow = ml_half(sqrt_t);
        out[0] = 2.0 * fast;
        out[1] = 2.0 * fast + slow;
    };
    FdeProblem::new(0.5, vec![2.0, 3.0], 20.0, rhs).with_jacobian(jacobian).with_exact(exact)
}

/// Guard for the square-root singularity of the example-3 Jacobian at
/// `y₂ = 0`; the Jacobian only preconditions the iteration, so smoothing it
/// at the scale of the finite-difference increment costs no accuracy.
const SQRT_JACOBIAN_FLOOR: f64 = 1e-8;

/// Nonlinear system for α = 1/3 with solution `(t^(2/3) + 1, t^(4/3))`:
///
/// ```text
/// y₁^(1/3) = (t/10)(y₁³ − (√y₂ + 1)³) + (Γ(5/3)/Γ(4/3))·t^(1/3),
/// y₂^(1/3) = (1/3)(y₂³ − (y₁ − 1)⁶) + Γ(7/3)·t,       y(0) = (1, 0).
/// ```
pub fn example3() -> FdeProblem {
    let alpha = 1.0 / 3.0;
    let c1 = gamma_of(5.0 / 3.0) / gamma_of(4.0 / 3.0);
    let c2 = gamma_of(7.0 / 3.0);
    let rhs = move |t: f64, y: &[f64], out: &mut [f64]| {
        let root = math::sqrt(y[1]) + 1.0;
        out[0] = 0.1 * t * (y[0] * y[0] * y[0] - root * root * root)
            + c1 * math::powf(t, 1.0 / 3.0);
        let shifted = y[0] - 1.0;
        out[1] = (y[1] * y[1] * y[1] - math::powf(shifted, 6.0)) / 3.0 + c2 * t;
    };
    let jacobian = |t: f64, y: &[f64], jac: &mut DenseMatrix| {
        let y2 = y[1].max(SQRT_JACOBIAN_FLOOR);
        let root = math::sqrt(y2);
        jac[(0, 0)] = 0.3 * t * y[0] * y[0];
        jac[(0, 1)] = -0.15 * t * (root + 1.0) * (root + 1.0) / root;
        let shifted = y[0] - 1.0;
        jac[(1, 0)] = -2.0 * math::powf(shifted, 5.0);
        jac[(1, 1)] = y[1] * y[1];
    };
    let exact = |t: f64, out: &mut [f64]| {
        out[0] = math::powf(t, 2.0 / 3.0) + 1.0;
        out[1] = math::powf(t, 4.0 / 3.0);
    };
    FdeProblem::new(alpha, vec![1.0, 0.0], 1.0, rhs).with_jacobian(jacobian).with_exact(exact)
}

/// Fractional Brusselator, α = 0.7, `y(0) = (1.2, 2.8)`, `t ∈ [0, 5]`:
///
/// ```text
/// y₁^(0.7) = 1 − 4y₁ + y₁²y₂,
/// y₂^(0.7) = 3y₁ − y₁²y₂.
/// ```
pub fn example4() -> FdeProblem {
    let rhs = |_t: f64, y: &[f64], out: &mut [f64]| {
        let coupling = y[0] * y[0] * y[1];
        out[0] = 1.0 - 4.0 * y[0] + coupling;
        out[1] = 3.0 * y[0] - coupling;
    };
    let jacobian = |_t: f64, y: &[f64], jac: &mut DenseMatrix| {
        jac[(0, 0)] = -4.0 + 2.0 * y[0] * y[1];
        jac[(0, 1)] = y[0] * y[0];
        jac[(1, 0)] = 3.0 - 2.0 * y[0] * y[1];
        jac[(1, 1)] = -y[0] * y[0];
    };
    FdeProblem::new(0.7, vec![1.2, 2.8], 5.0, rhs).with_jacobian(jacobian)
}

/// Classical-reduction test problem `y′ = −y`, `y(0) = 1` (α = 1), with
/// exponential solution.
pub fn decay_test_problem() -> FdeProblem {
    FdeProblem::new(1.0, vec![1.0], 1.0, |_t, y: &[f64], out: &mut [f64]| out[0] = -y[0])
        .with_jacobian(|_t, _y, jac: &mut DenseMatrix| jac[(0, 0)] = -1.0)
        .with_exact(|t, out: &mut [f64]| out[0] = math::exp(-t))
}

fn gamma_of(x: f64) -> f64 {
    gamma(x).expect("benchmark exponents are positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn registry_lookup() {
        assert_eq!(registry().len(), 4);
        assert!(find("ex2").is_some());
        assert!(find("nope").is_none());
        assert!(find("ex4").map(|e| !e.has_exact).unwrap());
    }

    #[test]
    fn fixed_alpha_problems_reject_overrides() {
        let entry = find("ex2").unwrap();
        assert!(entry.build(Some(0.7), None).is_err());
        assert!(entry.build(Some(0.5), None).is_ok());
        let ex1 = find("ex1").unwrap();
        assert!(ex1.build(Some(0.7), None).is_ok());
    }

    #[test]
    fn example1_values() {
        let p = example1(0.3);
        // all power terms vanish at t = 0: f(0, 0) = (9/4)Γ(α+1)
        let mut out = [0.0];
        p.rhs(0.0, &[0.0], &mut out);
        assert_abs_diff_eq!(out[0], 2.25 * gamma_of(1.3), epsilon = 1e-14);
        // exact endpoint values: y(0) = 0, y(1) = 1 − 3 + 9/4
        let q = p.exact(0.0).unwrap();
        assert_eq!(q[0], 0.0);
        let q = p.exact(1.0).unwrap();
        assert_abs_diff_eq!(q[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn example2_values() {
        let p = example2();
        let q = p.exact(0.0).unwrap();
        assert_abs_diff_eq!(q[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q[1], 3.0, epsilon = 1e-15);
        // triangular constant Jacobian has eigenvalues −50 and −1
        let jac = p.jacobian_at(0.0, &[2.0, 3.0]);
        assert_eq!(jac[(0, 0)], -50.0);
        assert_eq!(jac[(1, 1)], -1.0);
        assert_eq!(jac[(0, 1)], 0.0);
        // components decay and stay positive
        let early = p.exact(0.001).unwrap();
        let late = p.exact(20.0).unwrap();
        for (e, l) in early.iter().zip(&late) {
            assert!(*e > *l && *l > 0.0);
        }
    }

    #[test]
    fn example3_values() {
        let p = example3();
        let q = p.exact(1.0).unwrap();
        assert_abs_diff_eq!(q[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q[1], 1.0, epsilon = 1e-14);
        let q = p.exact(0.0).unwrap();
        assert_eq!(q, vec![1.0, 0.0]);
        // on the exact trajectory the nonlinear brackets cancel:
        // f = (Γ(5/3)/Γ(4/3)·t^(1/3), Γ(7/3)·t)
        for t in [0.1, 0.5, 0.9] {
            let y = p.exact(t).unwrap();
            let mut out = [0.0, 0.0];
            p.rhs(t, &y, &mut out);
            let c1 = gamma_of(5.0 / 3.0) / gamma_of(4.0 / 3.0);
            assert_abs_diff_eq!(out[0], c1 * t.powf(1.0 / 3.0), epsilon = 1e-12);
            assert_abs_diff_eq!(out[1], gamma_of(7.0 / 3.0) * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn example4_values() {
        let p = example4();
        let mut out = [0.0, 0.0];
        p.rhs(0.0, &[1.2, 2.8], &mut out);
        assert_abs_diff_eq!(out[0], 0.232, epsilon = 1e-14);
        assert_abs_diff_eq!(out[1], -0.432, epsilon = 1e-14);
        // classical Brusselator equilibrium of this parameterization
        p.rhs(0.0, &[1.0, 3.0], &mut out);
        assert_abs_diff_eq!(out[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], 0.0, epsilon = 1e-15);
        let jac = p.jacobian_at(0.0, &[1.2, 2.8]);
        assert_abs_diff_eq!(jac[(0, 0)] + jac[(1, 1)], 1.28, epsilon = 1e-14);
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        // sample states away from the √y₂ singularity
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            // xorshift64*, plenty for test sampling
            rng_state ^= rng_state >> 12;
            rng_state ^= rng_state << 25;
            rng_state ^= rng_state >> 27;
            (rng_state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64
        };
        let problems: Vec<(FdeProblem, usize)> =
            vec![(example1(0.3), 1), (example2(), 2), (example3(), 2), (example4(), 2)];
        for (p, dim) in &problems {
            for _ in 0..20 {
                let t = 0.05 + 0.9 * next();
                let y: Vec<f64> = (0..*dim).map(|_| 0.1 + 1.9 * next()).collect();
                let analytic = p.jacobian_at(t, &y);
                // forward differences directly against the rhs
                let m = *dim;
                let mut f0 = vec![0.0; m];
                p.rhs(t, &y, &mut f0);
                let sqrt_eps = f64::EPSILON.sqrt();
                for col in 0..m {
                    let delta = sqrt_eps * (1.0 + y[col].abs());
                    let mut yp = y.clone();
                    yp[col] += delta;
                    let mut fp = vec![0.0; m];
                    p.rhs(t, &yp, &mut fp);
                    for row in 0..m {
                        let fd = (fp[row] - f0[row]) / delta;
                        assert!(
                            (analytic[(row, col)] - fd).abs()
                                <= 1e-6 * (1.0 + analytic[(row, col)].abs()),
                            "problem dim {m} jac({row},{col}): analytic {} vs fd {fd}",
                            analytic[(row, col)]
                        );
                    }
                }
            }
        }
    }
}
