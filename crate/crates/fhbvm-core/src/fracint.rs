//! Pre-computation of the fractional-integral coefficient tables.
//!
//! Two kernels appear in the discretization:
//!
//! ```text
//! I^α P_j(c) = (1/Γ(α)) ∫₀^c (c−τ)^(α−1) P_j(τ) dτ,          c ∈ (0, 1],
//! J_j^α(x)   = (1/Γ(α)) ∫₀¹ (x−τ)^(α−1) P_j(τ) dτ,           x ≥ 1.
//! ```
//!
//! Both are evaluated without extended precision:
//!
//! - `I^α P_j(c)` is rewritten as `(c^α/Γ(α+1)) Σ_ℓ b_ℓ P_j(c·c_ℓ)` over the
//!   Gauss–Jacobi rule itself, which is exact because the integrand is a
//!   polynomial of degree < s ≤ k.
//! - `J_j^α(x)` for `1 ≤ x < 1.1` splits into two such exact pieces,
//!   `(x^α/Γ(α+1)) Σ_ℓ b_ℓ P_j(c_ℓ x) − ((x−1)^α/Γ(α+1)) Σ_ℓ b_ℓ P_j(1 + c_ℓ(x−1))`;
//!   for `x ≥ 1.1` the integrand is smooth on [0, 1] and a 30-node
//!   Gauss–Legendre rule reaches machine precision.
//!
//! All mesh-dependent `J` arguments are tabulated once per run: for shift
//! ν ≥ 1 the stage arguments are `(r^ν−1)/(r−1) + c_i·r^ν` (uniform: ν + c_i)
//! and the endpoint argument is `(r^(ν+1)−1)/(r−1)` (uniform: ν + 1).

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{JacobiBasis, QuadratureRule};
use crate::linalg::DenseMatrix;
use crate::math;
use crate::mesh::{Mesh, MeshKind};
use crate::special::gamma;
use crate::{Error, Result};

/// Threshold between the exact two-term evaluation and the Gauss–Legendre
/// far-field evaluation of `J_j^α(x)`.
const J_NEAR_FIELD_LIMIT: f64 = 1.1;

/// Table of `I^α P_j(c_i)` with rows over quadrature nodes and columns over
/// basis degrees (k×s).
pub fn ialpha_table(rule: &QuadratureRule, basis: &JacobiBasis) -> DenseMatrix {
    let k = rule.len();
    let s = basis.count();
    let inv_gamma_a1 = 1.0 / gamma(basis.alpha() + 1.0).expect("alpha in (0, 1]");
    let mut table = DenseMatrix::zeros(k, s);
    let mut p = vec![0.0; s];
    for (i, &c) in rule.nodes().iter().enumerate() {
        let row = table.row_mut(i);
        for (&cl, &bl) in rule.nodes().iter().zip(rule.weights()) {
            basis.eval_into(c * cl, &mut p);
            for (acc, v) in row.iter_mut().zip(&p) {
                *acc += bl * v;
            }
        }
        let scale = math::powf(c, basis.alpha()) * inv_gamma_a1;
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    table
}

/// `J_j^α(x)` for `j = 0, …, s−1` at a single argument `x ≥ 1`.
pub fn jalpha_row(
    x: f64,
    basis: &JacobiBasis,
    rule: &QuadratureRule,
    gl: &QuadratureRule,
) -> Result<Vec<f64>> {
    if x < 1.0 || x.is_nan() {
        return Err(Error::Domain("J kernel requires x >= 1"));
    }
    let alpha = basis.alpha();
    let s = basis.count();
    let mut row = vec![0.0; s];
    let mut p = vec![0.0; s];
    if x < J_NEAR_FIELD_LIMIT {
        let inv_gamma_a1 = 1.0 / gamma(alpha + 1.0).expect("alpha in (0, 1]");
        let head = math::powf(x, alpha) * inv_gamma_a1;
        let tail = math::powf(x - 1.0, alpha) * inv_gamma_a1;
        for (&cl, &bl) in rule.nodes().iter().zip(rule.weights()) {
            basis.eval_into(cl * x, &mut p);
            for (acc, v) in row.iter_mut().zip(&p) {
                *acc += head * bl * v;
            }
            // the tail factor vanishes at x = 1, where the shifted
            // evaluation point degenerates to 1
            basis.eval_into(1.0 + cl * (x - 1.0), &mut p);
            for (acc, v) in row.iter_mut().zip(&p) {
                *acc -= tail * bl * v;
            }
        }
    } else {
        let inv_gamma_a = 1.0 / gamma(alpha).expect("alpha in (0, 1]");
        for (&tau, &w) in gl.nodes().iter().zip(gl.weights()) {
            basis.eval_into(tau, &mut p);
            let kernel = inv_gamma_a * w * math::powf(x - tau, alpha - 1.0);
            for (acc, v) in row.iter_mut().zip(&p) {
                *acc += kernel * v;
            }
        }
    }
    Ok(row)
}

/// Memory tables for every shift the mesh can require.
///
/// `nodes[ν−1]` is the k×s block `J_j^α` at the stage arguments of shift ν;
/// `end[ν−1]` is the s-row at the endpoint argument.
#[derive(Debug, Clone)]
pub struct MemoryTables {
    nodes: Vec<DenseMatrix>,
    end: Vec<Vec<f64>>,
}

impl MemoryTables {
    /// Number of tabulated shifts (N−1 for an N-interval mesh).
    pub fn shifts(&self) -> usize {
        self.nodes.len()
    }

    /// Stage-argument block for shift `nu` (1-based).
    pub fn node_block(&self, nu: usize) -> &DenseMatrix {
        &self.nodes[nu - 1]
    }

    /// Endpoint row for shift `nu` (1-based).
    pub fn end_row(&self, nu: usize) -> &[f64] {
        &self.end[nu - 1]
    }
}

/// Tabulate `J_j^α` at all arguments the mesh will ever need.
///
/// Each entry depends only on its own shift index, so construction order is
/// immaterial to the results.
pub fn memory_tables(
    mesh: &Mesh,
    basis: &JacobiBasis,
    rule: &QuadratureRule,
    gl: &QuadratureRule,
) -> Result<MemoryTables> {
    let n = mesh.intervals();
    let k = rule.len();
    let s = basis.count();
    let r = mesh.ratio();
    let uniform = mesh.kind() == MeshKind::Uniform;

    let mut nodes = Vec::with_capacity(n.saturating_sub(1));
    let mut end = Vec::with_capacity(n.saturating_sub(1));
    // base = (r^ν − 1)/(r − 1), pow = r^ν, advanced by base ← base·r + 1
    let mut base = 1.0f64;
    let mut pow = r;
    for nu in 1..n {
        let (offset, scale) = if uniform { (nu as f64, 1.0) } else { (base, pow) };
        let end_arg = offset + scale;
        if !end_arg.is_finite() {
            return Err(Error::MeshOverflow);
        }
        let mut block = DenseMatrix::zeros(k, s);
        for (i, &c) in rule.nodes().iter().enumerate() {
            let row = jalpha_row(offset + c * scale, basis, rule, gl)?;
            block.row_mut(i).copy_from_slice(&row);
        }
        nodes.push(block);
        end.push(jalpha_row(end_arg, basis, rule, gl)?);
        if !uniform {
            base = base * r + 1.0;
            pow *= r;
        }
    }
    Ok(MemoryTables { nodes, end })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gauss_jacobi, gauss_legendre_30};
    use approx::assert_abs_diff_eq;

    fn setup(alpha: f64, k: usize, s: usize) -> (QuadratureRule, JacobiBasis, QuadratureRule) {
        (gauss_jacobi(alpha, k).unwrap(), JacobiBasis::new(alpha, s), gauss_legendre_30())
    }

    #[test]
    fn ialpha_degree_zero_closed_form() {
        // I^α P_0(c) = c^α/Γ(α+1)
        let alpha = 0.5;
        let (rule, basis, _) = setup(alpha, 22, 20);
        let table = ialpha_table(&rule, &basis);
        let inv_g = 1.0 / gamma(alpha + 1.0).unwrap();
        for (i, &c) in rule.nodes().iter().enumerate() {
            assert_abs_diff_eq!(table[(i, 0)], c.powf(alpha) * inv_g, epsilon = 1e-14);
        }
        // spot value: α = 0.5, c = 0.25 → 0.5/Γ(1.5)
        let basis1 = JacobiBasis::new(alpha, 1);
        let row = {
            let mut m = DenseMatrix::zeros(1, 1);
            let mut p = [0.0];
            for (&cl, &bl) in rule.nodes().iter().zip(rule.weights()) {
                basis1.eval_into(0.25 * cl, &mut p);
                m[(0, 0)] += bl * p[0];
            }
            m[(0, 0)] * 0.25f64.powf(alpha) * inv_g
        };
        assert_abs_diff_eq!(row, 0.564_189_583_547_756_3, epsilon = 1e-14);
    }

    #[test]
    fn ialpha_integer_order_antiderivative() {
        // α = 1: I¹P_1(c) = ∫₀^c √3(2x−1) dx = √3(c²−c); zero at c = 1
        let (rule, basis, _) = setup(1.0, 6, 4);
        let table = ialpha_table(&rule, &basis);
        for (i, &c) in rule.nodes().iter().enumerate() {
            assert_abs_diff_eq!(table[(i, 1)], 3.0f64.sqrt() * (c * c - c), epsilon = 1e-14);
        }
    }

    #[test]
    fn jalpha_at_one_is_kronecker() {
        // J_j^α(1) = δ_{j0}/Γ(α+1)
        for alpha in [0.3, 0.5, 0.7, 1.0] {
            let (rule, basis, gl) = setup(alpha, 22, 20);
            let row = jalpha_row(1.0, &basis, &rule, &gl).unwrap();
            assert_abs_diff_eq!(row[0], 1.0 / gamma(alpha + 1.0).unwrap(), epsilon = 1e-13);
            for v in &row[1..] {
                assert!(v.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn jalpha_degree_zero_closed_form_both_branches() {
        // J_0^α(x) = (x^α − (x−1)^α)/Γ(α+1) for every x ≥ 1
        let alpha = 0.5;
        let (rule, basis, gl) = setup(alpha, 22, 20);
        let inv_g = 1.0 / gamma(alpha + 1.0).unwrap();
        let mut x = 1.0;
        while x <= 50.0 {
            let row = jalpha_row(x, &basis, &rule, &gl).unwrap();
            let expect = (x.powf(alpha) - (x - 1.0).powf(alpha)) * inv_g;
            assert!(
                (row[0] - expect).abs() < 1e-13 * expect.abs().max(1.0),
                "x = {x}: {} vs {expect}",
                row[0]
            );
            x += 0.35;
        }
        // the frozen reference values straddle the branch split
        let row = jalpha_row(2.0, &basis, &rule, &gl).unwrap();
        assert_abs_diff_eq!(row[0], 0.467_389_954_510_218_14, epsilon = 1e-14);
        let row = jalpha_row(1.5, &basis, &rule, &gl).unwrap();
        assert_abs_diff_eq!(row[0], 0.584_092_037_082_476_6, epsilon = 1e-14);
    }

    #[test]
    fn jalpha_reference_values() {
        // frozen from 40-digit quadrature of the defining integral
        let cases: [(f64, usize, f64, f64); 5] = [
            (0.3, 7, 1.05, -0.032_829_279_881_282_858),
            (0.5, 7, 1.05, -0.031_153_145_651_761_651),
            (0.5, 5, 2.0, -0.012_229_219_137_507_884),
            (0.3, 19, 1.2, -9.598_433_818_980_579e-4),
            (0.7, 4, 30.0, -7.950_827_906_154_351e-3),
        ];
        for (alpha, j, x, expect) in cases {
            let (rule, basis, gl) = setup(alpha, 22, 20);
            let row = jalpha_row(x, &basis, &rule, &gl).unwrap();
            assert!(
                (row[j] / expect - 1.0).abs() < 1e-11,
                "J_{j}^{alpha}({x}) = {} vs {expect}",
                row[j]
            );
        }
    }

    #[test]
    fn jalpha_far_tail_reference_values() {
        // graded benchmark meshes push the kernel argument past 1e11;
        // frozen from 45-digit quadrature of the defining integral
        let half: [(usize, f64); 3] = [
            (0, 1.784_124_116_157_231_4e-6),
            (5, -3.725_988_716_182_779_2e-8),
            (19, -2.720_383_290_825_841_2e-9),
        ];
        let (rule, basis, gl) = setup(0.5, 22, 20);
        let row = jalpha_row(1e11, &basis, &rule, &gl).unwrap();
        for (j, expect) in half {
            assert!(
                (row[j] / expect - 1.0).abs() < 1e-11,
                "J_{j}^0.5(1e11) = {} vs {expect}",
                row[j]
            );
        }
        let (rule, basis, gl) = setup(1.0 / 3.0, 22, 20);
        let row = jalpha_row(2.5e10, &basis, &rule, &gl).unwrap();
        let expect = -3.781_756_205_449_590_8e-10;
        assert!((row[7] / expect - 1.0).abs() < 1e-11, "J_7^(1/3)(2.5e10) = {}", row[7]);
    }

    #[test]
    fn jalpha_branch_consistency_at_threshold() {
        // both evaluations agree through the 1.1 split
        for alpha in [0.3, 0.5, 0.7] {
            let (rule, basis, gl) = setup(alpha, 22, 20);
            let inv_g1 = 1.0 / gamma(alpha + 1.0).unwrap();
            for x in [1.09, 1.10, 1.11] {
                let row = jalpha_row(x, &basis, &rule, &gl).unwrap();
                // exact two-term form, evaluated regardless of branch
                let mut exact = vec![0.0; 20];
                let mut p = vec![0.0; 20];
                let head = x.powf(alpha) * inv_g1;
                let tail = (x - 1.0f64).powf(alpha) * inv_g1;
                for (&cl, &bl) in rule.nodes().iter().zip(rule.weights()) {
                    basis.eval_into(cl * x, &mut p);
                    for (acc, v) in exact.iter_mut().zip(&p) {
                        *acc += head * bl * v;
                    }
                    basis.eval_into(1.0 + cl * (x - 1.0), &mut p);
                    for (acc, v) in exact.iter_mut().zip(&p) {
                        *acc -= tail * bl * v;
                    }
                }
                // the two-term form is exact in exact arithmetic but computes
                // small values as differences of sums that grow like
                // |P_19(x)| ≈ 1e5 near x = 1.1, so its rounding floor is
                // about 1e-11; the far-field rule is machine accurate there
                for (a, b) in row.iter().zip(&exact) {
                    assert!(
                        (a - b).abs() < 5e-10 * (1.0 + b.abs()),
                        "branch mismatch at α={alpha}, x={x}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn jalpha_domain() {
        let (rule, basis, gl) = setup(0.5, 4, 4);
        assert!(jalpha_row(0.999, &basis, &rule, &gl).is_err());
    }

    #[test]
    fn memory_arguments_uniform_closed_form() {
        // shift 1, j = 0, α = 0.5: J_0(1 + c_i) = ((1+c_i)^α − c_i^α)/Γ(1.5)
        let alpha = 0.5;
        let (rule, basis, gl) = setup(alpha, 8, 6);
        let mesh = Mesh::uniform(1.0, 3);
        let tables = memory_tables(&mesh, &basis, &rule, &gl).unwrap();
        assert_eq!(tables.shifts(), 2);
        let inv_g = 1.0 / gamma(alpha + 1.0).unwrap();
        for (i, &c) in rule.nodes().iter().enumerate() {
            let expect = ((1.0 + c).powf(alpha) - c.powf(alpha)) * inv_g;
            assert_abs_diff_eq!(tables.node_block(1)[(i, 0)], expect, epsilon = 1e-13);
        }
        // endpoint arguments are ν + 1
        assert_abs_diff_eq!(
            tables.end_row(1)[0],
            (2.0f64.powf(alpha) - 1.0) * inv_g,
            epsilon = 1e-13
        );
        // kernel decay: |J_0| at the endpoint shrinks with the shift
        assert!(tables.end_row(2)[0].abs() < tables.end_row(1)[0].abs());
    }

    #[test]
    fn memory_arguments_graded() {
        // r = 2, ν = 2 → stage argument 3 + 4c_i, endpoint argument 7
        let alpha = 0.5;
        let (rule, basis, gl) = setup(alpha, 8, 6);
        let mesh = Mesh::graded(1.0, 2.0, 3, 7.0);
        let tables = memory_tables(&mesh, &basis, &rule, &gl).unwrap();
        for (i, &c) in rule.nodes().iter().enumerate() {
            let expect = jalpha_row(3.0 + 4.0 * c, &basis, &rule, &gl).unwrap();
            for (j, v) in expect.iter().enumerate() {
                assert_abs_diff_eq!(tables.node_block(2)[(i, j)], *v, epsilon = 1e-15);
            }
        }
        let expect_end = jalpha_row(7.0, &basis, &rule, &gl).unwrap();
        for (j, v) in expect_end.iter().enumerate() {
            assert_abs_diff_eq!(tables.end_row(2)[j], *v, epsilon = 1e-15);
        }
    }
}
