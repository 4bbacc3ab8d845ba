//! The spectral stepper: per-step discrete problem in coefficient form, the
//! fixed-point and blended nonlinear iterations with automatic switching,
//! step advance, and dense output.
//!
//! On interval `n` the local approximation is
//!
//! ```text
//! σ_n(c·h_n) = φ_{n−1}(c) + h_n^α Σ_j I^α P_j(c) · γ_j^n,
//! ```
//!
//! where the memory term `φ` accumulates all previous intervals through the
//! `J` kernels and the coefficients `γ_j^n` solve the k-stage discrete
//! problem
//!
//! ```text
//! γ_j^n = Σ_i b_i P_j(c_i) f(t_{n−1} + c_i h_n, Y_i),
//! Y_i   = φ_{n−1}(c_i) + h_n^α Σ_ℓ I^α P_ℓ(c_i) γ_ℓ^n.
//! ```
//!
//! Coefficients are carried as m×s blocks (column j is `γ_j`), so every
//! Kronecker product in the iteration collapses to a small dense product.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{gauss_jacobi, gauss_legendre_30, JacobiBasis, QuadratureRule};
use crate::errest::{self, ErrorEstimate};
use crate::fracint::{ialpha_table, jalpha_row, memory_tables, MemoryTables};
use crate::linalg::{eig, lu_factor, norm_inf_slice, ComplexSpectrum, DenseMatrix};
use crate::math;
use crate::mesh::{plan_mesh, Mesh, MeshKind};
use crate::special::gamma;
use crate::{Error, Result};

type RhsFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type JacobianFn = dyn Fn(f64, &[f64], &mut DenseMatrix) + Send + Sync;
type ExactFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// An initial value problem `y^(α)(t) = f(t, y)`, `y(0) = y0`, on `[0, T]`.
pub struct FdeProblem {
    alpha: f64,
    y0: Vec<f64>,
    t_end: f64,
    rhs: Box<RhsFn>,
    jacobian: Option<Box<JacobianFn>>,
    exact: Option<Box<ExactFn>>,
}

impl FdeProblem {
    pub fn new(
        alpha: f64,
        y0: Vec<f64>,
        t_end: f64,
        rhs: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
        assert!(!y0.is_empty(), "state must have at least one component");
        assert!(t_end > 0.0, "horizon must be positive");
        Self { alpha, y0, t_end, rhs: Box::new(rhs), jacobian: None, exact: None }
    }

    /// Attach an analytic Jacobian `∂f/∂y`; without one a forward
    /// finite-difference approximation is used.
    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(f64, &[f64], &mut DenseMatrix) + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Box::new(jacobian));
        self
    }

    /// Attach the exact solution (used for accuracy reporting only).
    pub fn with_exact(
        mut self,
        exact: impl Fn(f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(Box::new(exact));
        self
    }

    /// Override the integration horizon.
    pub fn with_t_end(mut self, t_end: f64) -> Self {
        assert!(t_end > 0.0);
        self.t_end = t_end;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) {
        (self.rhs)(t, y, out);
    }

    pub fn exact(&self, t: f64) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|f| {
            let mut out = vec![0.0; self.dim()];
            f(t, &mut out);
            out
        })
    }

    /// Jacobian at `(t, y)`: analytic when supplied, otherwise forward
    /// differences with increment `√ε·(1 + |y_i|)` per column.
    pub fn jacobian_at(&self, t: f64, y: &[f64]) -> DenseMatrix {
        let m = self.dim();
        let mut jac = DenseMatrix::zeros(m, m);
        if let Some(j) = &self.jacobian {
            j(t, y, &mut jac);
            return jac;
        }
        let mut f0 = vec![0.0; m];
        self.rhs(t, y, &mut f0);
        let mut yp = y.to_vec();
        let mut fp = vec![0.0; m];
        let sqrt_eps = math::sqrt(f64::EPSILON);
        for col in 0..m {
            let delta = sqrt_eps * (1.0 + math::abs(y[col]));
            yp[col] = y[col] + delta;
            self.rhs(t, &yp, &mut fp);
            yp[col] = y[col];
            for row in 0..m {
                jac[(row, col)] = (fp[row] - f0[row]) / delta;
            }
        }
        jac
    }
}

impl core::fmt::Debug for FdeProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FdeProblem")
            .field("alpha", &self.alpha)
            .field("dim", &self.dim())
            .field("t_end", &self.t_end)
            .field("has_jacobian", &self.has_jacobian())
            .field("has_exact", &self.has_exact())
            .finish()
    }
}

/// Method parameters and tolerances.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Quadrature node count k (k ≥ s).
    pub k: usize,
    /// Basis degree count s.
    pub s: usize,
    /// Mesh probe acceptance tolerance.
    pub tol_mesh: f64,
    /// Nonlinear iteration stop tolerance (increment-based, relative floor).
    pub tol_nl: f64,
    /// Nonlinear iteration budget per step.
    pub max_nl_iters: usize,
    /// Fixed-point/blended switch threshold (< 1).
    pub switch_tol: f64,
    /// Mesh probe refinement budget.
    pub max_probe_level: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: 22,
            s: 20,
            tol_mesh: 2e-13,
            tol_nl: 1e-14,
            max_nl_iters: 100,
            switch_tol: 0.5,
            max_probe_level: 25,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.s < 1 || self.k < self.s {
            return Err(Error::Config("need k >= s >= 1"));
        }
        if !(self.switch_tol > 0.0 && self.switch_tol < 1.0) {
            return Err(Error::Config("switch tolerance must lie in (0, 1)"));
        }
        if !(self.tol_nl > 0.0 && self.tol_mesh > 0.0) {
            return Err(Error::Config("tolerances must be positive"));
        }
        Ok(())
    }
}

/// Everything precomputed for one (mesh, α, k, s) combination.
#[derive(Debug, Clone)]
pub struct CoefficientTables {
    rule: QuadratureRule,
    gl: QuadratureRule,
    basis: JacobiBasis,
    /// s×k projector `P_sᵀΩ`.
    proj: DenseMatrix,
    /// k×s table of `I^α P_j(c_i)`.
    ialpha: DenseMatrix,
    /// s×s matrix `X_s^α = P_sᵀΩ I_s^α`.
    x_mat: DenseMatrix,
    /// Transposed inverse of `X_s^α`.
    x_inv_t: DenseMatrix,
    xi: f64,
    rho_star: f64,
    norm_proj: f64,
    norm_ialpha: f64,
    inv_gamma_a1: f64,
    memory: MemoryTables,
}

impl CoefficientTables {
    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn basis(&self) -> &JacobiBasis {
        &self.basis
    }

    pub fn ialpha(&self) -> &DenseMatrix {
        &self.ialpha
    }

    pub fn projector(&self) -> &DenseMatrix {
        &self.proj
    }

    pub fn x_matrix(&self) -> &DenseMatrix {
        &self.x_mat
    }

    /// Blending parameter ξ.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Maximum amplification factor ρ* of the blended iteration.
    pub fn rho_star(&self) -> f64 {
        self.rho_star
    }

    pub fn memory(&self) -> &MemoryTables {
        &self.memory
    }
}

/// Choose ξ among the eigenvalue moduli of `X_s^α` so the amplification
/// factor `max_λ |λ−ξ|²/(2ξ|λ|)` is smallest; returns `(ξ, ρ*)`.
fn select_blending(spectrum: &ComplexSpectrum) -> (f64, f64) {
    let mut best_xi = 0.0;
    let mut best_rho = f64::INFINITY;
    for (re, im) in spectrum.iter() {
        let xi = math::hypot(re, im);
        if xi <= 0.0 {
            continue;
        }
        let rho = amplification_factor(spectrum, xi);
        if rho < best_rho {
            best_rho = rho;
            best_xi = xi;
        }
    }
    (best_xi, best_rho)
}

pub(crate) fn amplification_factor(spectrum: &ComplexSpectrum, xi: f64) -> f64 {
    let mut rho: f64 = 0.0;
    for (re, im) in spectrum.iter() {
        let modulus = math::hypot(re, im);
        if modulus == 0.0 {
            return f64::INFINITY;
        }
        let dist_sq = (re - xi) * (re - xi) + im * im;
        rho = rho.max(dist_sq / (2.0 * xi * modulus));
    }
    rho
}

/// Build all coefficient tables for a finalized mesh.
pub fn build_tables(
    problem: &FdeProblem,
    mesh: &Mesh,
    cfg: &SolverConfig,
) -> Result<CoefficientTables> {
    cfg.validate()?;
    let alpha = problem.alpha();
    let rule = gauss_jacobi(alpha, cfg.k)?;
    let gl = gauss_legendre_30();
    let basis = JacobiBasis::new(alpha, cfg.s);

    // proj[j][i] = b_i · P_j(c_i)
    let mut proj = DenseMatrix::zeros(cfg.s, cfg.k);
    let mut p = vec![0.0; cfg.s];
    for (i, (&c, &b)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        basis.eval_into(c, &mut p);
        for j in 0..cfg.s {
            proj[(j, i)] = b * p[j];
        }
    }

    let ialpha = ialpha_table(&rule, &basis);
    let x_mat = proj.mul(&ialpha);
    let spectrum = eig(&x_mat)?;
    let (xi, rho_star) = select_blending(&spectrum);
    let x_inv_t = lu_factor(&x_mat)?.inverse().transpose();
    let norm_proj = proj.norm_inf();
    let norm_ialpha = ialpha.norm_inf();
    let inv_gamma_a1 = 1.0 / gamma(alpha + 1.0)?;
    let memory = memory_tables(mesh, &basis, &rule, &gl)?;

    Ok(CoefficientTables {
        rule,
        gl,
        basis,
        proj,
        ialpha,
        x_mat,
        x_inv_t,
        xi,
        rho_star,
        norm_proj,
        norm_ialpha,
        inv_gamma_a1,
        memory,
    })
}

/// Converged coefficient blocks `Γ^ν` (m×s each), one per completed step.
#[derive(Debug, Clone, Default)]
pub struct StepHistory {
    blocks: Vec<DenseMatrix>,
}

impl StepHistory {
    pub fn from_blocks(blocks: Vec<DenseMatrix>) -> Self {
        Self { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block of step `nu` (1-based).
    pub fn block(&self, nu: usize) -> &DenseMatrix {
        &self.blocks[nu - 1]
    }

    fn push(&mut self, block: DenseMatrix) {
        self.blocks.push(block);
    }
}

/// Wall-clock timings in seconds (zero when built without `std`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    /// Mesh planning plus coefficient-table construction.
    pub preprocess: f64,
    /// Time stepping.
    pub solve: f64,
    /// Table construction for the doubled-mesh error pass.
    pub err_preprocess: f64,
    /// Time stepping on the doubled mesh.
    pub err_solve: f64,
}

pub(crate) struct Stopwatch {
    #[cfg(feature = "std")]
    last: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(feature = "std")]
            last: std::time::Instant::now(),
        }
    }

    /// Seconds since construction or the previous lap.
    #[cfg(feature = "std")]
    pub(crate) fn lap(&mut self) -> f64 {
        let now = std::time::Instant::now();
        let dt = now.duration_since(self.last).as_secs_f64();
        self.last = now;
        dt
    }

    #[cfg(not(feature = "std"))]
    pub(crate) fn lap(&mut self) -> f64 {
        0.0
    }
}

/// A completed solve: mesh, endpoint approximations, retained coefficient
/// history for dense output, timings, and an optional error estimate.
#[derive(Debug)]
pub struct Solution {
    pub mesh: Mesh,
    /// `ȳ_0, …, ȳ_N` (the first entry is the initial value).
    pub endpoints: Vec<Vec<f64>>,
    pub history: StepHistory,
    pub stats: Stats,
    pub error_estimate: Option<ErrorEstimate>,
    tables: CoefficientTables,
}

/// Which nonlinear iteration a step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationKind {
    FixedPoint,
    Blended,
}

/// Switch test: the fixed-point iteration is kept whenever its contraction
/// bound `h^α·‖f₀′‖·‖P_sᵀΩ‖·‖I_s^α‖` stays below the threshold.
pub fn step_switch(
    h: f64,
    alpha: f64,
    jacobian_norm: f64,
    tables: &CoefficientTables,
    cfg: &SolverConfig,
) -> IterationKind {
    let bound = math::powf(h, alpha) * jacobian_norm * tables.norm_proj * tables.norm_ialpha;
    if bound <= cfg.switch_tol {
        IterationKind::FixedPoint
    } else {
        IterationKind::Blended
    }
}

/// Memory term at step `n`: the k×m matrix of `φ_{n−1}(c_i)` rows and the
/// m-vector `φ_{n−1}(1)` used by the step advance.
pub fn memory_term(
    history: &StepHistory,
    tables: &CoefficientTables,
    mesh: &Mesh,
    n: usize,
    y0: &[f64],
) -> (DenseMatrix, Vec<f64>) {
    let k = tables.rule.len();
    let s = tables.basis.count();
    let m = y0.len();
    let alpha = tables.basis.alpha();
    let mut phi = DenseMatrix::from_fn(k, m, |_, col| y0[col]);
    let mut phi_end = y0.to_vec();
    if n <= 1 {
        return (phi, phi_end);
    }
    let ratio_alpha = math::powf(mesh.ratio(), alpha);
    let mut weight = math::powf(mesh.h1(), alpha); // h₁^α · r^(α(ν−1))
    for nu in 1..n {
        let shift = n - nu;
        let block = tables.memory.node_block(shift);
        let end_row = tables.memory.end_row(shift);
        let coeffs = history.block(nu);
        for i in 0..k {
            let kernel = block.row(i);
            for row in 0..m {
                let gam = coeffs.row(row);
                let mut acc = 0.0;
                for j in 0..s {
                    acc += kernel[j] * gam[j];
                }
                phi[(i, row)] += weight * acc;
            }
        }
        for (row, phi_v) in phi_end.iter_mut().enumerate() {
            let gam = coeffs.row(row);
            let mut acc = 0.0;
            for j in 0..s {
                acc += end_row[j] * gam[j];
            }
            *phi_v += weight * acc;
        }
        weight *= ratio_alpha;
    }
    (phi, phi_end)
}

/// Stage states `Y_i = φ(c_i) + h^α Σ_j I^α P_j(c_i) γ_j` as a k×m matrix.
fn stage_values(
    gamma: &DenseMatrix,
    phi: &DenseMatrix,
    tables: &CoefficientTables,
    h_alpha: f64,
) -> DenseMatrix {
    let k = phi.rows();
    let m = phi.cols();
    let s = gamma.cols();
    let mut stages = phi.clone();
    for i in 0..k {
        let irow = tables.ialpha.row(i);
        for row in 0..m {
            let gam = gamma.row(row);
            let mut acc = 0.0;
            for j in 0..s {
                acc += irow[j] * gam[j];
            }
            stages[(i, row)] += h_alpha * acc;
        }
    }
    stages
}

/// Vector field at all stages; rows are `f(t_{n−1} + c_i h, Y_i)`.
fn eval_stages(
    problem: &FdeProblem,
    t_prev: f64,
    h: f64,
    tables: &CoefficientTables,
    stages: &DenseMatrix,
) -> Result<DenseMatrix> {
    let k = stages.rows();
    let m = stages.cols();
    let mut f_mat = DenseMatrix::zeros(k, m);
    let mut out = vec![0.0; m];
    for i in 0..k {
        let t = t_prev + tables.rule.nodes()[i] * h;
        problem.rhs(t, stages.row(i), &mut out);
        if !out.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteRhs { step: 0, t });
        }
        f_mat.row_mut(i).copy_from_slice(&out);
    }
    Ok(f_mat)
}

/// One application of the coefficient map `Γ ↦ (P_sᵀΩ F(Γ))ᵀ`.
fn gamma_map(
    gamma: &DenseMatrix,
    phi: &DenseMatrix,
    tables: &CoefficientTables,
    h_alpha: f64,
    problem: &FdeProblem,
    t_prev: f64,
    h: f64,
) -> Result<DenseMatrix> {
    let stages = stage_values(gamma, phi, tables, h_alpha);
    let f_mat = eval_stages(problem, t_prev, h, tables, &stages)?;
    let s = tables.basis.count();
    let m = phi.cols();
    let k = phi.rows();
    let mut next = DenseMatrix::zeros(m, s);
    for row in 0..m {
        for j in 0..s {
            let pr = tables.proj.row(j);
            let mut acc = 0.0;
            for i in 0..k {
                acc += pr[i] * f_mat[(i, row)];
            }
            next[(row, j)] = acc;
        }
    }
    Ok(next)
}

/// Residual `G(Γ) = Γ − (P_sᵀΩ F(Γ))ᵀ` of the discrete problem.
pub fn residual(
    gamma: &DenseMatrix,
    phi: &DenseMatrix,
    tables: &CoefficientTables,
    h: f64,
    problem: &FdeProblem,
    t_prev: f64,
) -> Result<DenseMatrix> {
    let h_alpha = math::powf(h, tables.basis.alpha());
    let mapped = gamma_map(gamma, phi, tables, h_alpha, problem, t_prev, h)?;
    let mut res = gamma.clone();
    for row in 0..res.rows() {
        let (r, m) = (res.row_mut(row), mapped.row(row));
        for j in 0..r.len() {
            r[j] -= m[j];
        }
    }
    Ok(res)
}

fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| math::abs(x - y))
        .fold(0.0, f64::max)
}

/// Solve the step problem by direct fixed-point iteration from `Γ = 0`.
pub fn fixed_point_solve(
    phi: &DenseMatrix,
    tables: &CoefficientTables,
    h: f64,
    problem: &FdeProblem,
    t_prev: f64,
    cfg: &SolverConfig,
) -> Result<DenseMatrix> {
    let h_alpha = math::powf(h, tables.basis.alpha());
    let mut gamma = DenseMatrix::zeros(problem.dim(), tables.basis.count());
    for _ in 0..cfg.max_nl_iters {
        let next = gamma_map(&gamma, phi, tables, h_alpha, problem, t_prev, h)?;
        if !next.all_finite() {
            return Err(Error::StepNoConvergence { step: 0, t: t_prev });
        }
        let delta = max_abs_diff(&next, &gamma);
        let scale = norm_inf_slice(next.as_slice());
        gamma = next;
        if delta <= cfg.tol_nl * (1.0 + scale) {
            return Ok(gamma);
        }
    }
    Err(Error::StepNoConvergence { step: 0, t: t_prev })
}

/// Solve the step problem by the blended iteration.
///
/// Requires the Jacobian `f₀′` at the first memory-term entry; only the m×m
/// matrix `I − h^α·ξ·f₀′` is factored, once per step. The update is
///
/// ```text
/// η  = −G(Γ),   η₁ = ξ·η·(X_s^α)^{-T},
/// Γ ← Γ + Θ[η₁ + Θ(η − η₁)],       Θ = (I − h^α ξ f₀′)^{-1},
/// ```
///
/// applied column-wise via the LU factors of `Θ^{-1}`.
pub fn blended_solve(
    phi: &DenseMatrix,
    tables: &CoefficientTables,
    h: f64,
    problem: &FdeProblem,
    t_prev: f64,
    cfg: &SolverConfig,
    f0_jacobian: &DenseMatrix,
) -> Result<DenseMatrix> {
    let m = problem.dim();
    let s = tables.basis.count();
    let alpha = tables.basis.alpha();
    let h_alpha = math::powf(h, alpha);

    let mut w = DenseMatrix::identity(m);
    for i in 0..m {
        for j in 0..m {
            w[(i, j)] -= h_alpha * tables.xi * f0_jacobian[(i, j)];
        }
    }
    let theta = lu_factor(&w)?;

    let mut gamma = DenseMatrix::zeros(m, s);
    let mut col = vec![0.0; m];
    for _ in 0..cfg.max_nl_iters {
        let mapped = gamma_map(&gamma, phi, tables, h_alpha, problem, t_prev, h)?;
        // η = map − Γ, η₁ = ξ·η·(X^{-1})ᵀ
        let mut eta = mapped;
        for row in 0..m {
            let (e, g) = (eta.row_mut(row), gamma.row(row));
            for j in 0..s {
                e[j] -= g[j];
            }
        }
        let mut eta1 = eta.mul(&tables.x_inv_t);
        for row in 0..m {
            for v in eta1.row_mut(row) {
                *v *= tables.xi;
            }
        }
        // Γ += Θ(η₁ + Θ(η − η₁)) column-wise
        let mut delta: f64 = 0.0;
        for j in 0..s {
            for row in 0..m {
                col[row] = eta[(row, j)] - eta1[(row, j)];
            }
            theta.solve_in_place(&mut col);
            for (row, c) in col.iter_mut().enumerate() {
                *c += eta1[(row, j)];
            }
            theta.solve_in_place(&mut col);
            for (row, c) in col.iter().enumerate() {
                gamma[(row, j)] += c;
                delta = delta.max(math::abs(*c));
            }
        }
        if !gamma.all_finite() {
            return Err(Error::StepNoConvergence { step: 0, t: t_prev });
        }
        if delta <= cfg.tol_nl * (1.0 + norm_inf_slice(gamma.as_slice())) {
            return Ok(gamma);
        }
    }
    Err(Error::StepNoConvergence { step: 0, t: t_prev })
}

/// Endpoint advance `ȳ_n = φ_{n−1}(1) + h^α/Γ(α+1) · γ_0^n`.
pub fn advance(gamma: &DenseMatrix, phi_end: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    let scale = math::powf(h, alpha) / gamma_of(alpha + 1.0);
    phi_end
        .iter()
        .enumerate()
        .map(|(row, phi_v)| phi_v + scale * gamma[(row, 0)])
        .collect()
}

fn gamma_of(x: f64) -> f64 {
    gamma(x).expect("argument is positive by construction")
}

/// Run the stepper over a finalized mesh (normally called through [`solve`],
/// which also plans the mesh; direct use covers prescribed-mesh runs).
pub fn integrate(
    problem: &FdeProblem,
    mesh: &Mesh,
    tables: &CoefficientTables,
    cfg: &SolverConfig,
) -> Result<(Vec<Vec<f64>>, StepHistory)> {
    let alpha = problem.alpha();
    let mut endpoints = Vec::with_capacity(mesh.intervals() + 1);
    endpoints.push(problem.y0().to_vec());
    let mut history = StepHistory::default();

    for n in 1..=mesh.intervals() {
        let h = mesh.steps()[n - 1];
        let t_prev = mesh.nodes()[n - 1];
        let (phi, phi_end) = memory_term(&history, tables, mesh, n, problem.y0());

        let t_first_stage = t_prev + tables.rule.nodes()[0] * h;
        let f0_jacobian = problem.jacobian_at(t_first_stage, phi.row(0));
        let kind = step_switch(h, alpha, f0_jacobian.norm_inf(), tables, cfg);
        let gamma = match kind {
            IterationKind::FixedPoint => {
                fixed_point_solve(&phi, tables, h, problem, t_prev, cfg)
            }
            IterationKind::Blended => {
                blended_solve(&phi, tables, h, problem, t_prev, cfg, &f0_jacobian)
            }
        }
        .map_err(|e| match e {
            Error::StepNoConvergence { t, .. } => Error::StepNoConvergence { step: n, t },
            Error::NonFiniteRhs { t, .. } => Error::NonFiniteRhs { step: n, t },
            other => other,
        })?;

        let y_n = advance(&gamma, &phi_end, h, alpha);
        if !y_n.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteRhs { step: n, t: t_prev });
        }
        history.push(gamma);
        endpoints.push(y_n);
    }
    Ok((endpoints, history))
}

/// Solve the problem with automatic mesh selection.
///
/// `m` is the coarse interval count the mesh probe starts from (the uniform
/// step would be `T/m`); it should be small, the method is spectrally
/// accurate in time. With `estimate_error` set, the problem is re-solved on
/// a doubled mesh and the nodewise difference attached to the solution.
pub fn solve(
    problem: &FdeProblem,
    m: usize,
    cfg: &SolverConfig,
    estimate_error: bool,
) -> Result<Solution> {
    cfg.validate()?;
    if m < 1 {
        return Err(Error::Config("interval parameter M must be at least 1"));
    }
    let mut watch = Stopwatch::start();
    let (mesh, _probe) = plan_mesh(
        problem.t_end(),
        m,
        cfg.tol_mesh,
        cfg.max_probe_level,
        |probe_mesh| {
            let tables = build_tables(problem, probe_mesh, cfg)?;
            let (endpoints, _) = integrate(problem, probe_mesh, &tables, cfg)?;
            Ok(endpoints.into_iter().next_back().unwrap())
        },
    )?;
    let tables = build_tables(problem, &mesh, cfg)?;
    let preprocess = watch.lap();
    let (endpoints, history) = integrate(problem, &mesh, &tables, cfg)?;
    let solve_time = watch.lap();

    let mut solution = Solution {
        mesh,
        endpoints,
        history,
        stats: Stats { preprocess, solve: solve_time, ..Stats::default() },
        error_estimate: None,
        tables,
    };
    if estimate_error {
        let (estimate, err_preprocess, err_solve) = errest::estimate(problem, &solution, cfg)?;
        solution.stats.err_preprocess = err_preprocess;
        solution.stats.err_solve = err_solve;
        solution.error_estimate = Some(estimate);
    }
    Ok(solution)
}

impl Solution {
    pub fn tables(&self) -> &CoefficientTables {
        &self.tables
    }

    /// Final-time approximation `ȳ_N`.
    pub fn final_value(&self) -> &[f64] {
        self.endpoints.last().unwrap()
    }

    /// Dense evaluation of the quasi-polynomial approximation at `t`.
    ///
    /// Locates the interval containing `t`, reconstructs the memory term at
    /// the local coordinate, and sums the local expansion with `I^α P_j(c)`
    /// evaluated on demand from the same exact one-shot formula used for the
    /// tables.
    pub fn eval_at(&self, t: f64) -> Result<Vec<f64>> {
        let t_end = self.mesh.t_end();
        if !(0.0..=t_end).contains(&t) {
            return Err(Error::Domain("evaluation point outside [0, T]"));
        }
        let y0 = &self.endpoints[0];
        if t == 0.0 {
            return Ok(y0.clone());
        }
        let nodes = self.mesh.nodes();
        // first interval whose right endpoint reaches t
        let n = nodes.partition_point(|&node| node < t).max(1);
        let h = self.mesh.steps()[n - 1];
        let c = ((t - nodes[n - 1]) / h).clamp(0.0, 1.0);

        let tables = &self.tables;
        let alpha = tables.basis.alpha();
        let s = tables.basis.count();
        let m = y0.len();
        let r = self.mesh.ratio();
        let uniform = self.mesh.kind() == MeshKind::Uniform;

        let mut value = y0.clone();
        // memory part: J kernels at the c-shifted arguments
        let ratio_alpha = math::powf(r, alpha);
        let mut weight = math::powf(self.mesh.h1(), alpha);
        for nu in 1..n {
            let shift = n - nu;
            // (r^d − 1)/(r − 1) + c·r^d for d = shift (uniform: d + c)
            let (offset, scale) = if uniform {
                (shift as f64, 1.0)
            } else {
                let mut b = 1.0f64;
                let mut p = r;
                for _ in 1..shift {
                    b = b * r + 1.0;
                    p *= r;
                }
                (b, p)
            };
            let kernel = jalpha_row(offset + c * scale, &tables.basis, &tables.rule, &tables.gl)?;
            let gam = self.history.block(nu);
            for (row_i, v) in value.iter_mut().enumerate() {
                let g = gam.row(row_i);
                let mut acc = 0.0;
                for j in 0..s {
                    acc += kernel[j] * g[j];
                }
                *v += weight * acc;
            }
            weight *= ratio_alpha;
        }
        // local part: I^α P_j(c) by the exact one-shot formula
        let mut iacc = vec![0.0; s];
        let mut p = vec![0.0; s];
        for (&cl, &bl) in tables.rule.nodes().iter().zip(tables.rule.weights()) {
            tables.basis.eval_into(c * cl, &mut p);
            for (acc, v) in iacc.iter_mut().zip(&p) {
                *acc += bl * v;
            }
        }
        let scale = math::powf(c, alpha) * tables.inv_gamma_a1 * math::powf(h, alpha);
        let gam = self.history.block(n);
        for (row_i, v) in value.iter_mut().enumerate() {
            let g = gam.row(row_i);
            let mut acc = 0.0;
            for j in 0..s {
                acc += iacc[j] * g[j];
            }
            *v += scale * acc;
        }
        debug_assert_eq!(value.len(), m);
        Ok(value)
    }
}
