//! Mesh selection: automatic choice between a uniform and a geometrically
//! graded partition of `[0, T]`, and the globally convergent fixed-point
//! iteration for the grading ratio.
//!
//! The planner probes successively smaller initial intervals `H = 4^(1−ℓ)·T/M`,
//! comparing a single-step solve on `[0, H]` against a two-interval graded
//! solve (`r̂ = 3`, sub-intervals `[0, H/4]`, `[H/4, H]`). Once the two agree
//! to the probe tolerance, `h₁ = H` is accepted: at ℓ = 1 a uniform mesh with
//! N = M results; for small M at ℓ = 2 a uniform mesh with N = 4M; otherwise
//! a graded mesh `h_n = r^(n−1)·h₁` whose ratio solves
//! `h₁(r^N − 1)/(r − 1) = T`.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Uniform,
    Graded,
}

/// A finalized partition `t_0 = 0 < t_1 < … < t_N = T`.
#[derive(Debug, Clone)]
pub struct Mesh {
    kind: MeshKind,
    h1: f64,
    r: f64,
    steps: Vec<f64>,
    nodes: Vec<f64>,
}

impl Mesh {
    /// Uniform mesh with `n` intervals on `[0, t_end]`.
    pub fn uniform(t_end: f64, n: usize) -> Self {
        assert!(n >= 1 && t_end > 0.0);
        let h1 = t_end / n as f64;
        let steps = alloc::vec![h1; n];
        let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h1).collect();
        nodes[n] = t_end;
        Self { kind: MeshKind::Uniform, h1, r: 1.0, steps, nodes }
    }

    /// Graded mesh `h_n = r^(n−1)·h₁` with `n` intervals; the final node is
    /// snapped to `t_end`.
    pub fn graded(h1: f64, r: f64, n: usize, t_end: f64) -> Self {
        assert!(n >= 1 && h1 > 0.0 && r > 1.0);
        let mut steps = Vec::with_capacity(n);
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(0.0);
        let mut h = h1;
        let mut t = 0.0;
        for _ in 0..n {
            steps.push(h);
            t += h;
            nodes.push(t);
            h *= r;
        }
        assert!(t.is_finite(), "graded mesh overflow");
        debug_assert!(
            math::abs(t - t_end) <= 1e-9 * t_end,
            "graded steps do not telescope to t_end"
        );
        nodes[n] = t_end;
        Self { kind: MeshKind::Graded, h1, r, steps, nodes }
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    /// Grading ratio (1 for uniform meshes).
    pub fn ratio(&self) -> f64 {
        self.r
    }

    /// Number of intervals N.
    pub fn intervals(&self) -> usize {
        self.steps.len()
    }

    /// Step sizes `h_1, …, h_N`.
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// Nodes `t_0, …, t_N`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn t_end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }
}

/// Outcome of the refinement probe.
#[derive(Debug, Clone, Copy)]
pub struct MeshProbeResult {
    /// Stage ℓ at which the probe accepted (1-based).
    pub level: usize,
    /// Accepted initial step `h₁ = 4^(1−ℓ)·T/M`.
    pub h1: f64,
}

/// Solve `r = (1 + (r−1)β)^(1/N)` for the grading ratio.
///
/// The iteration converges monotonically to the unique fixed point `r̄ > 1`
/// from any starting guess `r0 > 1` (it is globally convergent whenever
/// `β > N`), so non-convergence within the budget signals a precondition
/// violation.
pub fn solve_ratio(beta: f64, n: usize, r0: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 1.0 {
        return Err(Error::Config("solve_ratio requires beta > 1"));
    }
    if n < 2 {
        return Err(Error::Config("solve_ratio requires N >= 2"));
    }
    if r0.is_nan() || r0 <= 1.0 {
        return Err(Error::Config("solve_ratio requires r0 > 1"));
    }
    let inv_n = 1.0 / n as f64;
    let mut r = r0;
    for _ in 0..200 {
        let next = math::powf(1.0 + (r - 1.0) * beta, inv_n);
        let converged = math::abs(next - r) <= 1e-14 * r;
        r = next;
        if converged {
            return Ok(r);
        }
    }
    // The fixed point degenerates toward 1 as β ↓ N and the iteration slows
    // to an algebraic crawl there; the residual (r^N−1)/(r−1) − β is strictly
    // increasing in r, so bisection finishes the job.
    ratio_bisection(beta, n, r)
}

fn ratio_bisection(beta: f64, n: usize, hint: f64) -> Result<f64> {
    let residual = |r: f64| {
        let mut sum = 1.0;
        let mut pow = 1.0;
        for _ in 1..n {
            pow *= r;
            sum += pow;
        }
        sum - beta
    };
    let mut lo = 1.0;
    let mut hi = hint.max(1.0 + 1e-12);
    let mut grow = 0;
    while residual(hi) < 0.0 {
        hi = 1.0 + 2.0 * (hi - 1.0);
        grow += 1;
        if grow > 600 {
            return Err(Error::Domain("mesh ratio iteration did not converge"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}

/// True iff a graded planner output satisfies `2 ≤ N < 4^(ℓ−1)·M`.
pub fn mesh_bounds_check(mesh: &Mesh, m: usize, level: usize) -> bool {
    let n = mesh.intervals();
    let bound = math::powf(4.0, level as f64 - 1.0) * m as f64;
    n >= 2 && (n as f64) < bound
}

/// Select the mesh for `[0, t_end]` by the refinement probe.
///
/// `trial` must solve the problem on the prescribed 1- or 2-interval probe
/// mesh and return the approximation at its right endpoint; a trial failure
/// (e.g. a diverging nonlinear iteration on a too-coarse interval) counts as
/// a rejection and refinement continues.
pub fn plan_mesh(
    t_end: f64,
    m: usize,
    tol_mesh: f64,
    max_level: usize,
    mut trial: impl FnMut(&Mesh) -> Result<Vec<f64>>,
) -> Result<(Mesh, MeshProbeResult)> {
    assert!(m >= 1 && t_end > 0.0);
    let h = t_end / m as f64;
    let mut big_h = h;
    let mut level = 1usize;
    loop {
        let single = Mesh::uniform(big_h, 1);
        // two sub-intervals [0, H/4], [H/4, H]: the r̂ = 3 probe grading
        let double = Mesh::graded(big_h * 0.25, 3.0, 2, big_h);
        let accepted = match (trial(&single), trial(&double)) {
            (Ok(y1), Ok(y2)) => {
                let mut diff = 0.0f64;
                for (a, b) in y1.iter().zip(&y2) {
                    diff = diff.max(math::abs(a - b) / (1.0 + math::abs(*b)));
                }
                diff <= tol_mesh
            }
            _ => false,
        };
        if accepted {
            break;
        }
        level += 1;
        big_h *= 0.25;
        if level > max_level {
            return Err(Error::MeshNotSettled { levels: max_level });
        }
    }

    let probe = MeshProbeResult { level, h1: big_h };
    if level == 1 {
        return Ok((Mesh::uniform(t_end, m), probe));
    }
    if level == 2 && m <= 5 {
        return Ok((Mesh::uniform(t_end, 4 * m), probe));
    }
    if m < 2 {
        return Err(Error::Config("graded refinement requires M > 1"));
    }

    let h1 = big_h;
    let m_f = m as f64;
    let pow4 = h1 / h; // 4^(1−ℓ), exact (accumulated by 0.25 multiplies)
    let r0 = (m_f - pow4) / (m_f - 1.0);
    let n_real = 1.0 + math::ln(1.0 / pow4) / math::ln(r0);
    let n = math::ceil(n_real) as usize;
    let r = solve_ratio(t_end / h1, n, r0)?;
    Ok((Mesh::graded(h1, r, n, t_end), probe))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_near_boundary() {
        // β barely above N: fixed point collapses toward 1⁺
        let r = solve_ratio(5.0 + 1e-9, 5, 1.5).unwrap();
        assert!(r > 1.0 - 1e-15 && r < 1.001, "r = {r}");
    }

    #[test]
    fn ratio_reference_value() {
        // root of (r⁵−1)/(r−1) = 100, cross-checked by bisection
        let mut lo: f64 = 1.0 + 1e-12;
        let mut hi: f64 = 10.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fmid = (mid.powi(5) - 1.0) / (mid - 1.0) - 100.0;
            if fmid > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let r = solve_ratio(100.0, 5, 1.5).unwrap();
        assert!((r - oracle).abs() < 1e-12, "r = {r}, oracle = {oracle}");
        assert!((r - 2.841_094_865_255_207).abs() < 1e-10);
    }

    #[test]
    fn ratio_monotone_iterates() {
        // from below the fixed point the iterates increase, from above they decrease
        let beta = 100.0;
        let n = 5;
        let psi = |r: f64| (1.0 + (r - 1.0) * beta).powf(1.0 / n as f64);
        let mut r = 1.5;
        for _ in 0..50 {
            let next = psi(r);
            assert!(next >= r);
            r = next;
        }
        let mut r_hi = 10.0;
        for _ in 0..50 {
            let next = psi(r_hi);
            assert!(next <= r_hi);
            r_hi = next;
        }
        assert!((r - r_hi).abs() < 1e-10);
    }

    #[test]
    fn ratio_rejects_bad_inputs() {
        assert!(solve_ratio(0.5, 5, 1.5).is_err());
        assert!(solve_ratio(100.0, 1, 1.5).is_err());
        assert!(solve_ratio(100.0, 5, 1.0).is_err());
    }

    #[test]
    fn uniform_mesh_shape() {
        let mesh = Mesh::uniform(1.0, 4);
        assert_eq!(mesh.kind(), MeshKind::Uniform);
        assert_eq!(mesh.intervals(), 4);
        assert_eq!(mesh.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(mesh.ratio(), 1.0);
    }

    #[test]
    fn graded_mesh_nodes_accumulate() {
        let mesh = Mesh::graded(1.0, 2.0, 3, 7.0);
        assert_eq!(mesh.steps(), &[1.0, 2.0, 4.0]);
        assert_eq!(mesh.nodes(), &[0.0, 1.0, 3.0, 7.0]);
        assert_eq!(mesh.t_end(), 7.0);
    }

    #[test]
    fn bounds_check_band() {
        let mesh2 = Mesh::graded(1e-3, 1.5, 2, 2.5e-3);
        assert!(mesh_bounds_check(&mesh2, 5, 3));
        let t80 = 1e-9 * (1.2f64.powi(80) - 1.0) / 0.2;
        let mesh80 = Mesh::graded(1e-9, 1.2, 80, t80);
        // 80 = 4²·5 is not strictly below the bound
        assert!(!mesh_bounds_check(&mesh80, 5, 3));
    }

    #[test]
    fn probe_accepts_immediately_for_agreeing_trials() {
        // trial reporting the same endpoint everywhere accepts at ℓ = 1
        let (mesh, probe) =
            plan_mesh(1.0, 4, 1e-13, 25, |_| Ok(alloc::vec![1.0, 2.0])).unwrap();
        assert_eq!(probe.level, 1);
        assert_eq!(mesh.kind(), MeshKind::Uniform);
        assert_eq!(mesh.intervals(), 4);
    }

    #[test]
    fn probe_small_m_level_two_stays_uniform() {
        // force disagreement only at the first level
        let mut calls = 0;
        let (mesh, probe) = plan_mesh(1.0, 4, 1e-13, 25, |probe_mesh| {
            calls += 1;
            // first-level probes run on [0, 0.25]; make them disagree
            if probe_mesh.t_end() > 0.2 {
                Ok(alloc::vec![calls as f64])
            } else {
                Ok(alloc::vec![0.0])
            }
        })
        .unwrap();
        assert_eq!(probe.level, 2);
        assert_eq!(mesh.kind(), MeshKind::Uniform);
        assert_eq!(mesh.intervals(), 16);
        assert!((mesh.h1() - 1.0 / 16.0).abs() < 1e-16);
    }

    #[test]
    fn probe_failure_counts_as_rejection() {
        let mut level_seen = 0;
        let result = plan_mesh(1.0, 2, 1e-13, 3, |_| {
            level_seen += 1;
            Err(Error::StepNoConvergence { step: 1, t: 0.0 })
        });
        assert!(matches!(result, Err(Error::MeshNotSettled { levels: 3 })));
        assert!(level_seen >= 3);
    }

    #[test]
    fn probe_graded_parameters() {
        // accept at level 3 with M = 10: graded mesh with the planner's h₁, N, r
        let (mesh, probe) = plan_mesh(1.0, 10, 1e-13, 25, |probe_mesh| {
            // single- and two-interval trials disagree until [0, H] is short
            if probe_mesh.t_end() > 0.007 {
                Ok(alloc::vec![probe_mesh.intervals() as f64])
            } else {
                Ok(alloc::vec![0.0])
            }
        })
        .unwrap();
        assert_eq!(probe.level, 3);
        assert_eq!(mesh.kind(), MeshKind::Graded);
        let h1 = 4.0f64.powi(-2) * 0.1;
        assert_eq!(mesh.h1(), h1);
        // N = ⌈1 + log_{r0}(4^{ℓ−1})⌉ with r0 = (M − 4^{1−ℓ})/(M − 1)
        let r0: f64 = (10.0 - 0.0625) / 9.0;
        let n_expect = (1.0 + (16.0f64).ln() / r0.ln()).ceil() as usize;
        assert_eq!(mesh.intervals(), n_expect);
        // recomputed ratio satisfies h₁(r^N−1)/(r−1) = T
        let r = mesh.ratio();
        let total = h1 * (r.powi(mesh.intervals() as i32) - 1.0) / (r - 1.0);
        assert!((total - 1.0).abs() < 1e-12);
        assert!(mesh_bounds_check(&mesh, 10, probe.level));
        // sum of steps telescopes to T
        let sum: f64 = mesh.steps().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}
