//! Global error estimation by re-solving on a doubled mesh.
//!
//! The coarse nodes are nested in the doubled mesh (`t̂_{2n} = t_n`), so the
//! difference `ê_n = ŷ_{2n} − ȳ_n` estimates the true global error at every
//! coarse node. A uniform mesh is halved; a graded mesh keeps its endpoints
//! by taking `r̂ = √r` and `ĥ₁ = h₁(r̂−1)/(r−1)`, which telescopes to the
//! same horizon.

use alloc::vec::Vec;

use crate::mesh::{Mesh, MeshKind};
use crate::solver::{build_tables, integrate, FdeProblem, Solution, SolverConfig, Stopwatch};
use crate::Result;

/// Nodewise absolute error estimate on the coarse mesh.
#[derive(Debug, Clone)]
pub struct ErrorEstimate {
    /// `ê_n = ŷ_{2n} − ȳ_n` for `n = 0, …, N` (the first entry is zero).
    pub nodewise: Vec<Vec<f64>>,
}

impl ErrorEstimate {
    /// Largest absolute estimated error over all nodes and components.
    pub fn max_abs(&self) -> f64 {
        self.nodewise
            .iter()
            .flat_map(|e| e.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
    }
}

/// The refinement of a planner mesh with twice as many intervals and the
/// same endpoints.
pub fn doubled_mesh(mesh: &Mesh) -> Mesh {
    let n2 = 2 * mesh.intervals();
    match mesh.kind() {
        MeshKind::Uniform => Mesh::uniform(mesh.t_end(), n2),
        MeshKind::Graded => {
            let r_hat = crate::math::sqrt(mesh.ratio());
            // (r̂−1)/(r−1) = 1/(r̂+1), cancellation-free
            let h1_hat = mesh.h1() / (r_hat + 1.0);
            Mesh::graded(h1_hat, r_hat, n2, mesh.t_end())
        }
    }
}

/// Re-solve on the doubled mesh and difference the nested nodes.
///
/// Returns the estimate together with the two timings (table construction,
/// fine solve) that the caller folds into the solution statistics.
pub fn estimate(
    problem: &FdeProblem,
    coarse: &Solution,
    cfg: &SolverConfig,
) -> Result<(ErrorEstimate, f64, f64)> {
    let fine_mesh = doubled_mesh(&coarse.mesh);
    debug_assert!(nested(&coarse.mesh, &fine_mesh));

    let mut watch = Stopwatch::start();
    let tables = build_tables(problem, &fine_mesh, cfg)?;
    let preprocess = watch.lap();
    let (fine_endpoints, _) = integrate(problem, &fine_mesh, &tables, cfg)?;
    let solve_time = watch.lap();

    let nodewise = coarse
        .endpoints
        .iter()
        .enumerate()
        .map(|(n, coarse_y)| {
            fine_endpoints[2 * n]
                .iter()
                .zip(coarse_y)
                .map(|(fine, coarse)| fine - coarse)
                .collect()
        })
        .collect();
    Ok((ErrorEstimate { nodewise }, preprocess, solve_time))
}

fn nested(coarse: &Mesh, fine: &Mesh) -> bool {
    let t_end = coarse.t_end();
    coarse
        .nodes()
        .iter()
        .enumerate()
        .all(|(n, &t)| (fine.nodes()[2 * n] - t).abs() <= 1e-12 * t_end)
}
