//! Reporting and serialization for the `fhbvm` command-line driver:
//! the mixed-error accuracy metric, run reports, and the node-table
//! CSV/JSON formats.

use fhbvm_core::mesh::MeshKind;
use fhbvm_core::solver::{FdeProblem, Solution, SolverConfig};
use serde::Serialize;
use std::io::{self, Write};

/// Mixed error significant computed digits:
///
/// ```text
/// mescd = −log₁₀ max_i ‖(y(t_i) − ȳ_i) ./ (1 + |y(t_i)|)‖∞,
/// ```
///
/// with the inner maximum floored at 1e-16, capping the result at 16.
pub fn mescd(exact: &[Vec<f64>], approx: &[Vec<f64>]) -> Result<f64, String> {
    if exact.len() != approx.len() {
        return Err(format!(
            "length mismatch: {} exact vs {} approximate values",
            exact.len(),
            approx.len()
        ));
    }
    let mut worst = 0.0f64;
    for (e, a) in exact.iter().zip(approx) {
        if e.len() != a.len() {
            return Err("component count mismatch".into());
        }
        for (ev, av) in e.iter().zip(a) {
            worst = worst.max((ev - av).abs() / (1.0 + ev.abs()));
        }
    }
    Ok(-worst.max(1e-16).log10())
}

/// Mesh geometry summary for reports.
#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub kind: &'static str,
    pub intervals: usize,
    pub points: usize,
    pub h1: f64,
    pub ratio: f64,
    pub h_last: f64,
}

impl MeshSummary {
    pub fn new(solution: &Solution) -> Self {
        let mesh = &solution.mesh;
        Self {
            kind: match mesh.kind() {
                MeshKind::Uniform => "uniform",
                MeshKind::Graded => "graded",
            },
            intervals: mesh.intervals(),
            points: mesh.intervals() + 1,
            h1: mesh.h1(),
            ratio: mesh.ratio(),
            h_last: *mesh.steps().last().unwrap(),
        }
    }
}

/// Configuration echo for reproducibility.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub k: usize,
    pub s: usize,
    pub tol_mesh: f64,
    pub tol_nl: f64,
    pub max_nl_iters: usize,
    pub switch_tol: f64,
}

impl From<&SolverConfig> for ConfigEcho {
    fn from(cfg: &SolverConfig) -> Self {
        Self {
            k: cfg.k,
            s: cfg.s,
            tol_mesh: cfg.tol_mesh,
            tol_nl: cfg.tol_nl,
            max_nl_iters: cfg.max_nl_iters,
            switch_tol: cfg.switch_tol,
        }
    }
}

/// Everything a solve run reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub problem: String,
    pub alpha: f64,
    pub t_end: f64,
    pub m: usize,
    pub mesh: MeshSummary,
    /// Present iff the problem has a reference solution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mescd: Option<f64>,
    /// Present iff the doubled-mesh estimate ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_estimated_error: Option<f64>,
    /// Seconds: preprocessing and solve, extended by the error-estimate
    /// preprocessing and solve when an estimate ran.
    pub stats_seconds: Vec<f64>,
    pub config: ConfigEcho,
}

impl RunReport {
    pub fn new(
        name: &str,
        m: usize,
        problem: &FdeProblem,
        solution: &Solution,
        cfg: &SolverConfig,
    ) -> Self {
        let mescd_value = problem.has_exact().then(|| {
            let exact: Vec<Vec<f64>> = solution
                .mesh
                .nodes()
                .iter()
                .map(|&t| problem.exact(t).unwrap())
                .collect();
            mescd(&exact, &solution.endpoints).expect("nodes and endpoints are consistent")
        });
        let mut stats_seconds = vec![solution.stats.preprocess, solution.stats.solve];
        if solution.error_estimate.is_some() {
            stats_seconds.extend([solution.stats.err_preprocess, solution.stats.err_solve]);
        }
        Self {
            problem: name.to_owned(),
            alpha: problem.alpha(),
            t_end: problem.t_end(),
            m,
            mesh: MeshSummary::new(solution),
            mescd: mescd_value,
            max_estimated_error: solution.error_estimate.as_ref().map(|e| e.max_abs()),
            stats_seconds,
            config: cfg.into(),
        }
    }

    /// Human-readable key/value block.
    pub fn write_text(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "problem            {}", self.problem)?;
        writeln!(w, "alpha              {}", self.alpha)?;
        writeln!(w, "T                  {}", self.t_end)?;
        writeln!(w, "M                  {}", self.m)?;
        writeln!(
            w,
            "mesh               {} ({} points, N = {})",
            self.mesh.kind, self.mesh.points, self.mesh.intervals
        )?;
        writeln!(w, "h1                 {:e}", self.mesh.h1)?;
        writeln!(w, "ratio              {}", self.mesh.ratio)?;
        writeln!(w, "h_last             {}", self.mesh.h_last)?;
        if let Some(v) = self.mescd {
            writeln!(w, "mescd              {v:.2}")?;
        }
        if let Some(v) = self.max_estimated_error {
            writeln!(w, "max est. error     {v:e}")?;
        }
        let ms = |x: f64| (x * 1000.0).round() / 1000.0;
        write!(
            w,
            "time (s)           pre {} / solve {}",
            ms(self.stats_seconds[0]),
            ms(self.stats_seconds[1]),
        )?;
        if self.stats_seconds.len() == 4 {
            write!(
                w,
                " / err-pre {} / err-solve {}",
                ms(self.stats_seconds[2]),
                ms(self.stats_seconds[3])
            )?;
        }
        writeln!(w)
    }
}

/// Node table: `t,y1,…,ym[,e1,…,em]`, shortest round-trip decimals.
pub fn write_node_csv(solution: &Solution, mut w: impl Write) -> io::Result<()> {
    let dim = solution.endpoints[0].len();
    let with_errors = solution.error_estimate.is_some();
    write!(w, "t")?;
    for i in 1..=dim {
        write!(w, ",y{i}")?;
    }
    if with_errors {
        for i in 1..=dim {
            write!(w, ",e{i}")?;
        }
    }
    writeln!(w)?;
    for (n, t) in solution.mesh.nodes().iter().enumerate() {
        write!(w, "{t}")?;
        for v in &solution.endpoints[n] {
            write!(w, ",{v}")?;
        }
        if let Some(est) = &solution.error_estimate {
            for v in &est.nodewise[n] {
                write!(w, ",{v}")?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One node row of the JSON document.
#[derive(Debug, Serialize)]
pub struct NodeRow {
    pub t: f64,
    pub y: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<f64>>,
}

/// Full JSON document: report plus node data.
#[derive(Debug, Serialize)]
pub struct JsonDocument {
    #[serde(flatten)]
    pub report: RunReport,
    pub nodes: Vec<NodeRow>,
}

impl JsonDocument {
    pub fn new(report: RunReport, solution: &Solution) -> Self {
        let nodes = solution
            .mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(n, &t)| NodeRow {
                t,
                y: solution.endpoints[n].clone(),
                e: solution.error_estimate.as_ref().map(|est| est.nodewise[n].clone()),
            })
            .collect();
        Self { report, nodes }
    }
}

/// One row of work-precision data.
#[derive(Debug, Clone, Serialize)]
pub struct WpdRow {
    pub m: usize,
    pub runtime_seconds: f64,
    pub mescd: f64,
}

/// Work-precision CSV: `M,runtime_seconds,mescd`.
pub fn write_wpd_csv(rows: &[WpdRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "M,runtime_seconds,mescd")?;
    for row in rows {
        writeln!(w, "{},{},{}", row.m, row.runtime_seconds, row.mescd)?;
    }
    Ok(())
}
