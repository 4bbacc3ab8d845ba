#![cfg_attr(not(feature = "std"), no_std)]

//! Spectral solver for initial value problems of Caputo fractional
//! differential equations,
//!
//! ```text
//! y^(α)(t) = f(t, y(t)),   t ∈ [0, T],   y(0) = y0,   α ∈ (0, 1],
//! ```
//!
//! where `y^(α)` is the Caputo derivative of order `α`. The vector field is
//! expanded on each mesh interval in a Jacobi polynomial basis orthonormal
//! under the weight `ω(x) = α(1−x)^(α−1)`, discretized with a Gauss–Jacobi
//! rule, and the resulting per-step nonlinear system is solved by a
//! fixed-point or blended Newton-type iteration, switched automatically.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense LU, small nonsymmetric eigenvalues, norms
//! - [`special`]: gamma, scaled complementary error function, Mittag-Leffler
//!   of order 1/2
//! - [`basis`]: the orthonormal Jacobi basis and quadrature rules
//! - [`fracint`]: precomputed fractional-integral coefficient tables
//! - [`mesh`]: automatic uniform/graded mesh selection
//! - [`solver`]: the stepper, nonlinear iterations, and dense output
//! - [`errest`]: doubled-mesh global error estimation
//! - [`problems`]: benchmark problem registry
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature additionally enables wall-clock timing statistics on solutions.
//!
//! # Example
//!
//! ```
//! use fhbvm_core::problems;
//! use fhbvm_core::solver::{solve, SolverConfig};
//!
//! // y' = -y with α = 1 reduces to a classical ODE.
//! let problem = problems::decay_test_problem();
//! let sol = solve(&problem, 2, &SolverConfig::default(), false).unwrap();
//! let err = (sol.endpoints.last().unwrap()[0] - (-1.0f64).exp()).abs();
//! assert!(err < 1e-12);
//! ```

extern crate alloc;

pub mod basis;
pub mod errest;
mod error;
pub mod fracint;
pub mod linalg;
mod math;
pub mod mesh;
pub mod problems;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
