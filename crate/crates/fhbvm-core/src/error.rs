use core::fmt;

/// Errors reported by the solver stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    /// Matrix is singular to working precision.
    SingularMatrix,
    /// Eigenvalue iteration did not converge within its sweep budget.
    EigenNoConvergence,
    /// Function argument outside the supported domain.
    Domain(&'static str),
    /// Invalid solver configuration.
    Config(&'static str),
    /// The mesh refinement probe did not settle within the level budget.
    MeshNotSettled { levels: usize },
    /// Graded mesh parameters overflowed the floating-point range.
    MeshOverflow,
    /// Nonlinear iteration failed to converge at an integration step.
    StepNoConvergence { step: usize, t: f64 },
    /// The right-hand side returned a non-finite value at an integration step.
    NonFiniteRhs { step: usize, t: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SingularMatrix => write!(f, "matrix is singular to working precision"),
            Self::EigenNoConvergence => write!(f, "eigenvalue iteration did not converge"),
            Self::Domain(what) => write!(f, "domain error: {what}"),
            Self::Config(what) => write!(f, "invalid configuration: {what}"),
            Self::MeshNotSettled { levels } => {
                write!(f, "mesh refinement did not settle after {levels} levels")
            }
            Self::MeshOverflow => write!(f, "graded mesh parameters overflow"),
            Self::StepNoConvergence { step, t } => {
                write!(f, "nonlinear iteration did not converge at step {step} (t = {t:e})")
            }
            Self::NonFiniteRhs { step, t } => {
                write!(f, "right-hand side returned a non-finite value at step {step} (t = {t:e})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
