//! Reference integrator: the scheme's step map, a reference solution, an
//! empirical order estimator and a per-stage amplification probe.

use core::fmt;

pub mod convergence;
pub mod expm;
pub mod problem;
pub mod stability;
pub mod stepper;

pub use convergence::{empirical_order, halving_steps, reference_solution, ConvergenceReport, ReferenceSolution};
pub use expm::{expm_action, ExpmOptions};
pub use problem::{preset, Generator, ProblemSpec, PRESET_NAMES};
pub use stability::amplification_probe;
pub use stepper::{integrate, step, FloatScheme, StepContext, Trajectory};

#[derive(Clone, Debug, PartialEq)]
pub enum EngineError {
    Shape(&'static str),
    NonFinite,
    /// `t_end` not after `t0`.
    Interval,
    StepSize,
    GridBudget {
        steps: usize,
    },
    KrylovNonConvergence {
        substeps: usize,
    },
    Tolerance,
    ReferenceNotConverged {
        tol: f64,
    },
    StepList(&'static str),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            EngineError::NonFinite => f.write_str("non-finite value encountered"),
            EngineError::Interval => f.write_str("integration interval is empty"),
            EngineError::StepSize => f.write_str("step size must be positive and finite"),
            EngineError::GridBudget { steps } => write!(f, "grid of {steps} steps exceeds the step budget"),
            EngineError::KrylovNonConvergence { substeps } => {
                write!(f, "Krylov exponential did not converge within {substeps} substeps")
            }
            EngineError::Tolerance => f.write_str("reference tolerance below 1e-13 is not attainable in f64"),
            EngineError::ReferenceNotConverged { tol } => {
                write!(f, "reference solution did not reach tolerance {tol:e}")
            }
            EngineError::StepList(msg) => write!(f, "invalid step-size list: {msg}"),
        }
    }
}

impl core::error::Error for EngineError {}
