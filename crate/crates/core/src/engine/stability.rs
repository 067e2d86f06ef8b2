use alloc::vec::Vec;

use super::expm::{norm2, ExpmOptions};
use super::problem::ProblemSpec;
use super::stepper::{step_stages, FloatScheme};
use super::EngineError;
use crate::scheme::Scheme;

/// Per-stage growth `‖v_j‖ / ‖v_{j-1}‖` over one step from `u0` at `t0`.
///
/// A sub-step with `b_j < 0` runs the heat flow backwards and shows up as a
/// factor far above one on stiff problems.
pub fn amplification_probe(scheme: &Scheme, problem: &ProblemSpec, tau: f64) -> Result<Vec<f64>, EngineError> {
    if norm2(&problem.u0) == 0.0 {
        return Err(EngineError::Shape("initial vector must be non-zero"));
    }
    let fs = FloatScheme::new(scheme);
    let stages = step_stages(&fs, problem, problem.t0, tau, &problem.u0, &ExpmOptions::default())?;
    let mut out = Vec::with_capacity(stages.len() - 1);
    for pair in stages.windows(2) {
        let before = norm2(&pair[0]);
        let ratio = if before == 0.0 { 0.0 } else { norm2(&pair[1]) / before };
        if !ratio.is_finite() {
            return Err(EngineError::NonFinite);
        }
        out.push(ratio);
    }
    Ok(out)
}
