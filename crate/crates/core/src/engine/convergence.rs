use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use num_traits::Float;

use super::expm::{norm2, norm_inf_vec, ExpmOptions};
use super::problem::ProblemSpec;
use super::stepper::{integrate_with, FloatScheme};
use super::EngineError;
use crate::scheme::{cf4, Scheme};

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSolution {
    pub state: Vec<f64>,
    /// Change between the last two extrapolated answers.
    pub accuracy: f64,
    pub steps: usize,
}

/// Halvings allowed before giving up: at most `8 · 2^16` steps.
const MAX_HALVINGS: u32 = 16;

/// State at `t` from the bundled fourth-order scheme, halving the step and
/// Richardson-extrapolating until successive answers agree to `tol`
/// (relative to `max(1, |u|)`).
pub fn reference_solution(problem: &ProblemSpec, t: f64, tol: f64) -> Result<ReferenceSolution, EngineError> {
    if !(tol >= 1e-13) {
        return Err(EngineError::Tolerance);
    }
    let interval = problem.with_interval(problem.t0, t)?;
    let scheme = FloatScheme::new(&cf4());
    let opts = ExpmOptions::default();
    let span = t - problem.t0;
    let solve = |steps: usize| -> Result<Vec<f64>, EngineError> {
        Ok(integrate_with(&scheme, &interval, span / steps as f64, &opts)?.final_state().to_vec())
    };
    let mut steps = 8;
    let mut coarse = solve(steps)?;
    let mut previous_extrapolated: Option<Vec<f64>> = None;
    for _ in 0..MAX_HALVINGS {
        steps *= 2;
        let fine = solve(steps)?;
        let extrapolated: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| f + (f - c) / 15.0).collect();
        if let Some(prev) = &previous_extrapolated {
            let diff: Vec<f64> = extrapolated.iter().zip(prev).map(|(a, b)| a - b).collect();
            let change = norm_inf_vec(&diff);
            let scale = norm_inf_vec(&extrapolated).max(1.0);
            if change <= tol * scale {
                return Ok(ReferenceSolution { state: extrapolated, accuracy: change, steps });
            }
        }
        previous_extrapolated = Some(extrapolated);
        coarse = fine;
    }
    Err(EngineError::ReferenceNotConverged { tol })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub taus: Vec<f64>,
    /// Euclidean error at `t_end` for each step size.
    pub errors: Vec<f64>,
    /// `log2(e(τ_i) / e(τ_{i+1}))`; `None` when either error was excluded.
    pub observed_orders: Vec<Option<f64>>,
    /// Least-squares slope of `log e` against `log τ` over retained points.
    pub fitted_order: Option<f64>,
    /// Every error is exactly zero.
    pub exact: bool,
    pub excluded: Vec<usize>,
    pub reference_accuracy: f64,
    pub notes: Vec<String>,
}

pub fn empirical_order(scheme: &Scheme, problem: &ProblemSpec, taus: &[f64]) -> Result<ConvergenceReport, EngineError> {
    empirical_order_with(scheme, problem, taus, 1e-12)
}

pub fn empirical_order_with(
    scheme: &Scheme,
    problem: &ProblemSpec,
    taus: &[f64],
    reference_tol: f64,
) -> Result<ConvergenceReport, EngineError> {
    if taus.len() < 4 {
        return Err(EngineError::StepList("need at least four step sizes"));
    }
    if taus.windows(2).any(|w| (w[0] / w[1] - 2.0).abs() > 1e-9) {
        return Err(EngineError::StepList("step sizes must halve from one entry to the next"));
    }
    let reference = reference_solution(problem, problem.t_end, reference_tol)?;
    let fs = FloatScheme::new(scheme);
    let opts = ExpmOptions::default();
    let mut errors = Vec::with_capacity(taus.len());
    for &tau in taus {
        let traj = integrate_with(&fs, problem, tau, &opts)?;
        let diff: Vec<f64> = traj.final_state().iter().zip(&reference.state).map(|(a, b)| a - b).collect();
        errors.push(norm2(&diff));
    }
    let mut notes = Vec::new();
    let exact = errors.iter().all(|&e| e == 0.0);
    let floor = 100.0 * reference.accuracy;
    let excluded: Vec<usize> = if exact {
        Vec::new()
    } else {
        (0..errors.len()).filter(|&i| errors[i] <= floor || errors[i] == 0.0).collect()
    };
    for &i in &excluded {
        notes.push(format!(
            "tau = {} excluded: error {:.3e} within 100x reference accuracy {:.3e}",
            taus[i], errors[i], reference.accuracy
        ));
    }
    let kept = |i: usize| !excluded.contains(&i);
    let observed_orders = (0..taus.len() - 1)
        .map(|i| (!exact && kept(i) && kept(i + 1)).then(|| Float::log2(errors[i] / errors[i + 1])))
        .collect();
    let points: Vec<(f64, f64)> =
        (0..taus.len()).filter(|&i| !exact && kept(i)).map(|i| (Float::ln(taus[i]), Float::ln(errors[i]))).collect();
    let fitted_order = if points.len() >= 2 {
        Some(least_squares_slope(&points))
    } else {
        if !exact {
            notes.push(String::from("fewer than two usable step sizes; no order fitted"));
        }
        None
    };
    Ok(ConvergenceReport {
        taus: taus.to_vec(),
        errors,
        observed_orders,
        fitted_order,
        exact,
        excluded,
        reference_accuracy: reference.accuracy,
        notes,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `τ0, τ0/2, …` with `count` entries.
pub fn halving_steps(first: f64, count: usize) -> Vec<f64> {
    let mut out = vec![first];
    for _ in 1..count {
        let last = *out.last().expect("non-empty");
        out.push(last / 2.0);
    }
    out
}
