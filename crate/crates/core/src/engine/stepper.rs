use alloc::vec::Vec;

use super::expm::{expm_action_with, ExpmOptions};
use super::problem::{Generator, ProblemSpec};
use super::EngineError;
use crate::linalg::Matrix;
use crate::scheme::{derive_coefficients, Scheme};

/// A scheme's coefficients in `f64`, with `b` and `y` rounded from their
/// derived values.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatScheme {
    pub a: Matrix<f64>,
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub y: Vec<f64>,
}

impl FloatScheme {
    pub fn new(scheme: &Scheme) -> Self {
        let dc = derive_coefficients(scheme);
        FloatScheme {
            a: scheme.coefficients_f64(),
            c: scheme.nodes_f64(),
            b: dc.b.iter().map(|x| x.to_f64()).collect(),
            y: dc.y.iter().map(|x| x.to_f64()).collect(),
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// The sub-step generators `B_j(t_n, τ)` of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepContext {
    pub t_n: f64,
    pub tau: f64,
    pub generators: Vec<Matrix<f64>>,
}

impl StepContext {
    /// Uses `b_j (A0 + t_n A1) + τ y_j A1` for linear-in-time generators,
    /// `b_j A` for constant ones and the node sum otherwise.
    pub fn new(scheme: &FloatScheme, problem: &ProblemSpec, t_n: f64, tau: f64) -> Self {
        let generators = match &problem.generator {
            Generator::Constant(a) => scheme.b.iter().map(|b| a.scale(b)).collect(),
            Generator::LinearInTime { a0, a1 } => {
                let frozen = a0.add(&a1.scale(&t_n));
                scheme.b.iter().zip(&scheme.y).map(|(b, y)| frozen.scale(b).add(&a1.scale(&(tau * y)))).collect()
            }
            Generator::Callback(_) => Self::node_sum(scheme, problem, t_n, tau),
        };
        StepContext { t_n, tau, generators }
    }

    /// `B_j = Σ_k a_{jk} A(t_n + c_k τ)` evaluated at the nodes.
    pub fn node_sum(scheme: &FloatScheme, problem: &ProblemSpec, t_n: f64, tau: f64) -> Vec<Matrix<f64>> {
        let samples: Vec<Matrix<f64>> = scheme.c.iter().map(|c| problem.generator.at(t_n + c * tau)).collect();
        let d = problem.dim();
        (0..scheme.stages())
            .map(|j| {
                samples.iter().enumerate().fold(Matrix::zeros(d, d), |acc, (k, a)| acc.add(&a.scale(&scheme.a[(j, k)])))
            })
            .collect()
    }
}

/// Applies `e^{τ B_J} ⋯ e^{τ B_1}` to `u`, returning every intermediate vector
/// (`u` first, the new state last).
pub fn step_stages(
    scheme: &FloatScheme,
    problem: &ProblemSpec,
    t_n: f64,
    tau: f64,
    u: &[f64],
    opts: &ExpmOptions,
) -> Result<Vec<Vec<f64>>, EngineError> {
    if !(tau > 0.0) {
        return Err(EngineError::StepSize);
    }
    let ctx = StepContext::new(scheme, problem, t_n, tau);
    let mut stages = Vec::with_capacity(ctx.generators.len() + 1);
    stages.push(u.to_vec());
    for b in &ctx.generators {
        let next = expm_action_with(b, stages.last().expect("non-empty"), tau, opts)?;
        stages.push(next);
    }
    Ok(stages)
}

pub fn step(scheme: &Scheme, problem: &ProblemSpec, t_n: f64, tau: f64, u: &[f64]) -> Result<Vec<f64>, EngineError> {
    let fs = FloatScheme::new(scheme);
    let mut stages = step_stages(&fs, problem, t_n, tau, u, &ExpmOptions::default())?;
    Ok(stages.pop().expect("at least the input"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// The final step was shorter than `τ` to land on `t_end`.
    pub last_step_shortened: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds u0")
    }
}

pub const MAX_STEPS: usize = 10_000_000;

/// Uniform grid `t0 + nτ`; a shortened last step hits `t_end` exactly.
pub fn integrate(scheme: &Scheme, problem: &ProblemSpec, tau: f64) -> Result<Trajectory, EngineError> {
    integrate_with(&FloatScheme::new(scheme), problem, tau, &ExpmOptions::default())
}

pub fn integrate_with(
    scheme: &FloatScheme,
    problem: &ProblemSpec,
    tau: f64,
    opts: &ExpmOptions,
) -> Result<Trajectory, EngineError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(EngineError::StepSize);
    }
    let span = problem.t_end - problem.t0;
    let ratio = span / tau;
    let nearest = num_traits::Float::round(ratio);
    let (full_steps, shortened) = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        (nearest, false)
    } else {
        (num_traits::Float::floor(ratio), true)
    };
    if full_steps + 1.0 > MAX_STEPS as f64 {
        return Err(EngineError::GridBudget { steps: full_steps as usize });
    }
    let full_steps = full_steps as usize;
    let mut times = Vec::with_capacity(full_steps + 2);
    let mut states = Vec::with_capacity(full_steps + 2);
    let mut u = problem.u0.clone();
    times.push(problem.t0);
    states.push(u.clone());
    for n in 0..full_steps {
        let t_n = problem.t0 + n as f64 * tau;
        u = step_stages(scheme, problem, t_n, tau, &u, opts)?.pop().expect("non-empty");
        times.push(if n + 1 == full_steps && !shortened { problem.t_end } else { t_n + tau });
        states.push(u.clone());
    }
    if shortened {
        let t_n = problem.t0 + full_steps as f64 * tau;
        let last = problem.t_end - t_n;
        u = step_stages(scheme, problem, t_n, last, &u, opts)?.pop().expect("non-empty");
        times.push(problem.t_end);
        states.push(u);
    }
    Ok(Trajectory { times, states, last_step_shortened: shortened })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::expm::{expm_action, norm2};
    use crate::engine::problem::preset;
    use crate::scheme::{cf4, left_endpoint, midpoint, negative_weight_demo};
    use alloc::vec;
    use num_traits::Float;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        norm2(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
    }

    #[test]
    fn constant_generator_reduces_to_single_exponential() {
        let a = Matrix::from_rows(vec![vec![-1.0, 0.4], vec![0.2, -0.7]]).unwrap();
        let p = ProblemSpec::new("c", Generator::Constant(a.clone()), vec![1.0, -1.0], 0.0, 1.0).unwrap();
        let want = expm_action(&a, &p.u0, 0.3).unwrap();
        for s in [midpoint(), cf4(), left_endpoint(), negative_weight_demo()] {
            let got = step(&s, &p, 0.0, 0.3, &p.u0).unwrap();
            assert!(dist(&got, &want) < 1e-13, "{}", s.name());
        }
    }

    #[test]
    fn midpoint_on_commuting_problem_is_exact() {
        let p = preset("commuting-diagonal").unwrap();
        let Generator::LinearInTime { a0, a1 } = &p.generator else { panic!() };
        let tau = 0.25;
        let got = step(&midpoint(), &p, 0.0, tau, &p.u0).unwrap();
        let exponent = a0.scale(&tau).add(&a1.scale(&(tau * tau / 2.0)));
        let want = expm_action(&exponent, &p.u0, 1.0).unwrap();
        assert!(dist(&got, &want) < 1e-14);
    }

    #[test]
    fn node_form_matches_closed_form() {
        let p = preset("noncommuting-2x2").unwrap();
        for s in [cf4(), midpoint(), negative_weight_demo()] {
            let fs = FloatScheme::new(&s);
            let closed = StepContext::new(&fs, &p, 0.3, 0.125).generators;
            let nodes = StepContext::node_sum(&fs, &p, 0.3, 0.125);
            for (x, y) in closed.iter().zip(&nodes) {
                let diff = x.sub(y);
                assert!(diff.as_slice().iter().all(|v| v.abs() < 1e-14));
            }
        }
    }

    #[test]
    fn callback_generator_uses_nodes() {
        let base = preset("noncommuting-2x2").unwrap();
        let Generator::LinearInTime { a0, a1 } = base.generator.clone() else { panic!() };
        let cb = Generator::Callback(alloc::sync::Arc::new(move |t| a0.add(&a1.scale(&t))));
        let p = ProblemSpec::new("cb", cb, base.u0.clone(), 0.0, 1.0).unwrap();
        let a = integrate(&cf4(), &p, 0.1).unwrap();
        let b = integrate(&cf4(), &base, 0.1).unwrap();
        assert!(dist(a.final_state(), b.final_state()) < 1e-13);
    }

    #[test]
    fn cf4_local_error_is_fifth_order() {
        let p = preset("noncommuting-2x2").unwrap();
        let one_step_error = |tau: f64| {
            let got = step(&cf4(), &p, 0.0, tau, &p.u0).unwrap();
            let fine = p.with_interval(0.0, tau).unwrap();
            let reference = integrate(&cf4(), &fine, tau / 256.0).unwrap();
            dist(&got, reference.final_state())
        };
        let ratio = one_step_error(0.2) / one_step_error(0.1);
        assert!((24.0..=40.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn grid_handling() {
        let p = preset("zero").unwrap();
        let t = integrate(&midpoint(), &p, 0.25).unwrap();
        assert_eq!(t.times.len(), 5);
        assert!(!t.last_step_shortened);
        assert!(t.states.iter().all(|u| u == &p.u0));
        let t = integrate(&midpoint(), &p, 0.3).unwrap();
        assert!(t.last_step_shortened);
        assert_eq!(*t.times.last().unwrap(), 1.0);
        assert_eq!(t.times.len(), 5);
        assert!(integrate(&midpoint(), &p, 0.0).is_err());
        assert!(integrate(&midpoint(), &p, 1e-9).is_err());
    }

    #[test]
    fn diagonal_constant_problem_endpoint() {
        let lam = [-2.0, 0.3, -0.5];
        let p =
            ProblemSpec::new("d", Generator::Constant(Matrix::diagonal(&lam)), vec![1.0, 2.0, 3.0], 0.0, 1.5).unwrap();
        let t = integrate(&cf4(), &p, 0.1).unwrap();
        for i in 0..3 {
            let want = Float::exp(1.5 * lam[i]) * p.u0[i];
            assert!((t.final_state()[i] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn cf4_beats_midpoint() {
        let p = preset("noncommuting-2x2").unwrap();
        let reference = integrate(&cf4(), &p, 1.0 / 4096.0).unwrap();
        let err = |s: &Scheme| dist(integrate(s, &p, 1.0 / 64.0).unwrap().final_state(), reference.final_state());
        assert!(err(&midpoint()) >= 100.0 * err(&cf4()));
    }
}
