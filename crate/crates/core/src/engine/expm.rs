//! Actions of matrix exponentials, `e^{tM} v`.
//!
//! Small and medium problems use a truncated Taylor series applied directly
//! to the vector, after splitting `t` so that every piece has norm at most
//! one. Larger problems project onto a Krylov subspace built by Arnoldi and
//! exponentiate the small Hessenberg matrix, shrinking the time step until
//! the residual estimate drops below tolerance.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::EngineError;
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpmOptions {
    /// Dimensions above this use the Krylov path.
    pub dense_threshold: usize,
    pub krylov_dim: usize,
    /// Relative residual tolerance for the Krylov path.
    pub tol: f64,
    pub max_substeps: usize,
}

impl Default for ExpmOptions {
    fn default() -> Self {
        ExpmOptions { dense_threshold: 256, krylov_dim: 40, tol: 1e-12, max_substeps: 10_000 }
    }
}

pub fn norm1(m: &Matrix<f64>) -> f64 {
    (0..m.cols()).map(|j| (0..m.rows()).map(|i| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn norm_inf_vec(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    Float::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

/// `e^{tM} v` with the default options.
pub fn expm_action(m: &Matrix<f64>, v: &[f64], t: f64) -> Result<Vec<f64>, EngineError> {
    expm_action_with(m, v, t, &ExpmOptions::default())
}

pub fn expm_action_with(m: &Matrix<f64>, v: &[f64], t: f64, opts: &ExpmOptions) -> Result<Vec<f64>, EngineError> {
    if !m.is_square() || m.rows() != v.len() {
        return Err(EngineError::Shape("matrix and vector dimensions differ"));
    }
    if !t.is_finite() || m.as_slice().iter().chain(v).any(|x| !x.is_finite()) {
        return Err(EngineError::NonFinite);
    }
    if m.rows() > opts.dense_threshold {
        krylov_action(m, v, t, opts)
    } else {
        Ok(taylor_action(m, v, t))
    }
}

/// Taylor series on pieces of `tM` with 1-norm at most one; each piece is
/// summed until two consecutive terms are negligible.
pub fn taylor_action(m: &Matrix<f64>, v: &[f64], t: f64) -> Vec<f64> {
    let scaled_norm = t.abs() * norm1(m);
    let pieces = if scaled_norm <= 1.0 { 1 } else { Float::ceil(scaled_norm) as usize };
    let h = t / pieces as f64;
    let mut out = v.to_vec();
    for _ in 0..pieces {
        let mut term = out.clone();
        let mut sum = out.clone();
        let mut previous_small = false;
        for k in 1..=60 {
            term = m.matvec(&term);
            let factor = h / k as f64;
            term.iter_mut().for_each(|x| *x *= factor);
            for (s, x) in sum.iter_mut().zip(&term) {
                *s += x;
            }
            let small = norm_inf_vec(&term) <= f64::EPSILON * 0.5 * norm_inf_vec(&sum);
            if (small && previous_small) || term.iter().all(|&x| x == 0.0) {
                break;
            }
            previous_small = small;
        }
        out = sum;
    }
    out
}

/// Dense `e^{A}` by scaling and squaring a Taylor polynomial.
pub fn expm_dense(a: &Matrix<f64>) -> Matrix<f64> {
    let n = a.rows();
    let norm = norm1(a);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = a.scale(&scale);
    let mut term = Matrix::<f64>::identity(n);
    let mut sum = Matrix::<f64>::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled).scale(&(1.0 / k as f64));
        sum = sum.add(&term);
        if norm1(&term) <= f64::EPSILON * 0.5 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

fn krylov_action(m: &Matrix<f64>, v: &[f64], t: f64, opts: &ExpmOptions) -> Result<Vec<f64>, EngineError> {
    let n = v.len();
    let mut w = v.to_vec();
    let mut remaining = t;
    let mut step = t;
    let mut substeps = 0;
    while remaining != 0.0 {
        let beta = norm2(&w);
        if beta == 0.0 {
            return Ok(w);
        }
        let dim = opts.krylov_dim.min(n);
        // Arnoldi with modified Gram-Schmidt.
        let mut basis: Vec<Vec<f64>> = vec![w.iter().map(|x| x / beta).collect()];
        let mut hess = Matrix::<f64>::zeros(dim + 1, dim);
        let mut size = dim;
        let mut breakdown = false;
        for j in 0..dim {
            let mut z = m.matvec(&basis[j]);
            for (i, q) in basis.iter().enumerate() {
                let hij: f64 = q.iter().zip(&z).map(|(a, b)| a * b).sum();
                hess[(i, j)] = hij;
                z.iter_mut().zip(q).for_each(|(zi, qi)| *zi -= hij * qi);
            }
            let hnext = norm2(&z);
            hess[(j + 1, j)] = hnext;
            if hnext <= 1e-14 * norm1(m).max(1.0) {
                size = j + 1;
                breakdown = true;
                break;
            }
            basis.push(z.iter().map(|x| x / hnext).collect());
        }
        let small = Matrix::from_fn(size, size, |i, j| hess[(i, j)]);
        let h_last = hess[(size, size - 1)];
        substeps += 1;
        loop {
            if substeps > opts.max_substeps {
                return Err(EngineError::KrylovNonConvergence { substeps });
            }
            let e = expm_dense(&small.scale(&step));
            let coeffs: Vec<f64> = (0..size).map(|i| e[(i, 0)]).collect();
            let err = if breakdown { 0.0 } else { (step * h_last * coeffs[size - 1]).abs() };
            if err <= opts.tol {
                let mut next = vec![0.0; n];
                for (c, q) in coeffs.iter().zip(&basis) {
                    next.iter_mut().zip(q).for_each(|(x, qi)| *x += beta * c * qi);
                }
                w = next;
                remaining -= step;
                if remaining.abs() <= 1e-15 * t.abs() {
                    remaining = 0.0;
                }
                step = if remaining.abs() < step.abs() { remaining } else { step };
                break;
            }
            step *= 0.5;
            substeps += 1;
        }
    }
    Ok(w)
}
