//! Least-squares model for searching positive-weight schemes.
//!
//! The unknowns are `θ_1..θ_{J-1}` (with `θ_J = 0`) and `y_1..y_J`. Weights
//! come from a normalised softplus,
//! `b_j = ε + (1 − Jε) · sp(θ_j) / Σ_k sp(θ_k)`, so every `b_j ≥ ε` and
//! `Σ b = 1` identically. The residuals are the order conditions in `f64`
//! with their Jacobian in closed form.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::linalg::Matrix;

/// Indices into the six-residual ladder required for order `p`.
pub fn active_residuals(p: usize) -> &'static [usize] {
    match p {
        0 => &[],
        1 => &[0],
        2 => &[0, 1],
        3 => &[0, 1, 2],
        4 => &[0, 1, 2, 3],
        _ => &[0, 1, 2, 3, 4, 5],
    }
}

/// Centered prefix sums `Σ_{k<j} v_k + v_j / 2`.
fn centered(v: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    v.iter()
        .map(|x| {
            let h = acc + x / 2.0;
            acc += x;
            h
        })
        .collect()
}

/// `∂hat_j / ∂v_k`: 1 below the diagonal, 1/2 on it.
fn centered_derivative(j: usize, k: usize) -> f64 {
    match k.cmp(&j) {
        core::cmp::Ordering::Less => 1.0,
        core::cmp::Ordering::Equal => 0.5,
        core::cmp::Ordering::Greater => 0.0,
    }
}

/// The six residuals in ladder order.
pub fn residuals_f64(b: &[f64], y: &[f64]) -> [f64; 6] {
    let bh = centered(b);
    let yh = centered(y);
    let mut r = [-1.0, -0.5, -1.0 / 3.0, -0.25, -0.2, -0.05];
    for j in 0..b.len() {
        let (bj, yj, h, g) = (b[j], y[j], bh[j], yh[j]);
        r[0] += bj;
        r[1] += yj;
        r[2] += h * yj;
        r[3] += (h * h + bj * bj / 12.0) * yj;
        r[4] += (h * h * h + h * bj * bj / 4.0) * yj;
        r[5] += (g * g + yj * yj / 12.0) * bj;
    }
    r
}

/// `6 × 2J` Jacobian of [`residuals_f64`] with columns `(b, y)`.
pub fn residual_jacobian(b: &[f64], y: &[f64]) -> Matrix<f64> {
    let n = b.len();
    let bh = centered(b);
    let yh = centered(y);
    let mut jac = Matrix::zeros(6, 2 * n);
    for k in 0..n {
        jac[(0, k)] = 1.0;
        jac[(1, n + k)] = 1.0;
        jac[(2, n + k)] = bh[k];
        jac[(3, n + k)] = bh[k] * bh[k] + b[k] * b[k] / 12.0;
        jac[(4, n + k)] = bh[k] * bh[k] * bh[k] + bh[k] * b[k] * b[k] / 4.0;
        jac[(5, k)] = yh[k] * yh[k] + y[k] * y[k] / 12.0;
        jac[(3, k)] += y[k] * b[k] / 6.0;
        jac[(4, k)] += y[k] * bh[k] * b[k] / 2.0;
        jac[(5, n + k)] += b[k] * y[k] / 6.0;
        for j in k..n {
            let l = centered_derivative(j, k);
            jac[(2, k)] += y[j] * l;
            jac[(3, k)] += y[j] * 2.0 * bh[j] * l;
            jac[(4, k)] += y[j] * (3.0 * bh[j] * bh[j] + b[j] * b[j] / 4.0) * l;
            jac[(5, n + k)] += b[j] * 2.0 * yh[j] * l;
        }
    }
    jac
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        Float::ln_1p(Float::exp(x))
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + Float::exp(-x))
}

/// The positive, normalised parameterisation of the search space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchModel {
    pub stages: usize,
    pub target_order: usize,
    /// Lower bound on every weight.
    pub eps: f64,
}

impl SearchModel {
    /// `None` unless `J ≥ 1`, `1 ≤ p ≤ 5` and `0 < ε < 1/J`.
    pub fn new(stages: usize, target_order: usize, eps: f64) -> Option<Self> {
        let ok = stages >= 1 && (1..=5).contains(&target_order) && eps > 0.0 && eps * (stages as f64) < 1.0;
        ok.then_some(SearchModel { stages, target_order, eps })
    }

    pub fn param_count(&self) -> usize {
        2 * self.stages - 1
    }

    pub fn residual_count(&self) -> usize {
        active_residuals(self.target_order).len()
    }

    fn thetas(&self, params: &[f64]) -> Vec<f64> {
        let mut t = params[..self.stages - 1].to_vec();
        t.push(0.0);
        t
    }

    /// `(b, y)` at a parameter vector.
    pub fn weights(&self, params: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let theta = self.thetas(params);
        let s: Vec<f64> = theta.iter().map(|&t| softplus(t)).collect();
        let total: f64 = s.iter().sum();
        let scale = 1.0 - self.stages as f64 * self.eps;
        let b = s.iter().map(|x| self.eps + scale * x / total).collect();
        (b, params[self.stages - 1..].to_vec())
    }

    /// Parameters mapping to `y` and to `b` as closely as the softplus allows.
    /// `b` must be positive; it is renormalised first.
    pub fn params_for(&self, b: &[f64], y: &[f64]) -> Vec<f64> {
        let total: f64 = b.iter().sum();
        let scale = 1.0 - self.stages as f64 * self.eps;
        // Shares of the softplus mass, recovered up to the common factor fixed by θ_J = 0.
        let shares: Vec<f64> = b.iter().map(|x| ((x / total - self.eps) / scale).max(1e-12)).collect();
        let last = shares[self.stages - 1];
        let mut out: Vec<f64> = shares[..self.stages - 1]
            .iter()
            .map(|sh| {
                let target = sh / last * softplus(0.0);
                // Inverse softplus.
                if target > 30.0 {
                    target
                } else {
                    Float::ln(Float::exp_m1(target))
                }
            })
            .collect();
        out.extend_from_slice(y);
        out
    }

    /// Active residuals at `params`.
    pub fn residuals(&self, params: &[f64]) -> Vec<f64> {
        let (b, y) = self.weights(params);
        let r = residuals_f64(&b, &y);
        active_residuals(self.target_order).iter().map(|&i| r[i]).collect()
    }

    /// Euclidean norm over all six residuals.
    pub fn full_norm(&self, params: &[f64]) -> f64 {
        let (b, y) = self.weights(params);
        Float::sqrt(residuals_f64(&b, &y).iter().map(|x| x * x).sum::<f64>())
    }

    pub fn objective_norm(&self, params: &[f64]) -> f64 {
        Float::sqrt(self.residuals(params).iter().map(|x| x * x).sum::<f64>())
    }

    /// Jacobian of [`SearchModel::residuals`] with respect to the parameters.
    pub fn jacobian(&self, params: &[f64]) -> Matrix<f64> {
        let n = self.stages;
        let (b, y) = self.weights(params);
        let inner = residual_jacobian(&b, &y);
        let theta = self.thetas(params);
        let s: Vec<f64> = theta.iter().map(|&t| softplus(t)).collect();
        let total: f64 = s.iter().sum();
        let scale = 1.0 - n as f64 * self.eps;
        // ∂b_j/∂θ_k for the free θ's.
        let mut db = vec![vec![0.0; n - 1]; n];
        for (j, row) in db.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                let sig = logistic(theta[k]);
                let delta = if j == k { sig / total } else { 0.0 };
                *entry = scale * (delta - s[j] * sig / (total * total));
            }
        }
        let rows = active_residuals(self.target_order);
        Matrix::from_fn(rows.len(), self.param_count(), |r, p| {
            let i = rows[r];
            if p < n - 1 {
                (0..n).map(|j| inner[(i, j)] * db[j][p]).sum()
            } else {
                inner[(i, n + p - (n - 1))]
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::residuals_order5;
    use crate::scalar::Scalar;
    use crate::scheme::DerivedCoefficients;

    #[test]
    fn float_residuals_match_scalar_path() {
        let b = [0.2, 0.5, 0.3];
        let y = [0.01, 0.3, 0.2];
        let dc = DerivedCoefficients::from_weights(
            b.iter().map(|&x| Scalar::Float(x)).collect(),
            y.iter().map(|&x| Scalar::Float(x)).collect(),
        )
        .unwrap();
        let want = residuals_order5(&dc);
        let got = residuals_f64(&b, &y);
        for (g, (_, w)) in got.iter().zip(want.entries()) {
            assert!((g - w.to_f64()).abs() < 1e-15);
        }
    }

    #[test]
    fn fourth_order_point_has_zero_residuals() {
        let r = residuals_f64(&[0.5, 0.5], &[1.0 / 12.0, 5.0 / 12.0]);
        assert!(r[..4].iter().all(|x| x.abs() < 1e-15));
        assert!((r[4] + 1.0 / 480.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        for (stages, p) in [(1, 2), (2, 4), (2, 5), (3, 5), (4, 5)] {
            let m = SearchModel::new(stages, p, 1e-6).unwrap();
            let params: Vec<f64> = (0..m.param_count()).map(|i| 0.3 * (i as f64 + 1.0).sin()).collect();
            let jac = m.jacobian(&params);
            for k in 0..m.param_count() {
                let h = 1e-6;
                let mut up = params.clone();
                let mut down = params.clone();
                up[k] += h;
                down[k] -= h;
                let (ru, rd) = (m.residuals(&up), m.residuals(&down));
                for r in 0..m.residual_count() {
                    let fd = (ru[r] - rd[r]) / (2.0 * h);
                    assert!((fd - jac[(r, k)]).abs() < 1e-8, "J={stages} p={p} ({r},{k})");
                }
            }
        }
    }

    #[test]
    fn reparameterisation_is_positive_and_normalised() {
        let m = SearchModel::new(4, 5, 1e-3).unwrap();
        let (b, _) = m.weights(&[-50.0, 40.0, 0.1, 0.0, 0.0, 0.0, 0.0]);
        assert!(b.iter().all(|&x| x >= 1e-3));
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn params_round_trip() {
        let m = SearchModel::new(3, 5, 1e-6).unwrap();
        let b = [0.2, 0.5, 0.3];
        let y = [0.1, 0.2, 0.3];
        let (b2, y2) = m.weights(&m.params_for(&b, &y));
        assert!(b.iter().zip(&b2).all(|(a, c)| (a - c).abs() < 1e-12));
        assert_eq!(y2, y.to_vec());
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(SearchModel::new(0, 5, 1e-6).is_none());
        assert!(SearchModel::new(2, 6, 1e-6).is_none());
        assert!(SearchModel::new(2, 5, 0.0).is_none());
        assert!(SearchModel::new(2, 5, 0.5).is_none());
    }
}
