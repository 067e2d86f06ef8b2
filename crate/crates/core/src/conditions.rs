//! The six order conditions for the linear-in-time problem class
//! `u' = (A0 + t A1) u`, and their hyperplane/quadric form.
//!
//! These are necessary conditions: a scheme meeting all six is not thereby
//! proven to have order five for general `A(t)`.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::linalg::dot;
use crate::scalar::Scalar;
use crate::scheme::DerivedCoefficients;

/// Left side minus right side of each condition.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualVector {
    /// `Σ b_j − 1`
    pub r_sum_b: Scalar,
    /// `Σ y_j − 1/2`
    pub r_sum_y: Scalar,
    /// `Σ bhat_j y_j − 1/3`
    pub r_bhat_y: Scalar,
    /// `Σ (bhat_j² + b_j²/12) y_j − 1/4`
    pub r_bhat2: Scalar,
    /// `Σ (bhat_j³ + bhat_j b_j²/4) y_j − 1/5`
    pub r_bhat3: Scalar,
    /// `Σ (yhat_j² + y_j²/12) b_j − 1/20`
    pub r_quad: Scalar,
}

impl ResidualVector {
    pub const NAMES: [&'static str; 6] = ["r_sum_b", "r_sum_y", "r_bhat_y", "r_bhat2", "r_bhat3", "r_quad"];

    /// Residuals in ladder order, paired with their names.
    pub fn entries(&self) -> [(&'static str, &Scalar); 6] {
        [
            ("r_sum_b", &self.r_sum_b),
            ("r_sum_y", &self.r_sum_y),
            ("r_bhat_y", &self.r_bhat_y),
            ("r_bhat2", &self.r_bhat2),
            ("r_bhat3", &self.r_bhat3),
            ("r_quad", &self.r_quad),
        ]
    }

    pub fn is_exact(&self) -> bool {
        self.entries().iter().all(|(_, r)| r.is_exact())
    }

    /// Residuals that must vanish for the given order, `p ∈ 1..=5`.
    pub fn required_for_order(&self, p: usize) -> Vec<&Scalar> {
        let cutoff = match p {
            0 => 0,
            1..=4 => p,
            _ => 6,
        };
        self.entries().iter().take(cutoff).map(|(_, r)| *r).collect()
    }

    pub fn euclidean_norm(&self) -> f64 {
        num_traits::Float::sqrt(
            self.entries()
                .iter()
                .map(|(_, r)| {
                    let x = r.to_f64();
                    x * x
                })
                .sum::<f64>(),
        )
    }
}

fn weighted_sum(weights: impl Iterator<Item = Scalar>, values: &[Scalar]) -> Scalar {
    weights.zip(values).fold(Scalar::zero(), |acc, (w, v)| acc + w * v)
}

pub fn residuals_order5(dc: &DerivedCoefficients) -> ResidualVector {
    let twelfth = Scalar::exact(1, 12);
    let quarter = Scalar::exact(1, 4);
    let sum = |v: &[Scalar]| v.iter().fold(Scalar::zero(), |acc, x| acc + x);

    let r_sum_b = sum(&dc.b) - Scalar::exact(1, 1);
    let r_sum_y = sum(&dc.y) - Scalar::exact(1, 2);
    let r_bhat_y = weighted_sum(dc.bhat.iter().cloned(), &dc.y) - Scalar::exact(1, 3);
    let r_bhat2 =
        weighted_sum(dc.bhat.iter().zip(&dc.b).map(|(h, b)| h * h + &twelfth * b * b), &dc.y) - Scalar::exact(1, 4);
    let r_bhat3 = weighted_sum(dc.bhat.iter().zip(&dc.b).map(|(h, b)| h * h * h + &quarter * h * b * b), &dc.y)
        - Scalar::exact(1, 5);
    let r_quad =
        weighted_sum(dc.yhat.iter().zip(&dc.y).map(|(h, y)| h * h + &twelfth * y * y), &dc.b) - Scalar::exact(1, 20);
    ResidualVector { r_sum_b, r_sum_y, r_bhat_y, r_bhat2, r_bhat3, r_quad }
}

/// Largest `p ≤ 5` whose residual ladder is within `tol` in absolute value.
pub fn order_achieved(dc: &DerivedCoefficients, tol: &Scalar) -> usize {
    let r = residuals_order5(dc);
    (1..=5).take_while(|&p| r.required_for_order(p).iter().all(|x| x.within(tol))).last().unwrap_or(0)
}

/// `eᵀy = 1/2`, `dᵀy = 1/5`, `yᵀSy = 1/20` with the data taken from `dc`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricSystem {
    pub e: Vec<Scalar>,
    pub d: Vec<Scalar>,
    pub s: crate::linalg::Matrix<Scalar>,
    pub rhs: [Scalar; 3],
}

impl QuadricSystem {
    pub fn from_derived(dc: &DerivedCoefficients) -> Self {
        QuadricSystem {
            e: dc.e.clone(),
            d: dc.d.clone(),
            s: dc.s.clone(),
            rhs: [Scalar::exact(1, 2), Scalar::exact(1, 5), Scalar::exact(1, 20)],
        }
    }

    pub fn residuals(&self, y: &[Scalar]) -> [Scalar; 3] {
        let [r0, r1, r2] = self.rhs.clone();
        [dot(&self.e, y) - r0, dot(&self.d, y) - r1, self.s.bilinear(y, y) - r2]
    }
}

/// `(eᵀy − 1/2, dᵀy − 1/5, yᵀSy − 1/20)`; equals `(r_sum_y, r_bhat3, r_quad)`.
pub fn quadric_residuals(dc: &DerivedCoefficients) -> [Scalar; 3] {
    QuadricSystem::from_derived(dc).residuals(&dc.y)
}
