//! Scheme coefficient tables and the aggregate quantities derived from them.
//!
//! A scheme composes `J` exponentials; exponential `j` uses the generator
//! `Σ_k a[j][k] A(t + c[k] τ)`. Everything the order conditions and the
//! positivity certificate need is a function of the row sums `b` and the
//! node moments `y` alone.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use num_traits::{One, Zero};

use crate::linalg::{is_positive_definite, Matrix};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeError {
    Empty,
    RaggedCoefficients { row: usize, expected: usize, found: usize },
    NodeCount { expected: usize, found: usize },
    WeightLengths { b: usize, y: usize },
}

impl fmt::Display for SchemeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeError::Empty => write!(f, "a scheme needs at least one exponential and one node"),
            SchemeError::RaggedCoefficients { row, expected, found } => {
                write!(f, "coefficient row {row} has {found} entries, expected {expected}")
            }
            SchemeError::NodeCount { expected, found } => {
                write!(f, "expected {expected} nodes, found {found}")
            }
            SchemeError::WeightLengths { b, y } => {
                write!(f, "weight vectors differ in length: b has {b}, y has {y}")
            }
        }
    }
}

impl core::error::Error for SchemeError {}

/// Raw coefficient table `a` (J×K), nodes `c` (K) and metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    name: String,
    a: Matrix<Scalar>,
    c: Vec<Scalar>,
    claimed_order: Option<u32>,
}

impl Scheme {
    pub fn new(
        name: impl Into<String>,
        a: Vec<Vec<Scalar>>,
        c: Vec<Scalar>,
        claimed_order: Option<u32>,
    ) -> Result<Self, SchemeError> {
        if a.is_empty() || c.is_empty() {
            return Err(SchemeError::Empty);
        }
        let k = c.len();
        if let Some((row, r)) = a.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(SchemeError::RaggedCoefficients { row, expected: k, found: r.len() });
        }
        let a = Matrix::from_rows(a).expect("rows checked above");
        Ok(Scheme { name: name.into(), a, c, claimed_order })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of exponentials.
    pub fn stages(&self) -> usize {
        self.a.rows()
    }

    /// Number of nodes.
    pub fn nodes(&self) -> usize {
        self.c.len()
    }

    pub fn coefficients(&self) -> &Matrix<Scalar> {
        &self.a
    }

    pub fn node_positions(&self) -> &[Scalar] {
        &self.c
    }

    pub fn claimed_order(&self) -> Option<u32> {
        self.claimed_order
    }

    pub fn with_claimed_order(mut self, order: Option<u32>) -> Self {
        self.claimed_order = order;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.a.as_slice().iter().chain(&self.c).all(Scalar::is_exact)
    }

    /// `b_j = Σ_k a[j][k]`.
    pub fn weights(&self) -> Vec<Scalar> {
        (0..self.stages()).map(|j| self.a.row(j).iter().fold(Scalar::zero(), |acc, x| acc + x)).collect()
    }

    /// `y_j = Σ_k a[j][k] c_k`.
    pub fn node_moments(&self) -> Vec<Scalar> {
        (0..self.stages())
            .map(|j| self.a.row(j).iter().zip(&self.c).fold(Scalar::zero(), |acc, (x, c)| acc + x * c))
            .collect()
    }

    pub fn coefficients_f64(&self) -> Matrix<f64> {
        self.a.map(Scalar::to_f64)
    }

    pub fn nodes_f64(&self) -> Vec<f64> {
        self.c.iter().map(Scalar::to_f64).collect()
    }
}

/// The vectors and matrices built from `(b, y)` that the order conditions
/// and the certificate are phrased in.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedCoefficients {
    pub b: Vec<Scalar>,
    pub y: Vec<Scalar>,
    pub bhat: Vec<Scalar>,
    pub yhat: Vec<Scalar>,
    pub sigma: Scalar,
    pub e: Vec<Scalar>,
    /// `d_j = bhat_j³ + bhat_j b_j² / 4`.
    pub d: Vec<Scalar>,
    /// Lower triangular, `1/2` on the diagonal and `1` below.
    pub l: Matrix<Scalar>,
    pub dmat: Matrix<Scalar>,
    /// `Lᵀ D L + D / 12`.
    pub s: Matrix<Scalar>,
}

/// Midpoint prefix sums: `Σ_{k≤j} v_k − v_j / 2`.
pub fn centered_prefix_sums(v: &[Scalar]) -> Vec<Scalar> {
    let half = Scalar::exact(1, 2);
    let mut running = Scalar::zero();
    v.iter()
        .map(|x| {
            running = &running + x;
            &running - &(x * &half)
        })
        .collect()
}

impl DerivedCoefficients {
    pub fn from_weights(b: Vec<Scalar>, y: Vec<Scalar>) -> Result<Self, SchemeError> {
        if b.len() != y.len() {
            return Err(SchemeError::WeightLengths { b: b.len(), y: y.len() });
        }
        if b.is_empty() {
            return Err(SchemeError::Empty);
        }
        let n = b.len();
        let bhat = centered_prefix_sums(&b);
        let yhat = centered_prefix_sums(&y);
        let sigma = b.iter().fold(Scalar::zero(), |acc, x| acc + x);
        let e = vec![Scalar::one(); n];
        let quarter = Scalar::exact(1, 4);
        let d = bhat.iter().zip(&b).map(|(h, w)| h * h * h + &quarter * h * w * w).collect();
        let l = Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            core::cmp::Ordering::Equal => Scalar::exact(1, 2),
            core::cmp::Ordering::Greater => Scalar::one(),
            core::cmp::Ordering::Less => Scalar::zero(),
        });
        let dmat = Matrix::diagonal(&b);
        let s = l.transpose().matmul(&dmat).matmul(&l).add(&dmat.scale(&Scalar::exact(1, 12)));
        Ok(DerivedCoefficients { b, y, bhat, yhat, sigma, e, d, l, dmat, s })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn is_exact(&self) -> bool {
        self.b.iter().chain(&self.y).all(Scalar::is_exact)
    }

    /// Exact copies of `b` and `y`, when every entry is rational.
    pub fn exact_weights(&self) -> Option<(Vec<Rational>, Vec<Rational>)> {
        let b = self.b.iter().map(|x| x.as_exact().cloned()).collect::<Option<Vec<_>>>()?;
        let y = self.y.iter().map(|x| x.as_exact().cloned()).collect::<Option<Vec<_>>>()?;
        Some((b, y))
    }
}

pub fn derive_coefficients(scheme: &Scheme) -> DerivedCoefficients {
    DerivedCoefficients::from_weights(scheme.weights(), scheme.node_moments())
        .expect("a well-formed scheme has matching, non-empty weight vectors")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// Every `b_j > 0`.
    pub positivity_ok: bool,
    pub exactness: bool,
    pub notes: Vec<String>,
}

pub fn validate_scheme(scheme: &Scheme) -> ValidationReport {
    let dc = derive_coefficients(scheme);
    let mut notes = Vec::new();
    for j in 0..scheme.stages() {
        for (k, x) in scheme.coefficients().row(j).iter().enumerate() {
            if !x.is_exact() {
                notes.push(format!("a[{j}][{k}] = {x} is a float; b_{} and y_{} demoted to float", j + 1, j + 1));
            }
        }
    }
    for (k, x) in scheme.node_positions().iter().enumerate() {
        if !x.is_exact() {
            notes.push(format!("c[{k}] = {x} is a float; every y_j demoted to float"));
        }
    }
    let negative: Vec<usize> = dc.b.iter().enumerate().filter(|(_, w)| !w.is_positive()).map(|(j, _)| j + 1).collect();
    for j in &negative {
        notes.push(format!("b_{j} = {} is not positive", dc.b[j - 1]));
    }
    if negative.is_empty() && !is_positive_definite(&dc.s) {
        notes.push("S failed the positive-definiteness check".to_string());
    }
    ValidationReport { positivity_ok: negative.is_empty(), exactness: scheme.is_exact(), notes }
}

/// `√3/6` to 60 significant digits.
pub const SQRT3_OVER_6: &str = "0.288675134594812882254574390250978727823800875635063438009301";

fn lit(s: &str) -> Scalar {
    s.parse().expect("bundled literal")
}

pub fn midpoint() -> Scheme {
    Scheme::new("midpoint", vec![vec![lit("1")]], vec![lit("1/2")], Some(2)).expect("bundled")
}

pub fn left_endpoint() -> Scheme {
    Scheme::new("left-endpoint", vec![vec![lit("1")]], vec![lit("0")], Some(1)).expect("bundled")
}

/// Two exponentials on the two Gauss–Legendre nodes.
pub fn cf4() -> Scheme {
    let r = lit(SQRT3_OVER_6);
    let quarter = Scalar::exact(1, 4);
    let half = Scalar::exact(1, 2);
    let plus = &quarter + &r;
    let minus = &quarter - &r;
    Scheme::new(
        "cf4",
        vec![vec![plus.clone(), minus.clone()], vec![minus, plus]],
        vec![&half - &r, &half + &r],
        Some(4),
    )
    .expect("bundled")
}

/// Synthetic two-exponential scheme with `b = (-1/2, 3/2)`, `y = (-1/8, 5/8)`
/// on nodes `c = (0, 1)`. Not a published method.
pub fn negative_weight_demo() -> Scheme {
    Scheme::new(
        "negative-weight-demo",
        vec![vec![lit("-3/8"), lit("-1/8")], vec![lit("7/8"), lit("5/8")]],
        vec![lit("0"), lit("1")],
        Some(2),
    )
    .expect("bundled")
}

pub fn bundled() -> Vec<Scheme> {
    vec![midpoint(), left_endpoint(), cf4(), negative_weight_demo()]
}

pub fn bundled_by_name(name: &str) -> Option<Scheme> {
    bundled().into_iter().find(|s| s.name() == name)
}
