//! Exact certificates that positive weights rule out order five.
//!
//! With `b` fixed, the order-five system in `y` is two hyperplanes
//! (`eᵀy = 1/2`, `dᵀy = 1/5`) and the ellipsoid `yᵀSy = 1/20`. The affine
//! intersection of the hyperplanes meets the ellipsoid exactly when
//! `cᵀΓ⁻¹c ≤ 1/20`, where `Γ` is the Gram matrix of `e, d` under the `S⁻¹`
//! inner product and `c = (1/2, 1/5)`. Every quantity here is computed in
//! exact rational arithmetic.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::linalg::{dot, inverse_exact, is_positive_definite, solve_exact, solve_f64, Matrix};
use crate::scalar::{int, rat, rational_to_string, Rational, Scalar};
use crate::scheme::DerivedCoefficients;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertifyError {
    Empty,
    NonPositiveWeight { index: usize, value: String },
    Inexact,
    TooFewStages { required: usize, found: usize },
    SingularGram,
    NotPositiveDefinite,
    DependentNormals,
    Shape(String),
    Pole,
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::Empty => write!(f, "weight vector is empty"),
            CertifyError::NonPositiveWeight { index, value } => {
                write!(f, "precondition violated: b_{} = {value} is not positive", index + 1)
            }
            CertifyError::Inexact => write!(f, "certification requires exact rational input"),
            CertifyError::TooFewStages { required, found } => {
                write!(f, "needs at least {required} exponentials, got {found}")
            }
            CertifyError::SingularGram => write!(f, "Gram matrix is singular"),
            CertifyError::NotPositiveDefinite => write!(f, "quadric matrix is not positive definite"),
            CertifyError::DependentNormals => write!(f, "hyperplane normals are linearly dependent"),
            CertifyError::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            CertifyError::Pole => write!(f, "point lies on the pole bb·eSe + 4 = 0"),
        }
    }
}

impl core::error::Error for CertifyError {}

fn check_positive(b: &[Rational]) -> Result<(), CertifyError> {
    if b.is_empty() {
        return Err(CertifyError::Empty);
    }
    match b.iter().position(|x| !x.is_positive()) {
        Some(index) => Err(CertifyError::NonPositiveWeight { index, value: rational_to_string(&b[index]) }),
        None => Ok(()),
    }
}

/// Exact copy of a scalar weight vector, or [`CertifyError::Inexact`].
pub fn exact_weights(b: &[Scalar]) -> Result<Vec<Rational>, CertifyError> {
    b.iter().map(|x| x.as_exact().cloned().ok_or(CertifyError::Inexact)).collect()
}

/// `d` and `S` for the given weights, in exact arithmetic.
pub fn quadric_data(b: &[Rational]) -> (Vec<Rational>, Matrix<Rational>) {
    let scalars: Vec<Scalar> = b.iter().cloned().map(Scalar::Exact).collect();
    let zeros = vec![Scalar::zero(); b.len()];
    let dc = DerivedCoefficients::from_weights(scalars, zeros).expect("non-empty weights");
    let exact = |x: &Scalar| x.as_exact().expect("exact input stays exact").clone();
    (dc.d.iter().map(exact).collect(), dc.s.map(exact))
}

/// `e`, `d` and the products `S⁻¹e`, `S⁻¹d`.
struct SolvedQuadric {
    e: Vec<Rational>,
    d: Vec<Rational>,
    s_inv_e: Vec<Rational>,
    s_inv_d: Vec<Rational>,
}

impl SolvedQuadric {
    fn new(b: &[Rational]) -> Result<Self, CertifyError> {
        let (d, s) = quadric_data(b);
        let e = vec![Rational::one(); b.len()];
        let rhs = Matrix::from_fn(b.len(), 2, |i, j| if j == 0 { e[i].clone() } else { d[i].clone() });
        let x = solve_exact(&s, &rhs).ok_or(CertifyError::NotPositiveDefinite)?;
        let col = |j: usize| (0..b.len()).map(|i| x[(i, j)].clone()).collect::<Vec<_>>();
        Ok(SolvedQuadric { s_inv_e: col(0), s_inv_d: col(1), e, d })
    }

    fn ese(&self) -> Rational {
        dot(&self.e, &self.s_inv_e)
    }

    fn esd(&self) -> Rational {
        dot(&self.e, &self.s_inv_d)
    }

    fn dsd(&self) -> Rational {
        dot(&self.d, &self.s_inv_d)
    }

    fn gram(&self) -> [[Rational; 2]; 2] {
        let esd = self.esd();
        [[self.ese(), esd.clone()], [esd, self.dsd()]]
    }
}

fn det2(g: &[[Rational; 2]; 2]) -> Rational {
    &g[0][0] * &g[1][1] - &g[0][1] * &g[1][0]
}

/// `cᵀΓ⁻¹c` for a 2×2 Gram matrix.
fn gram_quadratic(g: &[[Rational; 2]; 2], c: &[Rational; 2]) -> Option<Rational> {
    let det = det2(g);
    if det.is_zero() {
        return None;
    }
    let num = &c[0] * &c[0] * &g[1][1] - int(2) * &c[0] * &c[1] * &g[0][1] + &c[1] * &c[1] * &g[0][0];
    Some(num / det)
}

/// Gram-matrix certificate for `J ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityCertificate {
    pub stages: usize,
    pub b: Vec<Rational>,
    pub gram: [[Rational; 2]; 2],
    /// `cᵀΓ⁻¹c`.
    pub value: Rational,
    pub threshold: Rational,
    /// `value − threshold`.
    pub margin: Rational,
    /// True iff the margin is strictly positive.
    pub infeasible: bool,
}

/// Direct argument for a single exponential, where `e` and `d` are parallel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleExponentialCertificate {
    pub b: Rational,
    pub d: Rational,
    pub infeasible: bool,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Gram(FeasibilityCertificate),
    SingleExponential(SingleExponentialCertificate),
}

impl Certificate {
    pub fn infeasible(&self) -> bool {
        match self {
            Certificate::Gram(c) => c.infeasible,
            Certificate::SingleExponential(c) => c.infeasible,
        }
    }

    pub fn margin(&self) -> Option<&Rational> {
        match self {
            Certificate::Gram(c) => Some(&c.margin),
            Certificate::SingleExponential(_) => None,
        }
    }
}

/// `c = (1/2, 1/5)` and the level `1/20` of the order-five system.
pub fn order_five_targets() -> ([Rational; 2], Rational) {
    ([rat(1, 2), rat(1, 5)], rat(1, 20))
}

/// Decides whether any real `y` solves the order-five system for these
/// positive weights. The sum of `b` is not assumed to be one.
pub fn certify_no_order5_y(b: &[Rational]) -> Result<Certificate, CertifyError> {
    check_positive(b)?;
    let (c, threshold) = order_five_targets();
    if b.len() == 1 {
        let (d, s) = quadric_data(b);
        let d1 = d[0].clone();
        // y = 1/2 is forced by the first hyperplane.
        let linear_ok = &d1 * &c[0] == c[1];
        let quadric_ok = &s[(0, 0)] * &c[0] * &c[0] == threshold;
        let reason = if !linear_ok {
            format!("linear system in one unknown inconsistent: d_1 = {} != 2/5", rational_to_string(&d1))
        } else if !quadric_ok {
            format!("y = 1/2 misses the quadric: S y^2 = {}", rational_to_string(&(&s[(0, 0)] / int(4))))
        } else {
            String::from("y = 1/2 solves all three equations")
        };
        return Ok(Certificate::SingleExponential(SingleExponentialCertificate {
            b: b[0].clone(),
            d: d1,
            infeasible: !(linear_ok && quadric_ok),
            reason,
        }));
    }
    let solved = SolvedQuadric::new(b)?;
    let gram = solved.gram();
    let value = gram_quadratic(&gram, &c).ok_or(CertifyError::SingularGram)?;
    let margin = &value - &threshold;
    Ok(Certificate::Gram(FeasibilityCertificate {
        stages: b.len(),
        b: b.to_vec(),
        gram,
        infeasible: margin.is_positive(),
        value,
        threshold,
        margin,
    }))
}

/// Hyperplanes `aᵢᵀx = γᵢ` against the ellipsoid `xᵀSx = δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionQuery<T> {
    pub normals: Vec<Vec<T>>,
    pub offsets: Vec<T>,
    pub quadric: Matrix<T>,
    pub level: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionOutcome<T> {
    pub intersects: bool,
    /// Minimum of `xᵀSx` over the affine intersection, `cᵀΓ⁻¹c`.
    pub minimal_value: T,
}

/// Linear solves used by the intersection test, exact or floating.
pub trait GramSolve: Sized + crate::linalg::Field + PartialOrd {
    fn solve(a: &Matrix<Self>, b: &Matrix<Self>) -> Option<Matrix<Self>>;
}

impl GramSolve for Rational {
    fn solve(a: &Matrix<Self>, b: &Matrix<Self>) -> Option<Matrix<Self>> {
        solve_exact(a, b)
    }
}

impl GramSolve for f64 {
    fn solve(a: &Matrix<Self>, b: &Matrix<Self>) -> Option<Matrix<Self>> {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for j in 0..b.cols() {
            let col: Vec<f64> = (0..b.rows()).map(|i| b[(i, j)]).collect();
            let x = solve_f64(a, &col)?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Some(out)
    }
}

pub fn ellipsoid_hyperplane_intersect<T: GramSolve>(
    q: &IntersectionQuery<T>,
) -> Result<IntersectionOutcome<T>, CertifyError> {
    let n = q.quadric.rows();
    let m = q.normals.len();
    if !q.quadric.is_square() {
        return Err(CertifyError::Shape(String::from("quadric must be square")));
    }
    if m == 0 || m > n || q.offsets.len() != m || q.normals.iter().any(|a| a.len() != n) {
        return Err(CertifyError::Shape(format!("{m} normals, {} offsets, dimension {n}", q.offsets.len())));
    }
    if !q.quadric.is_symmetric() || !is_positive_definite(&q.quadric) {
        return Err(CertifyError::NotPositiveDefinite);
    }
    let normals = Matrix::from_fn(n, m, |i, j| q.normals[j][i].clone());
    let s_inv_a = T::solve(&q.quadric, &normals).ok_or(CertifyError::NotPositiveDefinite)?;
    let gram = normals.transpose().matmul(&s_inv_a);
    let beta = T::solve(&gram, &Matrix::column(&q.offsets)).ok_or(CertifyError::DependentNormals)?;
    let beta: Vec<T> = (0..m).map(|i| beta[(i, 0)].clone()).collect();
    let minimal_value = dot(&q.offsets, &beta);
    Ok(IntersectionOutcome { intersects: minimal_value <= q.level, minimal_value })
}

/// `(σ³e − d)ᵀ S⁻¹ (σ³e − d)` against `(9/5) σ⁵`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityReport {
    pub b: Vec<Rational>,
    pub sigma: Rational,
    pub lhs: Rational,
    pub bound: Rational,
    /// `bound − lhs`.
    pub margin: Rational,
    /// `lhs < bound`, strictly.
    pub holds: bool,
}

fn pow(x: &Rational, k: u32) -> Rational {
    (0..k).fold(Rational::one(), |acc, _| acc * x)
}

fn key_lhs(solved: &SolvedQuadric, sigma: &Rational) -> Rational {
    let s3 = pow(sigma, 3);
    pow(&s3, 2) * solved.ese() - int(2) * &s3 * solved.esd() + solved.dsd()
}

pub fn check_key_inequality(b: &[Rational]) -> Result<InequalityReport, CertifyError> {
    check_positive(b)?;
    let solved = SolvedQuadric::new(b)?;
    let sigma: Rational = b.iter().sum();
    let lhs = key_lhs(&solved, &sigma);
    let bound = rat(9, 5) * pow(&sigma, 5);
    let margin = &bound - &lhs;
    Ok(InequalityReport { b: b.to_vec(), holds: margin.is_positive(), sigma, lhs, bound, margin })
}

/// A point for the inductive-step identity: `σ̃`, `b_{J+1}`, and free values
/// standing for `eᵀS⁻¹e`, `eᵀS⁻¹d`, `dᵀS⁻¹d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityPoint {
    pub sigma_next: Rational,
    pub b_next: Rational,
    pub ese: Rational,
    pub esd: Rational,
    pub dsd: Rational,
}

/// The quadratic form after one more exponential, written directly from the
/// block inverse (`expr3`), with `d_{J+1}` expressed through `σ̃` and `b_{J+1}`.
fn expr3(p: &IdentityPoint) -> Result<Rational, CertifyError> {
    let (s1, bb) = (&p.sigma_next, &p.b_next);
    let denom = bb * &p.ese + int(4);
    if denom.is_zero() {
        return Err(CertifyError::Pole);
    }
    let s1_3 = pow(s1, 3);
    let dd = &s1_3 - rat(3, 2) * pow(s1, 2) * bb + s1 * pow(bb, 2) - rat(1, 4) * pow(bb, 3);
    // (s1³ − dd)/bb, continued to bb = 0.
    let lead = if bb.is_zero() { rat(3, 2) * pow(s1, 2) } else { (&s1_3 - &dd) / bb };
    let x = &p.ese * &s1_3 - &p.esd;
    let inner = -(&x * &x) - int(12) * &lead * &x + int(12) * &lead * &lead * (bb * &p.ese + int(1));
    Ok(pow(&s1_3, 2) * &p.ese - int(2) * &s1_3 * &p.esd + &p.dsd + bb * inner / denom)
}

/// The regrouped form (`expr4`) with `σ = σ̃ − b_{J+1}`.
fn expr4_parts(p: &IdentityPoint) -> Result<(Rational, Rational, Rational), CertifyError> {
    let (s1, bb) = (&p.sigma_next, &p.b_next);
    let denom = bb * &p.ese + int(4);
    if denom.is_zero() {
        return Err(CertifyError::Pole);
    }
    let s = s1 - bb;
    let s3 = pow(&s, 3);
    let previous = pow(&s3, 2) * &p.ese - int(2) * &s3 * &p.esd + &p.dsd;
    let growth = bb / int(4)
        * (int(7) * pow(bb, 4) - int(36) * pow(bb, 3) * s1 + int(72) * pow(bb, 2) * pow(s1, 2)
            - int(72) * bb * pow(s1, 3)
            + int(36) * pow(s1, 4));
    let w = &s3 * &p.ese - &p.esd - rat(1, 2) * (int(5) * pow(bb, 2) - int(12) * bb * s1 + int(6) * pow(s1, 2));
    let correction = bb * &w * &w / denom;
    Ok((previous, growth, correction))
}

/// `expr3 − expr4` at an exact point; zero wherever defined.
pub fn inductive_step_identity(p: &IdentityPoint) -> Result<Rational, CertifyError> {
    let (previous, growth, correction) = expr4_parts(p)?;
    Ok(expr3(p)? - (previous + growth - correction))
}

/// `S̃` for one more exponential of weight `b_next`.
pub fn extend_quadric(s: &Matrix<Rational>, b_next: &Rational) -> Matrix<Rational> {
    let n = s.rows();
    Matrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => &s[(i, j)] + b_next,
        (true, false) | (false, true) => b_next / int(2),
        (false, false) => b_next / int(3),
    })
}

/// `S̃ · (closed-form S̃⁻¹) − I`; exactly zero when the block-inverse and
/// Sherman–Morrison expressions are right.
pub fn block_inverse_check(s: &Matrix<Rational>, b_next: &Rational) -> Result<Matrix<Rational>, CertifyError> {
    if !b_next.is_positive() {
        return Err(CertifyError::NonPositiveWeight { index: s.rows(), value: rational_to_string(b_next) });
    }
    if !s.is_symmetric() || !is_positive_definite(s) {
        return Err(CertifyError::NotPositiveDefinite);
    }
    let n = s.rows();
    let s_inv = inverse_exact(s).ok_or(CertifyError::NotPositiveDefinite)?;
    let e = vec![Rational::one(); n];
    let s_inv_e = s_inv.matvec(&e);
    let ese = dot(&e, &s_inv_e);
    let denom = int(4) + b_next * &ese;
    let off = |i: usize| -int(6) / &denom * &s_inv_e[i];
    let closed = Matrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => &s_inv[(i, j)] - b_next / &denom * &s_inv_e[i] * &s_inv_e[j],
        (true, false) => off(i),
        (false, true) => off(j),
        (false, false) => int(12) / b_next * (int(1) + b_next * &ese) / &denom,
    });
    Ok(extend_quadric(s, b_next).matmul(&closed).sub(&Matrix::identity(n + 1)))
}

/// The left sides of the two equivalent forms of the infeasibility condition:
/// `(2e−5d)ᵀS⁻¹(2e−5d) − 5 det Γ` and
/// `[((e−d)ᵀS⁻¹(2e−5d))² + (9 − 5(e−d)ᵀS⁻¹(e−d)) det Γ] / (e−d)ᵀS⁻¹(e−d)`.
pub fn cond1_cond2_agreement(b: &[Rational]) -> Result<(Rational, Rational), CertifyError> {
    check_positive(b)?;
    if b.len() < 2 {
        return Err(CertifyError::TooFewStages { required: 2, found: b.len() });
    }
    let solved = SolvedQuadric::new(b)?;
    let (ese, esd, dsd) = (solved.ese(), solved.esd(), solved.dsd());
    let det = det2(&solved.gram());
    // Expand the S⁻¹ forms in terms of eSe, eSd, dSd.
    let a_a = int(4) * &ese - int(20) * &esd + int(25) * &dsd;
    let m_a = int(2) * &ese - int(7) * &esd + int(5) * &dsd;
    let m_m = &ese - int(2) * &esd + &dsd;
    if m_m.is_zero() {
        return Err(CertifyError::SingularGram);
    }
    let lhs1 = a_a - int(5) * &det;
    let lhs2 = (&m_a * &m_a + (int(9) - int(5) * &m_m) * &det) / &m_m;
    Ok((lhs1, lhs2))
}

/// One step of the induction on `J`, computed from actual data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InductiveStep {
    /// Quadratic form for `b` extended by `b_next`, computed directly.
    pub lhs_next: Rational,
    /// Quadratic form for `b`.
    pub lhs_previous: Rational,
    /// `(b/4)(7b⁴ − 36b³σ̃ + 72b²σ̃² − 72bσ̃³ + 36σ̃⁴)`.
    pub growth: Rational,
    /// The dropped non-negative term.
    pub correction: Rational,
    pub sigma_next: Rational,
    pub b_next: Rational,
}

impl InductiveStep {
    /// `(9/5)(σ̃ − b)⁵ + growth = (9/5) σ̃⁵ − b⁵/20`, the bound that
    /// `lhs_previous < (9/5)σ⁵` yields.
    pub fn propagated_bound(&self) -> Rational {
        rat(9, 5) * pow(&self.sigma_next, 5) - rat(1, 20) * pow(&self.b_next, 5)
    }
}

pub fn inductive_step(b: &[Rational], b_next: &Rational) -> Result<InductiveStep, CertifyError> {
    check_positive(b)?;
    check_positive(core::slice::from_ref(b_next))?;
    let solved = SolvedQuadric::new(b)?;
    let sigma: Rational = b.iter().sum();
    let sigma_next = &sigma + b_next;
    let point = IdentityPoint {
        sigma_next: sigma_next.clone(),
        b_next: b_next.clone(),
        ese: solved.ese(),
        esd: solved.esd(),
        dsd: solved.dsd(),
    };
    let (lhs_previous, growth, correction) = expr4_parts(&point)?;
    let mut extended = b.to_vec();
    extended.push(b_next.clone());
    let lhs_next = check_key_inequality(&extended)?.lhs;
    Ok(InductiveStep { lhs_next, lhs_previous, growth, correction, sigma_next, b_next: b_next.clone() })
}
