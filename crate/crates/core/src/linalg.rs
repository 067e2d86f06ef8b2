//! Small dense matrices over any ring, plus exact rational solves.
//!
//! Exact systems are solved by clearing denominators row by row and running
//! fraction-free (Bareiss) elimination on the resulting integer matrix, so
//! intermediate values never leave `BigInt` until back substitution.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

pub trait Ring:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Ring for T where T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T> {}

pub trait Field: Ring + Div<Output = Self> {}

impl<T> Field for T where T: Ring + Div<Output = T> {}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from nested rows. Returns `None` when the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return None;
        }
        Some(Matrix { rows: n, cols: m, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { T::zero() })
    }

    pub fn column(v: &[T]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i].clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self[(i, k)].clone() * rhs[(k, j)].clone())
        })
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn add(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + rhs[(i, j)].clone())
    }

    pub fn sub(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - rhs[(i, j)].clone())
    }

    pub fn scale(&self, s: &T) -> Matrix<T> {
        self.map(|x| x.clone() * s.clone())
    }

    /// `xᵀ M y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        dot(x, &self.matvec(y))
    }

    pub fn is_symmetric(&self) -> bool
    where
        T: PartialEq,
    {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

pub fn dot<T: Ring>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len(), "dot length mismatch");
    x.iter().zip(y).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// Pivots of a symmetric `LDLᵀ` elimination that always pivots on the largest
/// remaining diagonal entry. Elimination stops at the first pivot that is not
/// strictly positive; that pivot is included as the last element.
pub fn symmetric_pivots<T: Field + PartialOrd>(a: &Matrix<T>) -> Vec<T> {
    assert!(a.is_square());
    let mut work = a.clone();
    let mut active: Vec<usize> = (0..a.rows()).collect();
    let mut pivots = Vec::with_capacity(a.rows());
    while !active.is_empty() {
        let (pos, &p) = active
            .iter()
            .enumerate()
            .max_by(|(_, &i), (_, &j)| work[(i, i)].partial_cmp(&work[(j, j)]).unwrap_or(core::cmp::Ordering::Equal))
            .expect("non-empty");
        let pivot = work[(p, p)].clone();
        pivots.push(pivot.clone());
        if !(pivot > T::zero()) {
            break;
        }
        active.remove(pos);
        for &i in &active {
            let factor = work[(i, p)].clone() / pivot.clone();
            for &j in &active {
                let v = work[(i, j)].clone() - factor.clone() * work[(p, j)].clone();
                work[(i, j)] = v;
            }
        }
    }
    pivots
}

pub fn is_positive_definite<T: Field + PartialOrd>(a: &Matrix<T>) -> bool {
    if !a.is_square() {
        return false;
    }
    let pivots = symmetric_pivots(a);
    pivots.len() == a.rows() && pivots.iter().all(|p| *p > T::zero())
}

fn lcm_of_denominators<'a>(entries: impl Iterator<Item = &'a Rational>) -> BigInt {
    entries.fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Fraction-free elimination of `[A | B]` after clearing denominators.
/// Returns the upper-triangular integer system, the row swap count, and the
/// product of the row scale factors, or `None` if `A` is singular.
fn bareiss(a: &Matrix<Rational>, b: &Matrix<Rational>) -> Option<(Matrix<BigInt>, usize, BigInt)> {
    let n = a.rows();
    assert!(a.is_square(), "coefficient matrix must be square");
    assert_eq!(b.rows(), n, "right-hand side row mismatch");
    let width = n + b.cols();
    let mut scale_product = BigInt::one();
    let mut m = Matrix::<BigInt>::zeros(n, width);
    for i in 0..n {
        let scale = lcm_of_denominators(a.row(i).iter().chain(b.row(i)));
        for (j, r) in a.row(i).iter().chain(b.row(i)).enumerate() {
            m[(i, j)] = r.numer() * (&scale / r.denom());
        }
        scale_product *= scale;
    }
    let mut swaps = 0;
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot_row =
            (k..n).filter(|&i| !m[(i, k)].is_zero()).min_by(|&i, &j| m[(i, k)].abs().cmp(&m[(j, k)].abs()))?;
        if pivot_row != k {
            for j in 0..width {
                let tmp = m[(k, j)].clone();
                m[(k, j)] = m[(pivot_row, j)].clone();
                m[(pivot_row, j)] = tmp;
            }
            swaps += 1;
        }
        for i in k + 1..n {
            for j in k + 1..width {
                let num = &m[(k, k)] * &m[(i, j)] - &m[(i, k)] * &m[(k, j)];
                m[(i, j)] = num / &prev;
            }
            m[(i, k)] = BigInt::zero();
        }
        prev = m[(k, k)].clone();
    }
    Some((m, swaps, scale_product))
}

/// Solves `A X = B` exactly. `None` when `A` is singular.
pub fn solve_exact(a: &Matrix<Rational>, b: &Matrix<Rational>) -> Option<Matrix<Rational>> {
    let n = a.rows();
    let (m, _, _) = bareiss(a, b)?;
    let mut x = Matrix::<Rational>::zeros(n, b.cols());
    for col in 0..b.cols() {
        for i in (0..n).rev() {
            let mut acc = Rational::from_integer(m[(i, n + col)].clone());
            for j in i + 1..n {
                acc -= Rational::from_integer(m[(i, j)].clone()) * &x[(j, col)];
            }
            x[(i, col)] = acc / Rational::from_integer(m[(i, i)].clone());
        }
    }
    Some(x)
}

pub fn solve_exact_vec(a: &Matrix<Rational>, b: &[Rational]) -> Option<Vec<Rational>> {
    let x = solve_exact(a, &Matrix::column(b))?;
    Some((0..x.rows()).map(|i| x[(i, 0)].clone()).collect())
}

pub fn inverse_exact(a: &Matrix<Rational>) -> Option<Matrix<Rational>> {
    solve_exact(a, &Matrix::identity(a.rows()))
}

pub fn determinant_exact(a: &Matrix<Rational>) -> Rational {
    let n = a.rows();
    if n == 0 {
        return Rational::one();
    }
    match bareiss(a, &Matrix::zeros(n, 0)) {
        None => Rational::zero(),
        Some((m, swaps, scale)) => {
            let det = Rational::new(m[(n - 1, n - 1)].clone(), scale);
            if swaps % 2 == 1 {
                -det
            } else {
                det
            }
        }
    }
}

/// Gaussian elimination with partial pivoting. `None` if a pivot vanishes.
pub fn solve_f64(a: &Matrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert!(a.is_square() && b.len() == n);
    let mut m = Matrix::from_fn(n, n + 1, |i, j| if j < n { a[(i, j)] } else { b[i] });
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))?;
        if m[(p, k)] == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..=n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..=n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[(i, j)] * x[j]).sum();
        x[i] = (m[(i, n)] - s) / m[(i, i)];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn q(rows: &[&[(i64, i64)]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&(p, d)| rat(p, d)).collect()).collect()).unwrap()
    }

    #[test]
    fn exact_inverse_of_two_by_two() {
        let s = q(&[&[(2, 3), (1, 4)], &[(1, 4), (1, 6)]]);
        let inv = inverse_exact(&s).unwrap();
        // det = 1/9 - 1/16 = 7/144
        let expected = q(&[&[(24, 7), (-36, 7)], &[(-36, 7), (96, 7)]]);
        assert_eq!(inv, expected);
        assert_eq!(determinant_exact(&s), rat(7, 144));
    }

    #[test]
    fn singular_and_pivoting_cases() {
        let singular = q(&[&[(1, 1), (2, 1)], &[(2, 1), (4, 1)]]);
        assert!(inverse_exact(&singular).is_none());
        assert_eq!(determinant_exact(&singular), rat(0, 1));
        let needs_swap = q(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]]);
        assert_eq!(determinant_exact(&needs_swap), rat(-1, 1));
        assert_eq!(inverse_exact(&needs_swap).unwrap(), needs_swap);
    }

    #[test]
    fn pivots_detect_definiteness() {
        let pd = q(&[&[(2, 1), (1, 1)], &[(1, 1), (2, 1)]]);
        assert!(is_positive_definite(&pd));
        let indefinite = q(&[&[(1, 1), (2, 1)], &[(2, 1), (1, 1)]]);
        assert!(!is_positive_definite(&indefinite));
        let semidefinite = q(&[&[(1, 1), (1, 1)], &[(1, 1), (1, 1)]]);
        assert!(!is_positive_definite(&semidefinite));
    }

    #[test]
    fn float_solve_matches() {
        let a = Matrix::from_rows(vec![vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let x = solve_f64(&a, &[4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }
}
