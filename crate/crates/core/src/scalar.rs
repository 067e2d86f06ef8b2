//! Exact-or-float scalars.
//!
//! Coefficient data arrives either as exact rationals (`"p/q"`, `"p"`) or as
//! decimal literals. Exact values stay exact under arithmetic; any operation
//! touching a float demotes the result to `f64`.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Shorthand for an exact `p/q`. Panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Renders a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

/// The rational a finite float represents exactly; `None` for NaN or infinity.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseScalarError {
    Empty,
    ZeroDenominator(String),
    Malformed(String),
    NonFinite(String),
}

impl fmt::Display for ParseScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseScalarError::Empty => write!(f, "empty scalar literal"),
            ParseScalarError::ZeroDenominator(s) => write!(f, "zero denominator in {s:?}"),
            ParseScalarError::Malformed(s) => write!(f, "malformed scalar literal {s:?}"),
            ParseScalarError::NonFinite(s) => write!(f, "non-finite scalar literal {s:?}"),
        }
    }
}

impl core::error::Error for ParseScalarError {}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub fn exact(p: i64, q: i64) -> Self {
        Scalar::Exact(rat(p, q))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => *x,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(x) => Scalar::Float(x.abs()),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_positive(),
            Scalar::Float(x) => *x > 0.0,
        }
    }

    /// `|self| <= tol`, compared exactly when both sides are exact.
    pub fn within(&self, tol: &Scalar) -> bool {
        matches!(self.abs().partial_cmp(tol), Some(Ordering::Less | Ordering::Equal))
    }

    fn binary(
        &self,
        rhs: &Scalar,
        exact: impl FnOnce(&Rational, &Rational) -> Rational,
        float: impl FnOnce(f64, f64) -> f64,
    ) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(exact(a, b)),
            _ => Scalar::Float(float(self.to_f64(), rhs.to_f64())),
        }
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Float(x)
    }
}

impl From<i64> for Scalar {
    fn from(x: i64) -> Self {
        Scalar::Exact(int(x))
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Scalar {
    /// Exact values print as `p/q`; floats always carry a `.` or exponent so
    /// that the text parses back as a float.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => f.write_str(&rational_to_string(r)),
            Scalar::Float(x) => {
                let s = alloc::format!("{x:?}");
                if s.contains(['.', 'e', 'E']) {
                    f.write_str(&s)
                } else {
                    write!(f, "{s}.0")
                }
            }
        }
    }
}

fn is_integer_literal(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|c| c.is_ascii_digit())
}

fn is_decimal_literal(s: &str) -> bool {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let mut parts = mantissa.splitn(2, '.');
    let whole = parts.next().unwrap_or("");
    let frac = parts.next().unwrap_or("");
    let mantissa_ok = (!whole.is_empty() || !frac.is_empty())
        && whole.bytes().all(|c| c.is_ascii_digit())
        && frac.bytes().all(|c| c.is_ascii_digit());
    let exponent_ok = match exponent {
        None => true,
        Some(e) => {
            let e = e.strip_prefix(['-', '+']).unwrap_or(e);
            !e.is_empty() && e.bytes().all(|c| c.is_ascii_digit())
        }
    };
    mantissa_ok && exponent_ok
}

impl FromStr for Scalar {
    type Err = ParseScalarError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let s = raw.trim();
        if s.is_empty() {
            return Err(ParseScalarError::Empty);
        }
        if let Some((p, q)) = s.split_once('/') {
            if !is_integer_literal(p) || !q.bytes().all(|c| c.is_ascii_digit()) || q.is_empty() {
                return Err(ParseScalarError::Malformed(raw.to_string()));
            }
            let numer: BigInt = p.parse().map_err(|_| ParseScalarError::Malformed(raw.to_string()))?;
            let denom: BigInt = q.parse().map_err(|_| ParseScalarError::Malformed(raw.to_string()))?;
            if denom.is_zero() {
                return Err(ParseScalarError::ZeroDenominator(raw.to_string()));
            }
            return Ok(Scalar::Exact(Rational::new(numer, denom)));
        }
        if is_integer_literal(s) {
            let n: BigInt = s.parse().map_err(|_| ParseScalarError::Malformed(raw.to_string()))?;
            return Ok(Scalar::Exact(Rational::from_integer(n)));
        }
        if is_decimal_literal(s) {
            let x: f64 = s.parse().map_err(|_| ParseScalarError::Malformed(raw.to_string()))?;
            if !x.is_finite() {
                return Err(ParseScalarError::NonFinite(raw.to_string()));
            }
            return Ok(Scalar::Float(x));
        }
        Err(ParseScalarError::Malformed(raw.to_string()))
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.binary(rhs, |a, b| a $op b, |a, b| a $op b)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);
scalar_binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::Exact(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::Exact(Rational::one())
    }
}
