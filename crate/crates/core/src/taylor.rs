//! Word-coefficient calculus for the composed step on `u' = (A0 + t A1) u`.
//!
//! Expanding `e^{τ b_J A0 + τ² y_J A1} ⋯ e^{τ b_1 A0 + τ² y_1 A1}` in powers of
//! `τ` gives a sum over non-commutative words `A_{k1} ⋯ A_{km}`; letter `0`
//! carries one power of `τ` and letter `1` carries two. The exact flow has the
//! same shape. Equating coefficients of the words in [`Word::SUBSET`]
//! reproduces the six order conditions independently of
//! [`crate::conditions`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_traits::{One, Zero};

use crate::conditions::ResidualVector;
use crate::scalar::{int, rat, Rational, Scalar};
use crate::scheme::{centered_prefix_sums, SchemeError};

/// A word over `{0, 1}`. Letter `0` stands for `A0`, letter `1` for `A1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Word(Vec<u8>);

impl Word {
    /// The words whose coefficients determine the order conditions.
    pub const SUBSET: [&'static str; 8] = ["", "0", "1", "01", "11", "001", "011", "0001"];

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|k| + m`: number of letters plus number of `1` letters.
    pub fn weight(&self) -> usize {
        self.0.len() + self.0.iter().filter(|&&k| k == 1).count()
    }

    pub fn subset() -> Vec<Word> {
        Self::SUBSET.iter().map(|s| s.parse().expect("static word")).collect()
    }

    /// Every word of weight at most `max_weight`, in canonical order.
    pub fn all_up_to(max_weight: usize) -> Vec<Word> {
        let mut out = alloc::vec![Word::empty()];
        let mut frontier = alloc::vec![Word::empty()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for w in &frontier {
                for letter in [0u8, 1] {
                    let mut letters = w.0.clone();
                    letters.push(letter);
                    let child = Word(letters);
                    if child.weight() <= max_weight {
                        next.push(child);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out.sort();
        out
    }

    fn split_at(&self, i: usize) -> (Word, Word) {
        (Word(self.0[..i].to_vec()), Word(self.0[i..].to_vec()))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight().cmp(&other.weight()).then(self.0.len().cmp(&other.0.len())).then(self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in &self.0 {
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseWordError(pub String);

impl fmt::Display for ParseWordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "word {:?} must consist of the letters 0 and 1", self.0)
    }
}

impl FromStr for Word {
    type Err = ParseWordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(ParseWordError(s.into())),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Word)
    }
}

/// Coefficients `c_w` of the composed step for one `(b, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WordCoefficientTable {
    pub stages: usize,
    pub entries: BTreeMap<Word, Scalar>,
}

impl WordCoefficientTable {
    pub fn get(&self, word: &str) -> Option<&Scalar> {
        self.entries.get(&word.parse().ok()?)
    }

    fn at(&self, word: &str) -> Scalar {
        self.get(word).cloned().unwrap_or_else(|| panic!("word {word:?} missing from table"))
    }
}

/// Coefficients `s_w` of the exact flow's Taylor expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactFlowTable {
    pub entries: BTreeMap<Word, Rational>,
}

impl ExactFlowTable {
    pub fn get(&self, word: &str) -> Option<&Rational> {
        self.entries.get(&word.parse().ok()?)
    }
}

fn check_lengths(b: &[Scalar], y: &[Scalar]) -> Result<(), SchemeError> {
    if b.len() != y.len() {
        return Err(SchemeError::WeightLengths { b: b.len(), y: y.len() });
    }
    if b.is_empty() {
        return Err(SchemeError::Empty);
    }
    Ok(())
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * int(k))
}

/// Coefficient of `word` in `exp(b A0 + y A1)`: a product of one letter
/// weight per position divided by `m!`.
fn single_exponential(b: &Scalar, y: &Scalar, word: &Word) -> Scalar {
    let product = word.letters().iter().fold(Scalar::one(), |acc, &k| acc * if k == 0 { b } else { y });
    product / Scalar::Exact(factorial(word.len()))
}

/// Builds `c^{(J)}_w` for every word of weight `≤ max_weight` by composing one
/// exponential at a time: the newest factor contributes the prefix of each
/// word, the previous product the suffix.
pub fn word_coefficients_up_to(
    b: &[Scalar],
    y: &[Scalar],
    max_weight: usize,
) -> Result<WordCoefficientTable, SchemeError> {
    check_lengths(b, y)?;
    let words = Word::all_up_to(max_weight);
    let mut table: BTreeMap<Word, Scalar> =
        words.iter().map(|w| (w.clone(), single_exponential(&b[0], &y[0], w))).collect();
    for (bj, yj) in b.iter().zip(y).skip(1) {
        let previous = table;
        table = words
            .iter()
            .map(|w| {
                let c = (0..=w.len()).fold(Scalar::zero(), |acc, i| {
                    let (prefix, suffix) = w.split_at(i);
                    acc + single_exponential(bj, yj, &prefix) * &previous[&suffix]
                });
                (w.clone(), c)
            })
            .collect();
    }
    Ok(WordCoefficientTable { stages: b.len(), entries: table })
}

/// The recursive table over all words of weight at most five.
pub fn word_coefficients_recursive(b: &[Scalar], y: &[Scalar]) -> Result<WordCoefficientTable, SchemeError> {
    word_coefficients_up_to(b, y, 5)
}

/// The subset table from the closed-form sums.
pub fn word_coefficients_closed(b: &[Scalar], y: &[Scalar]) -> Result<WordCoefficientTable, SchemeError> {
    check_lengths(b, y)?;
    let half = Scalar::exact(1, 2);
    let sixth = Scalar::exact(1, 6);
    let twelfth = Scalar::exact(1, 12);
    let quarter = Scalar::exact(1, 4);
    let bhat = centered_prefix_sums(b);
    let yhat = centered_prefix_sums(y);
    let sum = |it: &mut dyn Iterator<Item = Scalar>| it.fold(Scalar::zero(), |acc, x| acc + x);

    let c0 = sum(&mut b.iter().cloned());
    let c1 = sum(&mut y.iter().cloned());
    let bhat_y = sum(&mut bhat.iter().zip(y).map(|(h, y)| h * y));
    let bhat2_y = sum(&mut bhat.iter().zip(b).zip(y).map(|((h, b), y)| (h * h + &twelfth * b * b) * y));
    let bhat3_y = sum(&mut bhat.iter().zip(b).zip(y).map(|((h, b), y)| (h * h * h + &quarter * h * b * b) * y));
    let yhat2_b = sum(&mut yhat.iter().zip(y).zip(b).map(|((h, y), b)| (h * h + &twelfth * y * y) * b));

    let c01 = &c0 * &c1 - bhat_y;
    let c11 = &half * &c1 * &c1;
    let c001 = &c0 * &c01 - &half * &c0 * &c0 * &c1 + &half * bhat2_y;
    let c011 = &half * yhat2_b;
    let c0001 = &c0 * &c001 - &half * &c0 * &c0 * &c01 + &sixth * &c0 * &c0 * &c0 * &c1 - &sixth * bhat3_y;

    let values = [Scalar::one(), c0, c1, c01, c11, c001, c011, c0001];
    let entries = Word::subset().into_iter().zip(values).collect();
    Ok(WordCoefficientTable { stages: b.len(), entries })
}

/// `s_w` for every word of weight `≤ max_weight`, from the Taylor recursion
/// `(n+1) P_{n+1} = A0 P_n + A1 P_{n-1}` of the exact solution operator.
pub fn exact_flow_up_to(max_weight: usize) -> ExactFlowTable {
    let mut levels: Vec<BTreeMap<Word, Rational>> = Vec::new();
    levels.push([(Word::empty(), Rational::one())].into_iter().collect());
    for n in 0..max_weight {
        let mut next: BTreeMap<Word, Rational> = BTreeMap::new();
        let scale = rat(1, n as i64 + 1);
        for (letter, source) in [(0u8, Some(n)), (1u8, n.checked_sub(1))] {
            let Some(source) = source else { continue };
            for (w, c) in &levels[source] {
                let mut letters = alloc::vec![letter];
                letters.extend_from_slice(w.letters());
                *next.entry(Word(letters)).or_insert_with(Rational::zero) += c * &scale;
            }
        }
        levels.push(next);
    }
    let entries = Word::all_up_to(max_weight)
        .into_iter()
        .map(|w| {
            let value = levels[w.weight()].get(&w).cloned().unwrap_or_else(Rational::zero);
            (w, value)
        })
        .collect();
    ExactFlowTable { entries }
}

/// `s_w` on the eight words of [`Word::SUBSET`].
pub fn exact_flow_coefficients() -> ExactFlowTable {
    let full = exact_flow_up_to(5);
    let entries = Word::subset().into_iter().map(|w| {
        let v = full.entries[&w].clone();
        (w, v)
    });
    ExactFlowTable { entries: entries.collect() }
}

/// Order-condition residuals recovered from the coefficient differences
/// `c_w − s_w` of the recursive table, by inverting the closed-form relations.
/// No residual is assumed to vanish.
pub fn oracle_residuals(b: &[Scalar], y: &[Scalar]) -> Result<ResidualVector, SchemeError> {
    let table = word_coefficients_recursive(b, y)?;
    let flow = exact_flow_coefficients();
    let coefficient = |w: &str| {
        let s = Scalar::Exact(flow.get(w).expect("subset word").clone());
        let delta = table.at(w) - &s;
        s + delta
    };
    let half = Scalar::exact(1, 2);
    let sixth = Scalar::exact(1, 6);
    let (c0, c1, c01, c001, c011, c0001) = (
        coefficient("0"),
        coefficient("1"),
        coefficient("01"),
        coefficient("001"),
        coefficient("011"),
        coefficient("0001"),
    );

    let bhat_y = &c0 * &c1 - &c01;
    let bhat2_y = Scalar::exact(2, 1) * (&c001 - &c0 * &c01 + &half * &c0 * &c0 * &c1);
    let bhat3_y =
        Scalar::exact(6, 1) * (&c0 * &c001 - &half * &c0 * &c0 * &c01 + &sixth * &c0 * &c0 * &c0 * &c1 - &c0001);
    let yhat2_b = Scalar::exact(2, 1) * c011;

    Ok(ResidualVector {
        r_sum_b: c0 - Scalar::exact(1, 1),
        r_sum_y: c1 - Scalar::exact(1, 2),
        r_bhat_y: bhat_y - Scalar::exact(1, 3),
        r_bhat2: bhat2_y - Scalar::exact(1, 4),
        r_bhat3: bhat3_y - Scalar::exact(1, 5),
        r_quad: yhat2_b - Scalar::exact(1, 20),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::exact(p, d)
    }

    #[test]
    fn word_weights_and_enumeration() {
        assert_eq!("0001".parse::<Word>().unwrap().weight(), 5);
        assert_eq!("011".parse::<Word>().unwrap().weight(), 5);
        assert_eq!(Word::empty().weight(), 0);
        assert!("012".parse::<Word>().is_err());
        let all = Word::all_up_to(5);
        assert!(all.iter().all(|w| w.weight() <= 5));
        // Compositions of n into parts 1 and 2 number Fib(n+1): 1+1+2+3+5+8.
        assert_eq!(all.len(), 20);
        for w in Word::subset() {
            assert!(all.contains(&w));
        }
    }

    #[test]
    fn single_exponential_base_values() {
        let t = word_coefficients_recursive(&[q(1, 1)], &[q(1, 2)]).unwrap();
        assert_eq!(t.get("0001"), Some(&q(1, 48)));
        assert_eq!(t.get("11"), Some(&q(1, 8)));
        assert_eq!(t.get("011"), Some(&q(1, 24)));
        let closed = word_coefficients_closed(&[q(1, 1)], &[q(1, 2)]).unwrap();
        assert_eq!(closed.get("011"), Some(&q(1, 24)));
        // b²y/6, so the bhat² sum enters c_001 with a plus sign.
        assert_eq!(closed.get("001"), Some(&q(1, 12)));
        assert_eq!(closed.get("0001"), Some(&q(1, 48)));
    }

    #[test]
    fn two_exponential_unrolling() {
        let b = [q(1, 1), q(1, 1)];
        let y = [q(1, 1), q(1, 1)];
        let rec = word_coefficients_recursive(&b, &y).unwrap();
        let closed = word_coefficients_closed(&b, &y).unwrap();
        assert_eq!(rec.get("01"), Some(&q(2, 1)));
        assert_eq!(closed.get("01"), Some(&q(2, 1)));
    }

    #[test]
    fn printed_exact_flow_values() {
        let s = exact_flow_coefficients();
        let want = [
            ("", rat(1, 1)),
            ("0", rat(1, 1)),
            ("1", rat(1, 2)),
            ("01", rat(1, 6)),
            ("11", rat(1, 8)),
            ("001", rat(1, 24)),
            ("011", rat(1, 40)),
            ("0001", rat(1, 120)),
        ];
        assert_eq!(s.entries.len(), 8);
        for (w, v) in want {
            assert_eq!(s.get(w), Some(&v), "s_{w}");
        }
    }

    #[test]
    fn fifth_derivative_of_exact_flow() {
        // u^(5)(0) = (3A0A1² + 4A1A0A1 + 8A1²A0 + A0³A1 + 2A0²A1A0 + 3A0A1A0² + 4A1A0³ + A0⁵)u0
        let s = exact_flow_up_to(5);
        let want =
            [("011", 3), ("101", 4), ("110", 8), ("0001", 1), ("0010", 2), ("0100", 3), ("1000", 4), ("00000", 1)];
        for (w, k) in want {
            assert_eq!(s.get(w), Some(&rat(k, 120)), "s_{w}");
        }
        // u^(4)(0) = (3A1² + A0²A1 + 2A0A1A0 + 3A1A0² + A0⁴)u0. With commuting
        // letters the A0²A1 terms must total 6, as in d⁴/dt⁴ exp(t a0 + t² a1/2).
        for (w, k) in [("11", 3), ("001", 1), ("010", 2), ("100", 3), ("0000", 1)] {
            assert_eq!(s.get(w), Some(&rat(k, 24)), "s_{w}");
        }
    }

    #[test]
    fn oracle_matches_printed_residuals() {
        let mid = oracle_residuals(&[q(1, 1)], &[q(1, 2)]).unwrap();
        assert_eq!(mid.r_bhat_y, q(-1, 12));
        let cf4 = oracle_residuals(&[q(1, 2), q(1, 2)], &[q(1, 12), q(5, 12)]).unwrap();
        assert_eq!(cf4.r_bhat3, q(-1, 480));
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(word_coefficients_recursive(&[q(1, 1)], &[]).is_err());
        assert!(word_coefficients_closed(&[], &[]).is_err());
        assert!(oracle_residuals(&[q(1, 1), q(1, 1)], &[q(1, 1)]).is_err());
    }

    #[test]
    fn matches_listed_recursion_for_three_exponentials() {
        // Hand-unrolled recursion formulas for the subset words.
        let b = vec![q(1, 3), q(2, 5), q(4, 15)];
        let y = vec![q(1, 7), q(-2, 9), q(3, 11)];
        let h = q(1, 2);
        let s6 = q(1, 6);
        let s24 = q(1, 24);
        let mut c = [
            q(1, 1),
            b[0].clone(),
            y[0].clone(),
            &h * &b[0] * &y[0],
            &h * &y[0] * &y[0],
            &s6 * &b[0] * &b[0] * &y[0],
            &s6 * &b[0] * &y[0] * &y[0],
            &s24 * &b[0] * &b[0] * &b[0] * &y[0],
        ];
        for j in 1..3 {
            let (bj, yj) = (&b[j], &y[j]);
            let [e, c0, c1, c01, c11, c001, c011, c0001] = c.clone();
            c = [
                e.clone(),
                &c0 + bj * &e,
                &c1 + yj * &e,
                &c01 + bj * &c1 + &h * bj * yj * &e,
                &c11 + yj * &c1 + &h * yj * yj * &e,
                &c001 + bj * &c01 + &h * bj * bj * &c1 + &s6 * bj * bj * yj * &e,
                &c011 + bj * &c11 + &h * bj * yj * &c1 + &s6 * bj * yj * yj * &e,
                &c0001 + bj * &c001 + &h * bj * bj * &c01 + &s6 * bj * bj * bj * &c1 + &s24 * bj * bj * bj * yj * &e,
            ];
        }
        let table = word_coefficients_recursive(&b, &y).unwrap();
        let closed = word_coefficients_closed(&b, &y).unwrap();
        for (w, v) in Word::SUBSET.iter().zip(c) {
            assert_eq!(table.get(w), Some(&v), "c_{w}");
            assert_eq!(closed.get(w), Some(&v), "closed c_{w}");
        }
    }
}
