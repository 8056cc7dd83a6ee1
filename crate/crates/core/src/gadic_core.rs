//! Special g-adic representations and the word metric `d_g` on the integers.
//!
//! For a base `g >= 2` the generating set is `S_g = {±g^n : n >= 0}`. Every
//! integer has exactly one *special* signed-digit expansion
//!
//! ```text
//! k = Σ ε_i g^i,   |ε_i| <= ⌊g/2⌋,
//! |ε_i| = g/2  ⇒  |ε_{i+1}| != g/2  and  ε_i ε_{i+1} >= 0
//! ```
//!
//! and the word length of `k` in `Cay(ℤ, S_g)` is `Σ |ε_i|`. The metric is
//! `d_g(a, b) = ℓ_g(a - b)`.
//!
//! The Euclidean case `g = 1` is not a [`Base`]: there the metric is `|a - b|`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::window::WindowMap;

/// A base `g >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Base(u64);

impl Base {
    pub fn new(g: u64) -> Result<Self> {
        if g < 2 {
            return Err(Error::InvalidBase(g));
        }
        Ok(Base(g))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    pub fn is_even(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// `⌊g/2⌋`, the largest admissible digit magnitude.
    pub fn max_digit(self) -> i64 {
        (self.0 / 2) as i64
    }

    /// `g^n` as an exact integer.
    pub fn pow(self, n: u32) -> BigInt {
        num_traits::pow(self.to_bigint(), n as usize)
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The canonical special representation; index `i` holds the coefficient of `g^i`.
///
/// The empty digit vector represents zero, so structural equality is value
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SpecialRep {
    base: Base,
    digits: Vec<i64>,
}

impl SpecialRep {
    /// Validates `digits` and drops trailing zeros.
    pub fn from_digits(base: Base, mut digits: Vec<i64>) -> Result<Self> {
        while digits.last() == Some(&0) {
            digits.pop();
        }
        validate_digits(base, &digits)?;
        Ok(SpecialRep { base, digits })
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn digits(&self) -> &[i64] {
        &self.digits
    }

    /// Digit at index `i`; zero beyond the stored range.
    pub fn digit(&self, i: usize) -> i64 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    pub fn word_length(&self) -> u64 {
        self.digits.iter().map(|d| d.unsigned_abs()).sum()
    }

    pub fn value(&self) -> BigInt {
        evaluate(self.base, &self.digits)
    }

    pub fn negate(&self) -> SpecialRep {
        SpecialRep { base: self.base, digits: self.digits.iter().map(|d| -d).collect() }
    }

    pub fn into_digits(self) -> Vec<i64> {
        self.digits
    }
}

/// Checks the digit bound and the adjacency rule for magnitude-`g/2` digits.
pub fn validate_digits(base: Base, digits: &[i64]) -> Result<()> {
    let max = base.max_digit();
    for (i, &d) in digits.iter().enumerate() {
        if d.abs() > max {
            return Err(Error::InvalidDigits(format!(
                "|ε_{i}| = {} exceeds ⌊g/2⌋ = {max}",
                d.abs()
            )));
        }
    }
    if base.is_even() {
        let half = max;
        for i in 0..digits.len() {
            let d = digits[i];
            if d.abs() != half {
                continue;
            }
            let next = digits.get(i + 1).copied().unwrap_or(0);
            if next.abs() == half {
                return Err(Error::InvalidDigits(format!(
                    "consecutive digits ε_{i} = {d} and ε_{} = {next} both have magnitude g/2",
                    i + 1
                )));
            }
            if d * next < 0 {
                return Err(Error::InvalidDigits(format!(
                    "ε_{i} = {d} has magnitude g/2 but ε_{} = {next} has the opposite sign",
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

fn evaluate(base: Base, digits: &[i64]) -> BigInt {
    let g = base.to_bigint();
    digits.iter().rev().fold(BigInt::zero(), |acc, &d| acc * &g + d)
}

/// `Σ ε_i g^i` for a digit vector, rejecting vectors that are not special.
pub fn rep_to_int(base: Base, digits: &[i64]) -> Result<BigInt> {
    validate_digits(base, digits)?;
    Ok(evaluate(base, digits))
}

/// Balanced digit of a residue `c ∈ [0, g)`, with the tie at `g/2` broken by
/// `next`, the residue mod `g` of `(r - g/2) / g`.
///
/// Picking `+g/2` is valid iff `next < g/2`: then the following digit is
/// nonnegative and below `g/2`. Otherwise `-g/2` leaves a following residue in
/// `(g/2, g] mod g`, whose digit is nonpositive and of magnitude below `g/2`.
#[inline]
fn pick_digit(g: i128, c: i128, next: impl FnOnce() -> i128) -> i128 {
    let half = g / 2;
    if c < half || (c == half && g % 2 == 1) {
        c
    } else if c > half {
        c - g
    } else if next() < half {
        half
    } else {
        -half
    }
}

fn special_digits_small(g: i128, mut r: i128) -> Vec<i64> {
    let mut digits = Vec::new();
    while r != 0 {
        let c = r.rem_euclid(g);
        let d = pick_digit(g, c, || (r - g / 2).div_euclid(g).rem_euclid(g));
        digits.push(d as i64);
        r = (r - d) / g;
    }
    digits
}

fn special_digits_big(base: Base, k: &BigInt) -> Vec<i64> {
    let g = base.to_bigint();
    let gi = base.get() as i128;
    let half = BigInt::from(base.get() / 2);
    let mut digits = Vec::new();
    let mut r = k.clone();
    while !r.is_zero() {
        if let Some(small) = r.to_i64() {
            digits.extend(special_digits_small(gi, small as i128));
            break;
        }
        let c = r.mod_floor(&g).to_i128().expect("residue below g");
        let d = pick_digit(gi, c, || {
            (&r - &half).div_floor(&g).mod_floor(&g).to_i128().expect("residue below g")
        });
        digits.push(d as i64);
        r = (r - d) / &g;
    }
    digits
}

/// The unique special representation of `k`.
pub fn special_rep(base: Base, k: &BigInt) -> SpecialRep {
    let digits = match k.to_i64() {
        Some(small) => special_digits_small(base.get() as i128, small as i128),
        None => special_digits_big(base, k),
    };
    debug_assert!(validate_digits(base, &digits).is_ok());
    SpecialRep { base, digits }
}

/// `ℓ_g(k)`: the graph distance from 0 to `k` in `Cay(ℤ, S_g)`.
pub fn word_length(base: Base, k: &BigInt) -> u64 {
    special_rep(base, k).word_length()
}

/// [`word_length`] for machine integers.
pub fn word_length_i64(base: Base, k: i64) -> u64 {
    special_digits_small(base.get() as i128, k as i128)
        .iter()
        .map(|d| d.unsigned_abs())
        .sum()
}

/// `d_g(k, k2) = ℓ_g(k - k2)`.
pub fn distance(base: Base, k: &BigInt, k2: &BigInt) -> u64 {
    word_length(base, &(k - k2))
}

/// `⌊k/g⌋`, rounding toward negative infinity.
pub fn floor_div_image(base: Base, k: &BigInt) -> BigInt {
    k.div_floor(&base.to_bigint())
}

/// Worst pair found by [`quasimorphism_defect`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectReport {
    pub defect: u64,
    pub worst_pair: (i64, i64),
    pub pairs_checked: u64,
}

/// Largest `d_g(f(a+b), f(a) + f(b))` over all `a, b` with `a`, `b` and `a + b`
/// in the window of `f`; the least valid quasimorphism constant there.
pub fn quasimorphism_defect(f: &WindowMap, target: Base) -> Result<DefectReport> {
    let w = f.window();
    let mut best: Option<DefectReport> = None;
    let mut checked = 0u64;
    for (a, fa) in f.iter() {
        // a + b ∈ [lo, hi]  ⇔  b ∈ [lo - a, hi - a]
        let b_lo = w.lo.max(w.lo - a);
        let b_hi = w.hi.min(w.hi - a);
        for b in b_lo..=b_hi {
            let fb = f.get(b).expect("b inside window");
            let fab = f.get(a + b).expect("a + b inside window");
            let d = distance(target, fab, &(fa + fb));
            checked += 1;
            if best.as_ref().is_none_or(|r| d > r.defect) {
                best = Some(DefectReport { defect: d, worst_pair: (a, b), pairs_checked: 0 });
            }
        }
    }
    let mut report = best.ok_or(Error::NoAdmissiblePair { lo: w.lo, hi: w.hi })?;
    report.pairs_checked = checked;
    Ok(report)
}

/// Number of base-`g` digits needed to write `|k|`: `⌈log_g(|k| + 1)⌉`.
pub fn digit_count(base: Base, k: &BigInt) -> u32 {
    let g = base.to_bigint();
    let mut n = k.abs();
    let mut count = 0;
    while !n.is_zero() {
        n /= &g;
        count += 1;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::Window;

    fn b(g: u64) -> Base {
        Base::new(g).unwrap()
    }

    fn rep(g: u64, k: i64) -> Vec<i64> {
        special_rep(b(g), &BigInt::from(k)).into_digits()
    }

    #[test]
    fn base_rejects_one() {
        assert_eq!(Base::new(1), Err(Error::InvalidBase(1)));
        assert_eq!(Base::new(0), Err(Error::InvalidBase(0)));
    }

    #[test]
    fn known_representations() {
        assert_eq!(rep(2, 0), Vec::<i64>::new());
        assert_eq!(rep(2, 3), vec![-1, 0, 1]);
        assert_eq!(rep(4, 6), vec![2, 1]);
        assert_eq!(rep(3, 5), vec![-1, -1, 1]);
        assert_eq!(rep(2, 11), vec![-1, 0, -1, 0, 1]);
    }

    #[test]
    fn rep_to_int_examples() {
        assert_eq!(rep_to_int(b(2), &[-1, 0, 1]).unwrap(), BigInt::from(3));
        assert_eq!(rep_to_int(b(5), &[]).unwrap(), BigInt::zero());
        assert!(matches!(rep_to_int(b(2), &[1, 1]), Err(Error::InvalidDigits(_))));
        // 6 = 8 - 2 written as [-2, 2] breaks the adjacency rule
        assert!(rep_to_int(b(4), &[-2, 2]).is_err());
        // opposite signs next to a g/2 digit
        assert!(rep_to_int(b(4), &[2, -1]).is_err());
        assert!(rep_to_int(b(3), &[2]).is_err());
    }

    #[test]
    fn from_digits_trims_zeros() {
        let r = SpecialRep::from_digits(b(2), vec![-1, 0, 1, 0, 0]).unwrap();
        assert_eq!(r.digits(), &[-1, 0, 1]);
        assert_eq!(r, special_rep(b(2), &BigInt::from(3)));
    }

    #[test]
    fn word_length_examples() {
        assert_eq!(word_length(b(2), &BigInt::from(15)), 2);
        assert_eq!(word_length(b(3), &BigInt::from(5)), 3);
        for n in 0..80 {
            assert_eq!(word_length(b(2), &b(2).pow(n)), 1);
            assert_eq!(word_length(b(2), &-b(2).pow(n)), 1);
        }
        assert_eq!(word_length_i64(b(2), 15), 2);
    }

    #[test]
    fn distance_examples() {
        let d = |k: i64, k2: i64| distance(b(2), &BigInt::from(k), &BigInt::from(k2));
        assert_eq!(d(7, 9), 1);
        assert_eq!(d(13, 13), 0);
        assert_eq!(d(0, 21), 3);
    }

    #[test]
    fn floor_division_rounds_down() {
        let f = |g: u64, k: i64| floor_div_image(b(g), &BigInt::from(k));
        assert_eq!(f(2, 7), BigInt::from(3));
        assert_eq!(f(2, -7), BigInt::from(-4));
        assert_eq!(f(3, 10), BigInt::from(3));
    }

    #[test]
    fn big_and_small_paths_agree() {
        let g = b(6);
        let big = g.pow(40) * 7 - 12345;
        let r = special_rep(g, &big);
        assert_eq!(r.value(), big);
        assert!(validate_digits(g, r.digits()).is_ok());
        let r2 = special_rep(g, &(-&big));
        assert_eq!(r2, r.negate());
    }

    #[test]
    fn defect_examples() {
        let w = Window::new(-50, 50).unwrap();
        let id = WindowMap::from_fn(w, BigInt::from);
        assert_eq!(quasimorphism_defect(&id, b(2)).unwrap().defect, 0);
        let half = WindowMap::from_fn(w, |k| BigInt::from(k.div_euclid(2)));
        assert_eq!(quasimorphism_defect(&half, b(2)).unwrap().defect, 1);
        let triple = WindowMap::from_fn(w, |k| BigInt::from(3 * k));
        assert_eq!(quasimorphism_defect(&triple, b(2)).unwrap().defect, 0);
    }

    #[test]
    fn defect_on_singleton_window() {
        // a = b = 0 is the only admissible pair
        let w = Window::new(0, 0).unwrap();
        let m = WindowMap::from_fn(w, |_| BigInt::from(5));
        // d(5, 10) = ℓ(5) = 2
        assert_eq!(quasimorphism_defect(&m, b(2)).unwrap().defect, 2);
        let w = Window::new(3, 4).unwrap();
        let m = WindowMap::from_fn(w, BigInt::from);
        assert_eq!(
            quasimorphism_defect(&m, b(2)),
            Err(Error::NoAdmissiblePair { lo: 3, hi: 4 })
        );
    }

    #[test]
    fn digit_counts() {
        assert_eq!(digit_count(b(2), &BigInt::from(0)), 0);
        assert_eq!(digit_count(b(2), &BigInt::from(8)), 4);
        assert_eq!(digit_count(b(10), &BigInt::from(-999)), 3);
    }
}
