//! Finite-precision g-adic integers and the sequences that witness
//! non-properness of `μ_p` on `(ℤ, d_g)` when `p ∤ g`.
//!
//! A [`GadicApprox`] is an element of `ℤ/g^Nℤ`, i.e. a g-adic integer known to
//! `N` digits. Special digits are stable under congruence: if
//! `x ≡ y (mod g^N)` then `ε_i(x) = ε_i(y)` for every `i <= N - 2`, and
//! [`approx_digits`] exposes exactly that many digits.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gadic_core::{special_rep, word_length, Base};
use crate::primes::is_prime;
use crate::serde_int;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GadicApprox {
    pub base: Base,
    pub precision: u32,
    /// Least nonnegative residue mod `g^precision`.
    #[serde(with = "serde_int")]
    pub residue: BigInt,
}

impl GadicApprox {
    pub fn modulus(&self) -> BigInt {
        self.base.pow(self.precision)
    }

    /// Image in `ℤ/g^mℤ` for `m <= precision`.
    pub fn reduce(&self, m: u32) -> Result<GadicApprox> {
        if m == 0 || m > self.precision {
            return Err(Error::InvalidArgument(format!(
                "cannot reduce precision {} to {m}",
                self.precision
            )));
        }
        approx_from_int(self.base, m, &self.residue)
    }

    /// Whether one approximation reduces to the other.
    pub fn is_compatible(&self, other: &GadicApprox) -> bool {
        if self.base != other.base {
            return false;
        }
        let m = self.precision.min(other.precision);
        let modulus = self.base.pow(m);
        self.residue.mod_floor(&modulus) == other.residue.mod_floor(&modulus)
    }
}

/// The canonical image of `k` in `ℤ/g^Nℤ`.
pub fn approx_from_int(base: Base, precision: u32, k: &BigInt) -> Result<GadicApprox> {
    if precision == 0 {
        return Err(Error::InsufficientPrecision { precision, required: 1 });
    }
    let residue = k.mod_floor(&base.pow(precision));
    Ok(GadicApprox { base, precision, residue })
}

/// `a⁻¹ mod m` via the extended Euclidean algorithm, least nonnegative.
pub(crate) fn inverse_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// `p⁻¹` in `ℤ/g^Nℤ`, which exists iff `gcd(p, g) = 1`.
pub fn mod_inverse(p: u64, base: Base, precision: u32) -> Result<GadicApprox> {
    if precision == 0 {
        return Err(Error::InsufficientPrecision { precision, required: 1 });
    }
    if p.gcd(&base.get()) != 1 {
        return Err(Error::NotCoprime { p, g: base.get() });
    }
    let modulus = base.pow(precision);
    let residue = inverse_mod(&BigInt::from(p), &modulus).expect("coprime inputs");
    Ok(GadicApprox { base, precision, residue })
}

/// Special digits `ε_0 … ε_{N-2}` shared by every integer in the class of `x`.
pub fn approx_digits(x: &GadicApprox) -> Result<Vec<i64>> {
    if x.precision < 2 {
        return Err(Error::InsufficientPrecision { precision: x.precision, required: 2 });
    }
    let rep = special_rep(x.base, &x.residue);
    Ok((0..(x.precision - 1) as usize).map(|i| rep.digit(i)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessTerm {
    pub i: u32,
    /// `x_i = (g^{(p-1)i} - 1) / p`
    #[serde(with = "serde_int")]
    pub x: BigInt,
    pub length: u64,
    /// `ℓ_g(g^{(p-1)i} - 1)`, the length of the image point `p·x_i`.
    pub image_length: u64,
}

/// Preimages under `μ_p` of the bounded set `{g^{(p-1)i} - 1}` with their
/// word lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessSequence {
    pub base: Base,
    pub prime: u64,
    pub terms: Vec<WitnessTerm>,
}

impl WitnessSequence {
    pub fn lengths(&self) -> Vec<u64> {
        self.terms.iter().map(|t| t.length).collect()
    }

    pub fn max_image_length(&self) -> u64 {
        self.terms.iter().map(|t| t.image_length).max().unwrap_or(0)
    }

    /// Whether lengths strictly increase over the last `tail` terms.
    pub fn strictly_increasing_tail(&self, tail: usize) -> bool {
        let n = self.terms.len();
        if tail > n {
            return false;
        }
        self.terms[n - tail..].windows(2).all(|w| w[0].length < w[1].length)
    }

    /// First index after which lengths never decrease.
    pub fn nondecreasing_from(&self) -> usize {
        let lens = self.lengths();
        let mut from = 0;
        for i in 1..lens.len() {
            if lens[i] < lens[i - 1] {
                from = i;
            }
        }
        from
    }
}

/// Builds `x_i = (g^{(p-1)i} - 1)/p` for `i = 1..=i_max`, checking divisibility
/// exactly.
pub fn divergence_witness(base: Base, p: u64, i_max: u32) -> Result<WitnessSequence> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if base.get().is_multiple_of(p) {
        return Err(Error::NotCoprime { p, g: base.get() });
    }
    if i_max == 0 {
        return Err(Error::InvalidArgument("i_max must be at least 1".into()));
    }
    let pb = BigInt::from(p);
    let step = (p - 1) as u32;
    let mut terms = Vec::with_capacity(i_max as usize);
    for i in 1..=i_max {
        let image: BigInt = base.pow(step * i) - 1;
        let (x, rem) = image.div_rem(&pb);
        if !rem.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "{p} does not divide {base}^{} - 1",
                step * i
            )));
        }
        terms.push(WitnessTerm {
            i,
            length: word_length(base, &x),
            image_length: word_length(base, &image),
            x,
        });
    }
    Ok(WitnessSequence { base, prime: p, terms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthTrend {
    StrictlyIncreasing,
    Nondecreasing,
    Constant,
    Nonincreasing,
    Mixed,
}

impl LengthTrend {
    fn of(lens: &[u64]) -> Self {
        let w = || lens.windows(2);
        if w().all(|p| p[0] == p[1]) {
            LengthTrend::Constant
        } else if w().all(|p| p[0] < p[1]) {
            LengthTrend::StrictlyIncreasing
        } else if w().all(|p| p[0] <= p[1]) {
            LengthTrend::Nondecreasing
        } else if w().all(|p| p[0] >= p[1]) {
            LengthTrend::Nonincreasing
        } else {
            LengthTrend::Mixed
        }
    }
}

/// Findings of [`stabilization_check`]; nothing here is asserted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilizationReport {
    pub base: Base,
    pub precision: u32,
    #[serde(with = "serde_int::vec")]
    pub residues: Vec<BigInt>,
    /// The residue is constant from this index on, over a tail of at least
    /// two terms.
    pub stable_from: Option<usize>,
    #[serde(with = "serde_int::option")]
    pub stable_residue: Option<BigInt>,
    /// `ε_0 … ε_{N-2}` of the stable class.
    pub stable_digits: Option<Vec<i64>>,
    /// Smallest-magnitude integer in the stable class.
    #[serde(with = "serde_int::option")]
    pub nearest_integer: Option<BigInt>,
    /// Whether that integer's special digits all fall inside the stable prefix,
    /// i.e. the prefix is consistent with an integer limit at this precision.
    pub finite_support_within_precision: Option<bool>,
    /// Whether that integer has magnitude at most `max |x_n|`.
    pub within_magnitude_bound: Option<bool>,
    #[serde(with = "serde_int")]
    pub magnitude_bound: BigInt,
    pub lengths: Vec<u64>,
    pub trend: LengthTrend,
}

/// Reports whether `xs` is Cauchy in `ℤ_g` at precision `N`, the stable digit
/// prefix, and how the word lengths behave along the sequence.
pub fn stabilization_check(xs: &[BigInt], base: Base, precision: u32) -> Result<StabilizationReport> {
    if xs.is_empty() {
        return Err(Error::Empty("sequence"));
    }
    if precision < 2 {
        return Err(Error::InsufficientPrecision { precision, required: 2 });
    }
    let modulus = base.pow(precision);
    let residues: Vec<BigInt> = xs.iter().map(|x| x.mod_floor(&modulus)).collect();
    let last = residues.last().unwrap();
    let mut from = residues.len() - 1;
    while from > 0 && residues[from - 1] == *last {
        from -= 1;
    }
    let stable = residues.len() - from >= 2;
    let magnitude_bound = xs.iter().map(|x| x.abs()).max().unwrap();
    let lengths: Vec<u64> = xs.iter().map(|x| word_length(base, x)).collect();
    let trend = LengthTrend::of(&lengths);

    let mut report = StabilizationReport {
        base,
        precision,
        residues: residues.clone(),
        stable_from: None,
        stable_residue: None,
        stable_digits: None,
        nearest_integer: None,
        finite_support_within_precision: None,
        within_magnitude_bound: None,
        magnitude_bound,
        lengths,
        trend,
    };
    if stable {
        let class = GadicApprox { base, precision, residue: last.clone() };
        let digits = approx_digits(&class)?;
        let shifted = last - &modulus;
        let nearest = if shifted.abs() < *last { shifted } else { last.clone() };
        let rep = special_rep(base, &nearest);
        let finite = rep.digits().len() <= digits.len()
            && rep.digits().iter().zip(&digits).all(|(a, b)| a == b);
        report.within_magnitude_bound = Some(nearest.abs() <= report.magnitude_bound);
        report.stable_from = Some(from);
        report.stable_residue = Some(last.clone());
        report.stable_digits = Some(digits);
        report.nearest_integer = Some(nearest);
        report.finite_support_within_precision = Some(finite);
    }
    Ok(report)
}
