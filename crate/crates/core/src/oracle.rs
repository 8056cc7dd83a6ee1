//! Brute-force word lengths in `Cay(ℤ, S)` for finite truncations of a
//! symmetric generating set, used as ground truth for the digit formula.
//!
//! The search is an iterative deepening over the number of terms. Terms are
//! chosen in nonincreasing magnitude, never mixing `+s` and `-s`, and a branch
//! is cut as soon as the remaining terms cannot cover the residual. Every
//! returned length carries a witness decomposition that is re-checked before
//! it leaves this module.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gadic_core::{digit_count, word_length, Base};
use crate::primes::{is_prime, smooth_numbers};
use crate::serde_int;
use crate::window::Window;

/// Positive generators; the symmetric closure `s ∈ S ⇒ -s ∈ S` is implied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSet {
    Geometric { g: Base },
    Explicit { generators: Vec<u64> },
    QStar { primes: Vec<u64>, bound: u64 },
}

impl GeneratorSet {
    pub fn geometric(g: Base) -> Self {
        GeneratorSet::Geometric { g }
    }

    pub fn explicit(mut generators: Vec<u64>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Empty("generator list"));
        }
        if generators.contains(&0) {
            return Err(Error::InvalidArgument("generators must be positive".into()));
        }
        generators.sort_unstable();
        let before = generators.len();
        generators.dedup();
        if generators.len() != before {
            return Err(Error::InvalidArgument("generators must be distinct".into()));
        }
        Ok(GeneratorSet::Explicit { generators })
    }

    /// Products of powers of `primes` up to `bound`.
    pub fn q_star(mut primes: Vec<u64>, bound: u64) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::Empty("prime set"));
        }
        if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::NotPrime(p));
        }
        primes.sort_unstable();
        primes.dedup();
        Ok(GeneratorSet::QStar { primes, bound: bound.max(1) })
    }

    /// Positive generators of magnitude at most `cap`, ascending.
    pub fn truncate(&self, cap: u128) -> Vec<u128> {
        match self {
            GeneratorSet::Geometric { g } => {
                let g = g.get() as u128;
                let mut out = Vec::new();
                let mut s = 1u128;
                while s <= cap {
                    out.push(s);
                    match s.checked_mul(g) {
                        Some(next) => s = next,
                        None => break,
                    }
                }
                out
            }
            GeneratorSet::Explicit { generators } => generators
                .iter()
                .map(|&s| s as u128)
                .filter(|&s| s <= cap)
                .collect(),
            GeneratorSet::QStar { primes, bound } => {
                let limit = (*bound as u128).min(cap).min(u64::MAX as u128) as u64;
                smooth_numbers(primes, limit).into_iter().map(u128::from).collect()
            }
        }
    }

    /// `g^(D+2)` with `D = ⌈log_g(|k|+1)⌉` for geometric sets. The special
    /// representation of `k` only uses indices up to `D + 1`, so this cap admits
    /// an optimal word. Other sets default to `4·|k|`, at least 1.
    pub fn default_cap(&self, k: &BigInt) -> BigInt {
        match self {
            GeneratorSet::Geometric { g } => g.pow(digit_count(*g, k) + 2),
            _ => (k.abs() * 4u32).max(BigInt::from(1)),
        }
    }
}

/// Outcome of a bounded search. `length == None` means INCONCLUSIVE: no word
/// with at most `max_terms` terms was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    #[serde(with = "serde_int")]
    pub target: BigInt,
    pub length: Option<u64>,
    /// Signed generators summing to the target; empty when inconclusive.
    #[serde(with = "serde_int::vec")]
    pub witness: Vec<BigInt>,
    #[serde(with = "serde_int::vec")]
    pub generators_used: Vec<BigInt>,
    #[serde(with = "serde_int")]
    pub search_bound: BigInt,
    pub max_terms: u64,
    pub warning: Option<String>,
}

impl OracleResult {
    pub fn is_inconclusive(&self) -> bool {
        self.length.is_none()
    }

    /// Re-evaluates the witness.
    pub fn witness_is_valid(&self) -> bool {
        match self.length {
            None => self.witness.is_empty(),
            Some(n) => {
                let sum: BigInt = self.witness.iter().sum();
                self.witness.len() as u64 == n
                    && sum == self.target
                    && self.witness.iter().all(|s| self.generators_used.contains(&s.abs()))
            }
        }
    }
}

struct Search<'a> {
    gens: &'a [i128],
    path: Vec<i128>,
    // (residual, terms left, top generator index, sign of last term at top)
    dead: HashSet<(i128, u32, usize, i8)>,
}

impl Search<'_> {
    fn run(&mut self, r: i128, left: u32, top: usize, top_sign: i8) -> bool {
        if r == 0 {
            return true;
        }
        if left == 0 {
            return false;
        }
        let key = (r, left, top, top_sign);
        if self.dead.contains(&key) {
            return false;
        }
        let reach = |s: i128| s.checked_mul(left as i128).unwrap_or(i128::MAX);
        let want: i8 = if r > 0 { 1 } else { -1 };
        for j in (0..=top).rev() {
            let s = self.gens[j];
            if reach(s) < r.abs() {
                break;
            }
            for sign in [want, -want] {
                if j == top && top_sign != 0 && sign != top_sign {
                    continue;
                }
                let step = if sign > 0 { s } else { -s };
                self.path.push(step);
                if self.run(r - step, left - 1, j, sign) {
                    return true;
                }
                self.path.pop();
            }
        }
        self.dead.insert(key);
        false
    }
}

/// Least number of signed generators of magnitude at most `gen_cap` summing to
/// `k`, searching up to `max_terms` terms.
pub fn oracle_length(
    set: &GeneratorSet,
    k: &BigInt,
    max_terms: u64,
    gen_cap: Option<&BigInt>,
) -> Result<OracleResult> {
    let cap = gen_cap.cloned().unwrap_or_else(|| set.default_cap(k));
    if cap < BigInt::from(1) {
        return Err(Error::InvalidArgument("generator cap must be positive".into()));
    }
    let warning = (cap < k.abs())
        .then(|| format!("generator cap {cap} is below |k| = {}", k.abs()));
    let cap_u = cap.to_u128().ok_or(Error::Overflow)?;
    let positive = set.truncate(cap_u);
    if positive.is_empty() {
        return Err(Error::Empty("generators below the cap"));
    }
    let gens: Vec<i128> = positive.iter().map(|&s| s as i128).collect();
    let target = k.to_i128().ok_or(Error::Overflow)?;
    let largest = *gens.last().unwrap();
    largest
        .checked_mul(max_terms.max(1) as i128)
        .and_then(|x| x.checked_add(target.abs()))
        .ok_or(Error::Overflow)?;

    let mut search = Search { gens: &gens, path: Vec::new(), dead: HashSet::new() };
    let mut length = None;
    for depth in 0..=max_terms {
        search.path.clear();
        if search.run(target, depth as u32, gens.len() - 1, 0) {
            length = Some(depth);
            break;
        }
    }
    let witness = if length.is_some() {
        search.path.iter().map(|&s| BigInt::from(s)).collect()
    } else {
        Vec::new()
    };
    let result = OracleResult {
        target: k.clone(),
        length: length.map(|_| witness.len() as u64),
        witness,
        generators_used: positive.iter().map(|&s| BigInt::from(s)).collect(),
        search_bound: cap,
        max_terms,
        warning,
    };
    debug_assert!(result.witness_is_valid());
    if !result.witness_is_valid() {
        return Err(Error::InvalidArgument(format!("oracle produced a bad witness for {k}")));
    }
    Ok(result)
}

/// A disagreement between the digit formula and the search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub k: i64,
    pub formula: u64,
    pub oracle: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub base: Base,
    pub window: Window,
    pub checked: u64,
    pub matches: u64,
    pub mismatches: Vec<Mismatch>,
    /// Targets the search could not settle; never counted as matches.
    pub inconclusive: Vec<i64>,
    #[serde(with = "serde_int")]
    pub gen_cap: BigInt,
}

impl ValidationReport {
    pub fn all_match(&self) -> bool {
        self.mismatches.is_empty() && self.inconclusive.is_empty() && self.matches == self.checked
    }
}

/// Compares [`word_length`] against [`oracle_length`] for every `k` in `window`.
///
/// The term budget for each `k` is the digit sum of its ordinary base-`g`
/// expansion, which is itself a word in `S_g` and hence an upper bound.
pub fn validate_formula(g: Base, window: Window) -> Result<ValidationReport> {
    let far = BigInt::from(window.lo.unsigned_abs().max(window.hi.unsigned_abs()));
    let set = GeneratorSet::geometric(g);
    let cap = set.default_cap(&far);
    let outcomes: Vec<Result<(i64, u64, Option<u64>)>> = window
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            let kb = BigInt::from(k);
            let budget = standard_digit_sum(g, k.unsigned_abs());
            let res = oracle_length(&set, &kb, budget, Some(&cap))?;
            Ok((k, word_length(g, &kb), res.length))
        })
        .collect();
    let mut report = ValidationReport {
        base: g,
        window,
        checked: 0,
        matches: 0,
        mismatches: Vec::new(),
        inconclusive: Vec::new(),
        gen_cap: cap,
    };
    for outcome in outcomes {
        let (k, formula, oracle) = outcome?;
        report.checked += 1;
        match oracle {
            None => report.inconclusive.push(k),
            Some(o) if o == formula => report.matches += 1,
            Some(o) => report.mismatches.push(Mismatch { k, formula, oracle: o }),
        }
    }
    Ok(report)
}

/// Digit sum of the ordinary base-`g` expansion of `n`, an upper bound for `ℓ_g(n)`.
pub fn standard_digit_sum(g: Base, mut n: u64) -> u64 {
    let g = g.get();
    let mut sum = 0;
    while n > 0 {
        sum += n % g;
        n /= g;
    }
    sum
}

/// Counts, for every value, the digit vectors with indices `0..=max_index`
/// that satisfy the special-representation rules. Vectors are padded with
/// zeros, so each finite representation is counted once.
pub fn enumerate_special_vectors(g: Base, max_index: u32) -> HashMap<i128, u32> {
    let max = g.max_digit();
    let half_rule = g.is_even();
    let gi = g.get() as i128;
    let len = max_index as usize + 1;
    let mut counts = HashMap::new();
    let mut digits = vec![0i64; len];

    fn walk(
        i: usize,
        digits: &mut [i64],
        value: i128,
        place: i128,
        ctx: (i64, bool, i128),
        counts: &mut HashMap<i128, u32>,
    ) {
        let (max, half_rule, g) = ctx;
        if i == digits.len() {
            *counts.entry(value).or_insert(0) += 1;
            return;
        }
        for d in -max..=max {
            if half_rule && i > 0 {
                let prev = digits[i - 1];
                if prev.abs() == max && (d.abs() == max || prev * d < 0) {
                    continue;
                }
            }
            digits[i] = d;
            walk(i + 1, digits, value + d as i128 * place, place * g, ctx, counts);
        }
        digits[i] = 0;
    }

    walk(0, &mut digits, 0, 1, (max, half_rule, gi), &mut counts);
    counts
}
