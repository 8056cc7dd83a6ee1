//! Pro-Q residues and the coarse structure `ℰ_Q` on the integers.
//!
//! For a finite prime set `Q`, the moduli `Q*` are the products of powers of
//! primes in `Q` and `ℤ_Q = lim ℤ/mℤ (m ∈ Q*) ≅ ∏_{p∈Q} ℤ_p`. Elements are
//! handled through their residues mod `p^{e_p}`; the tower
//! `m_n = ∏_{q∈Q} q^n` is used as the cofinal sequence of moduli.
//!
//! Only finite `Q` can be represented.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gadic_limits::inverse_mod;
use crate::primes::{factorize, is_prime, smooth_numbers};
use crate::serde_int;
use crate::spectra::{normalize_primes, Evidence, PrimeClassification, Space, SpectrumReport, Verdict};
use crate::window::Window;

/// A finite, nonempty, sorted set of distinct primes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct PrimeSet(Vec<u64>);

impl PrimeSet {
    pub fn new(primes: &[u64]) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::Empty("prime set"));
        }
        if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::NotPrime(p));
        }
        let mut v = primes.to_vec();
        v.sort_unstable();
        v.dedup();
        Ok(PrimeSet(v))
    }

    pub fn primes(&self) -> &[u64] {
        &self.0
    }

    pub fn contains(&self, p: u64) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `m_n = ∏_{q∈Q} q^n`
    pub fn tower_modulus(&self, n: u32) -> BigInt {
        self.0.iter().map(|&q| num_traits::pow(BigInt::from(q), n as usize)).product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QStarModulus {
    pub m: u64,
    pub factorization: Vec<(u64, u32)>,
}

/// All `m <= bound` whose prime factors lie in `Q`, ascending.
pub fn q_star_members(q: &PrimeSet, bound: u64) -> Vec<QStarModulus> {
    smooth_numbers(q.primes(), bound)
        .into_iter()
        .map(|m| QStarModulus { m, factorization: factorize(m) })
        .collect()
}

/// An element of `∏_{p∈Q} ℤ/p^{e_p}ℤ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QadicApprox {
    pub primes: PrimeSet,
    pub exponents: Vec<u32>,
    #[serde(with = "serde_int::vec")]
    pub residues: Vec<BigInt>,
}

impl QadicApprox {
    fn moduli(&self) -> impl Iterator<Item = BigInt> + '_ {
        self.primes
            .primes()
            .iter()
            .zip(&self.exponents)
            .map(|(&p, &e)| num_traits::pow(BigInt::from(p), e as usize))
    }

    /// `∏ p^{e_p}`
    pub fn modulus(&self) -> BigInt {
        self.moduli().product()
    }

    /// Componentwise reduction to smaller exponents.
    pub fn reduce(&self, exponents: &[u32]) -> Result<QadicApprox> {
        if exponents.len() != self.exponents.len()
            || exponents.iter().zip(&self.exponents).any(|(a, b)| *a == 0 || a > b)
        {
            return Err(Error::InvalidArgument(format!(
                "cannot reduce exponents {:?} to {exponents:?}",
                self.exponents
            )));
        }
        let residues = self
            .residues
            .iter()
            .zip(self.primes.primes())
            .zip(exponents)
            .map(|((r, &p), &e)| r.mod_floor(&num_traits::pow(BigInt::from(p), e as usize)))
            .collect();
        Ok(QadicApprox { primes: self.primes.clone(), exponents: exponents.to_vec(), residues })
    }

    /// The residue mod [`Self::modulus`] with these components.
    pub fn to_residue(&self) -> BigInt {
        let total = self.modulus();
        let mut acc = BigInt::zero();
        for (r, m) in self.residues.iter().zip(self.moduli()) {
            let rest = &total / &m;
            let inv = inverse_mod(&rest, &m).expect("prime powers of distinct primes are coprime");
            acc += r * &rest * inv;
        }
        acc.mod_floor(&total)
    }
}

/// The diagonal image of `k`: `r_p = k mod p^{e_p}`.
pub fn qadic_from_int(q: &PrimeSet, exponents: &[u32], k: &BigInt) -> Result<QadicApprox> {
    if exponents.len() != q.len() {
        return Err(Error::SizeMismatch { left: q.len(), right: exponents.len() });
    }
    if exponents.contains(&0) {
        return Err(Error::InvalidArgument("exponents must be at least 1".into()));
    }
    let residues = q
        .primes()
        .iter()
        .zip(exponents)
        .map(|(&p, &e)| k.mod_floor(&num_traits::pow(BigInt::from(p), e as usize)))
        .collect();
    Ok(QadicApprox { primes: q.clone(), exponents: exponents.to_vec(), residues })
}

fn require_outside(q: &PrimeSet, p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if q.contains(p) {
        return Err(Error::PrimeInSet(p));
    }
    Ok(())
}

/// `a_n` for `n = 1..=n_max`: the least nonnegative solution of
/// `p·a ≡ 1 (mod m_n)`. The sequence converges to `p⁻¹ ∈ ℤ_Q`.
pub fn qadic_inverse_sequence(q: &PrimeSet, p: u64, n_max: u32) -> Result<Vec<BigInt>> {
    require_outside(q, p)?;
    let pb = BigInt::from(p);
    Ok((1..=n_max)
        .map(|n| inverse_mod(&pb, &q.tower_modulus(n)).expect("p is a unit mod m_n"))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonproperParams {
    pub primes: PrimeSet,
    pub prime: u64,
    pub n_max: u32,
}

/// Finite-scale signature of the non-compact preimage `μ_p⁻¹(K) = {a_n}` of
/// the compact set `K = {p·a_n} ∪ {1}`. Findings only; nothing is asserted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonproperReport {
    pub parameters: NonproperParams,
    #[serde(with = "serde_int::vec")]
    pub sequence: Vec<BigInt>,
    /// `K ∖ {1}`, i.e. `p·a_n`.
    #[serde(with = "serde_int::vec")]
    pub compact_set: Vec<BigInt>,
    /// `p·a_n ≡ 1 (mod m_j)` for all `j <= n`.
    pub image_converges_to_one: bool,
    /// `a_{n+1} ≡ a_n (mod m_n)` for all `n`.
    pub cauchy: bool,
    /// Last index (1-based) where `a_n` differs from `a_{n-1}`.
    pub last_change: Option<u32>,
    /// No change over the last `⌈n_max/2⌉` terms.
    pub eventually_constant: bool,
    #[serde(with = "serde_int")]
    pub max_abs: BigInt,
    pub max_abs_bits: u64,
    /// Every integer congruent to `p⁻¹` mod `m_{n_max}` has at least this
    /// magnitude, so no integer below it is a candidate limit.
    #[serde(with = "serde_int")]
    pub integer_limit_excluded_below: BigInt,
}

/// Builds `K = {p·a_n} ∪ {1}` and reports how `a_n = μ_p⁻¹(p·a_n)` behaves.
pub fn nonproper_witness(q: &PrimeSet, p: u64, n_max: u32) -> Result<NonproperReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let seq = qadic_inverse_sequence(q, p, n_max)?;
    let pb = BigInt::from(p);
    let moduli: Vec<BigInt> = (1..=n_max).map(|n| q.tower_modulus(n)).collect();
    let compact_set: Vec<BigInt> = seq.iter().map(|a| a * &pb).collect();
    let image_converges_to_one = compact_set.iter().enumerate().all(|(n, k)| {
        moduli[..=n].iter().all(|m| k.mod_floor(m).is_one())
    });
    let cauchy = seq.windows(2).zip(&moduli).all(|(w, m)| (&w[1] - &w[0]).mod_floor(m).is_zero());
    let last_change = (1..seq.len()).rev().find(|&i| seq[i] != seq[i - 1]).map(|i| i as u32 + 1);
    let tail = n_max.div_ceil(2);
    let eventually_constant = match last_change {
        None => true,
        Some(i) => i + tail <= n_max,
    };
    let max_abs = seq.iter().map(|a| a.abs()).max().unwrap();
    let last = seq.last().unwrap();
    let top = moduli.last().unwrap();
    let integer_limit_excluded_below = last.clone().min(top - last);
    Ok(NonproperReport {
        parameters: NonproperParams { primes: q.clone(), prime: p, n_max },
        max_abs_bits: max_abs.bits(),
        max_abs,
        sequence: seq,
        compact_set,
        image_converges_to_one,
        cauchy,
        last_change,
        eventually_constant,
        integer_limit_excluded_below,
    })
}

/// `p^n·m | ⌊x/p⌋ - ⌊y/p⌋`
pub fn floor_div_congruent(p: u64, x: &BigInt, y: &BigInt, n: u32, m: &BigInt) -> bool {
    let pb = BigInt::from(p);
    let modulus = num_traits::pow(pb.clone(), n as usize) * m;
    (x.div_floor(&pb) - y.div_floor(&pb)).mod_floor(&modulus).is_zero()
}

/// Pairs for [`floor_div_continuity_check`]: for every level `n`, every `x` in
/// the window and every nonzero `t` with `|t| <= multiples`, the pair
/// `(x, x + t·p^{n+1}·m)` where `m = ∏_{q∈Q, q≠p} q^{coprime_exponent}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuityParams {
    pub window: Window,
    pub n_max: u32,
    pub coprime_exponent: u32,
    pub multiples: u32,
    /// Finite sets `K` for the covering check.
    pub covering_sets: u32,
    pub covering_set_size: u32,
    pub seed: u64,
}

impl Default for ContinuityParams {
    fn default() -> Self {
        ContinuityParams {
            window: Window { lo: -250, hi: 249 },
            n_max: 4,
            coprime_exponent: 1,
            multiples: 2,
            covering_sets: 50,
            covering_set_size: 12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuityCertificate {
    pub parameters: ContinuityParams,
    pub primes: PrimeSet,
    pub prime: u64,
    #[serde(with = "serde_int")]
    pub coprime_part: BigInt,
    pub pairs_checked: u64,
    pub covering_sets_checked: u64,
    pub covering_points_checked: u64,
    pub violations: u64,
}

/// Checks every element of `⌊(k+K)/p⌋` lies in `⌊k/p⌋ + (⌊K/p⌋ ∪ (⌊K/p⌋ + 1))`.
pub fn covering_inclusion(p: u64, k: i64, set: &[i64]) -> Result<u64> {
    let p = p as i64;
    let base = k.div_euclid(p);
    let shifted: Vec<i64> = set.iter().map(|x| x.div_euclid(p)).collect();
    for &x in set {
        let e = (k + x).div_euclid(p) - base;
        if !shifted.iter().any(|&s| s == e || s + 1 == e) {
            return Err(Error::CoveringViolated { k, element: (k + x).div_euclid(p) });
        }
    }
    Ok(set.len() as u64)
}

/// Verifies the exact floor congruence behind continuity of `⌊-/p⌋` in the
/// pro-Q topology, plus sampled covering inclusions.
pub fn floor_div_continuity_check(
    q: &PrimeSet,
    p: u64,
    params: &ContinuityParams,
) -> Result<ContinuityCertificate> {
    if !q.contains(p) {
        return Err(Error::PrimeNotInSet(p));
    }
    let m: BigInt = q
        .primes()
        .iter()
        .filter(|&&r| r != p)
        .map(|&r| num_traits::pow(BigInt::from(r), params.coprime_exponent as usize))
        .product();
    let pb = BigInt::from(p);
    let mut pairs = 0u64;
    for n in 0..=params.n_max {
        let step = num_traits::pow(pb.clone(), n as usize + 1) * &m;
        for x in params.window.iter() {
            let xb = BigInt::from(x);
            for t in 1..=params.multiples as i64 {
                for t in [t, -t] {
                    let y = &xb + &step * t;
                    pairs += 1;
                    if !floor_div_congruent(p, &xb, &y, n, &m) {
                        return Err(Error::ContinuityViolated {
                            x: xb,
                            y,
                            modulus: num_traits::pow(pb.clone(), n as usize) * &m,
                        });
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ p);
    let mut covering_points = 0;
    let spread = (params.window.len() as i64).max(1);
    for _ in 0..params.covering_sets {
        let set: Vec<i64> = (0..params.covering_set_size).map(|_| rng.gen_range(-spread..=spread)).collect();
        let k = rng.gen_range(params.window.lo..=params.window.hi);
        covering_points += covering_inclusion(p, k, &set)?;
    }

    Ok(ContinuityCertificate {
        parameters: params.clone(),
        primes: q.clone(),
        prime: p,
        coprime_part: m,
        pairs_checked: pairs,
        covering_sets_checked: params.covering_sets as u64,
        covering_points_checked: covering_points,
        violations: 0,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfiniteParams {
    pub n_max: u32,
    /// `max |a_n|` must reach this many bits for NOT_INVERTIBLE.
    pub growth_bits: u64,
    pub continuity: ContinuityParams,
}

impl Default for ProfiniteParams {
    fn default() -> Self {
        ProfiniteParams { n_max: 30, growth_bits: 20, continuity: ContinuityParams::default() }
    }
}

fn classify_profinite(q: &PrimeSet, p: u64, params: &ProfiniteParams) -> Result<PrimeClassification> {
    if q.contains(p) {
        let cert = floor_div_continuity_check(q, p, &params.continuity)?;
        return Ok(PrimeClassification {
            prime: p,
            verdict: Verdict::Invertible,
            evidence: Evidence::ContinuityCertificate(cert),
        });
    }
    let report = nonproper_witness(q, p, params.n_max)?;
    let decided = report.image_converges_to_one
        && report.cauchy
        && !report.eventually_constant
        && report.max_abs_bits >= params.growth_bits;
    Ok(PrimeClassification {
        prime: p,
        verdict: if decided { Verdict::NotInvertible } else { Verdict::Undecided },
        evidence: Evidence::NonproperWitness(report),
    })
}

/// Classifies every prime in `primes` on `(ℤ, ℰ_Q)`.
pub fn spectrum_profinite(
    q: &PrimeSet,
    primes: &[u64],
    params: &ProfiniteParams,
    bound: u64,
) -> Result<SpectrumReport> {
    let primes = normalize_primes(primes)?;
    let verdicts = primes
        .par_iter()
        .map(|&p| classify_profinite(q, p, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumReport::assemble(Space::Profinite { primes: q.primes().to_vec() }, verdicts, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{compare_spectra, Distinction};

    fn qs(p: &[u64]) -> PrimeSet {
        PrimeSet::new(p).unwrap()
    }

    fn bi(k: i64) -> BigInt {
        BigInt::from(k)
    }

    #[test]
    fn prime_set_validation() {
        assert_eq!(qs(&[5, 2, 5]).primes(), &[2, 5]);
        assert_eq!(PrimeSet::new(&[]), Err(Error::Empty("prime set")));
        assert_eq!(PrimeSet::new(&[2, 6]), Err(Error::NotPrime(6)));
    }

    #[test]
    fn q_star() {
        let ms: Vec<u64> = q_star_members(&qs(&[2, 3]), 20).iter().map(|m| m.m).collect();
        assert_eq!(ms, vec![1, 2, 3, 4, 6, 8, 9, 12, 16, 18]);
        let ms: Vec<u64> = q_star_members(&qs(&[5]), 30).iter().map(|m| m.m).collect();
        assert_eq!(ms, vec![1, 5, 25]);
        let ms = q_star_members(&qs(&[2]), 1);
        assert_eq!(ms, vec![QStarModulus { m: 1, factorization: vec![] }]);
        let twelve = &q_star_members(&qs(&[2, 3]), 12)[7];
        assert_eq!(twelve.factorization, vec![(2, 2), (3, 1)]);
    }

    #[test]
    fn diagonal_embedding() {
        let x = qadic_from_int(&qs(&[2, 3]), &[3, 2], &bi(17)).unwrap();
        assert_eq!(x.residues, vec![bi(1), bi(8)]);
        assert_eq!(x.to_residue(), bi(17));
        let x = qadic_from_int(&qs(&[2]), &[4], &bi(0)).unwrap();
        assert_eq!(x.residues, vec![bi(0)]);
        let x = qadic_from_int(&qs(&[2, 3]), &[1, 1], &bi(-1)).unwrap();
        assert_eq!(x.residues, vec![bi(1), bi(2)]);
        assert_eq!(x.to_residue(), bi(5));
        assert!(qadic_from_int(&qs(&[2, 3]), &[1], &bi(0)).is_err());
        assert!(x.reduce(&[2, 1]).is_err());
    }

    #[test]
    fn inverse_sequences() {
        let a = qadic_inverse_sequence(&qs(&[2]), 3, 6).unwrap();
        assert_eq!(a, [1, 3, 3, 11, 11, 43].map(bi).to_vec());
        let a = qadic_inverse_sequence(&qs(&[3]), 2, 3).unwrap();
        assert_eq!(a, [2, 5, 14].map(bi).to_vec());
        assert_eq!(qadic_inverse_sequence(&qs(&[2]), 2, 3), Err(Error::PrimeInSet(2)));
    }

    #[test]
    fn nonproper_shapes() {
        for (q, p, n) in [(vec![2], 3, 8), (vec![3], 2, 6), (vec![2, 3], 5, 5)] {
            let r = nonproper_witness(&qs(&q), p, n).unwrap();
            assert!(r.image_converges_to_one, "{q:?} {p}");
            assert!(r.cauchy);
            assert!(!r.eventually_constant);
            assert!(r.max_abs > bi(1));
        }
        let r = nonproper_witness(&qs(&[2, 3]), 5, 5).unwrap();
        assert_eq!(r.sequence.last().unwrap() * 5 % bi(7776), bi(1));
    }

    #[test]
    fn floor_congruence_examples() {
        assert!(floor_div_congruent(2, &bi(7), &bi(39), 4, &bi(1)));
        assert!(floor_div_congruent(3, &bi(5), &bi(59), 2, &bi(2)));
        assert!(floor_div_congruent(3, &bi(8), &bi(8), 9, &bi(2)));
        // different classes mod p: ⌊2/3⌋ - ⌊0/3⌋ = 0 but ⌊3/3⌋ - ⌊0/3⌋ = 1
        assert!(!floor_div_congruent(3, &bi(0), &bi(3), 1, &bi(1)));
    }

    #[test]
    fn continuity_certificates() {
        let params = ContinuityParams { window: Window::symmetric(20), ..Default::default() };
        let c = floor_div_continuity_check(&qs(&[2, 3]), 3, &params).unwrap();
        assert_eq!(c.coprime_part, bi(2));
        assert_eq!(c.pairs_checked, 5 * 41 * 4);
        assert_eq!(
            floor_div_continuity_check(&qs(&[2]), 3, &params),
            Err(Error::PrimeNotInSet(3))
        );
    }

    #[test]
    fn covering() {
        assert_eq!(covering_inclusion(3, 7, &[0, 1, 2, 5, -4]).unwrap(), 5);
        assert_eq!(covering_inclusion(2, -9, &[]).unwrap(), 0);
    }

    #[test]
    fn profinite_spectra() {
        let p = ProfiniteParams::default();
        let r = spectrum_profinite(&qs(&[2]), &[2, 3, 5], &p, 20).unwrap();
        assert_eq!(r.spectrum, vec![2]);
        let r25 = spectrum_profinite(&qs(&[2, 5]), &[2, 3, 5, 7], &p, 20).unwrap();
        assert_eq!(r25.spectrum, vec![2, 5]);
        let r3 = spectrum_profinite(&qs(&[3]), &[3], &p, 20).unwrap();
        assert_eq!(r3.spectrum, vec![3]);
        assert_eq!(compare_spectra(&r, &r25).unwrap().outcome, Distinction::Distinguished);
    }

    #[test]
    fn short_sequence_is_undecided() {
        let p = ProfiniteParams { n_max: 4, ..Default::default() };
        let r = spectrum_profinite(&qs(&[2]), &[3], &p, 20).unwrap();
        assert_eq!(r.undecided, vec![3]);
    }
}
