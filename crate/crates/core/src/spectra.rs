//! Power maps `μ_n: k ↦ n·k` and their coarse invertibility.
//!
//! A prime `p` is classified on `(ℤ, d_g)` as
//!
//! * INVERTIBLE when `p | g`: `⌊-/g⌋` is a coarse inverse of `μ_g` (it is
//!   1-Lipschitz and `μ_g ∘ ⌊-/g⌋` moves points by a digit in `0..g`), and the
//!   invertible exponents are closed under division. The evidence is a
//!   sampled contraction certificate for `⌊-/g⌋`.
//! * NOT_INVERTIBLE when `p ∤ g`: the bounded set `{g^{(p-1)i} - 1}` has the
//!   preimages `x_i = (g^{(p-1)i} - 1)/p`, whose word lengths grow without
//!   bound, so `μ_p` is not proper. The evidence is the witness sequence.
//!
//! Unboundedness cannot be proved from finitely many terms, so a witness only
//! yields NOT_INVERTIBLE when its tail is strictly increasing and it reaches a
//! length threshold; otherwise the verdict is UNDECIDED.
//!
//! Rational exponents `μ_{p/q} = μ_p ∘ μ_q⁻¹` only appear symbolically, as
//! the description of the positive rational spectrum.

use num_bigint::{BigInt, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gadic_core::{floor_div_image, word_length, word_length_i64, Base};
use crate::gadic_limits::{divergence_witness, WitnessSequence};
use crate::primes::{factorize, is_prime, smooth_numbers};
use crate::profinite::{ContinuityCertificate, NonproperReport};
use crate::window::Window;

/// `μ_n(k) = n·k`.
pub fn mu_apply(n: &BigInt, k: &BigInt) -> BigInt {
    n * k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Invertible,
    NotInvertible,
    Undecided,
}

/// Which pairs a contraction certificate checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleSpec {
    /// Every pair in `window × window` is checked.
    pub window: Window,
    pub random_pairs: u64,
    /// Magnitude of random points, in bits.
    pub random_bits: u64,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { window: Window::symmetric(200), random_pairs: 1000, random_bits: 128, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractionCertificate {
    pub parameters: SampleSpec,
    pub base: Base,
    pub exhaustive_pairs: u64,
    pub random_pairs: u64,
    pub violations: u64,
    /// `max ℓ_g(t)` over `|t| < g`: the diameter of `{0, …, g-1}`.
    pub retraction_bound: u64,
    /// Largest observed `d_g(g·⌊k/g⌋, k)`.
    pub max_retraction_distance: u64,
    pub warrant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivergenceParams {
    pub i_max: u32,
    pub threshold: u64,
    pub tail: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivergenceEvidence {
    pub parameters: DivergenceParams,
    pub witness: WitnessSequence,
    pub max_length: u64,
    pub tail_strictly_increasing: bool,
    /// Every image point `g^{(p-1)i} - 1` has length at most 2.
    pub images_bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    ContractionCertificate(ContractionCertificate),
    DivergenceWitness(DivergenceEvidence),
    ContinuityCertificate(ContinuityCertificate),
    NonproperWitness(NonproperReport),
}

impl Evidence {
    pub fn kind(&self) -> &'static str {
        match self {
            Evidence::ContractionCertificate(_) => "contraction_certificate",
            Evidence::DivergenceWitness(_) => "divergence_witness",
            Evidence::ContinuityCertificate(_) => "continuity_certificate",
            Evidence::NonproperWitness(_) => "nonproper_witness",
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, bits: u64) -> BigInt {
    let words = bits.div_ceil(32).max(1) as usize;
    let mut digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
    let extra = words as u64 * 32 - bits.max(1);
    if let Some(top) = digits.last_mut() {
        *top >>= extra;
    }
    let sign = if rng.gen::<bool>() { Sign::Plus } else { Sign::Minus };
    BigInt::from_slice(sign, &digits)
}

/// Random point close to `k` in `d_g`: `k` plus a few signed powers of `g`.
fn random_neighbour(rng: &mut ChaCha8Rng, base: Base, k: &BigInt, bits: u64) -> BigInt {
    let max_exp = ((bits as f64) / (base.get() as f64).log2()).ceil().max(1.0) as u32;
    let steps = rng.gen_range(1..=4);
    let mut out = k.clone();
    for _ in 0..steps {
        let term = base.pow(rng.gen_range(0..=max_exp));
        if rng.gen::<bool>() {
            out += term;
        } else {
            out -= term;
        }
    }
    out
}

/// Checks `d_g(⌊k/g⌋, ⌊k'/g⌋) <= d_g(k, k')` and
/// `d_g(g·⌊k/g⌋, k) <= diam {0, …, g-1}` on the sampled pairs.
pub fn contraction_certificate(base: Base, spec: &SampleSpec) -> Result<ContractionCertificate> {
    let g = base.get() as i64;
    let retraction_bound = (1 - g..g).map(|t| word_length_i64(base, t)).max().unwrap_or(0);
    let violation = |k: &BigInt, k2: &BigInt, detail: String| Error::ContractionViolated {
        k: k.clone(),
        k2: k2.clone(),
        detail,
    };

    let w = spec.window;
    let span = w.hi - w.lo;
    // lengths of every difference that can occur inside the window
    let diff_len: Vec<u64> = (-span..=span).map(|t| word_length_i64(base, t)).collect();
    let len_of = |t: i64| diff_len[(t + span) as usize];
    let mut max_retraction = 0u64;
    let mut exhaustive = 0u64;
    for k in w.iter() {
        let qk = k.div_euclid(g);
        let back = word_length_i64(base, k - g * qk);
        max_retraction = max_retraction.max(back);
        if back > retraction_bound {
            return Err(violation(&k.into(), &k.into(), format!("retraction distance {back}")));
        }
        for k2 in w.iter() {
            let qk2 = k2.div_euclid(g);
            let before = len_of(k - k2);
            let after = len_of(qk - qk2);
            exhaustive += 1;
            if after > before {
                return Err(violation(&k.into(), &k2.into(), format!("{after} > {before}")));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for n in 0..spec.random_pairs {
        let k = random_point(&mut rng, spec.random_bits);
        let k2 = if n % 2 == 0 {
            random_neighbour(&mut rng, base, &k, spec.random_bits)
        } else {
            random_point(&mut rng, spec.random_bits)
        };
        let before = word_length(base, &(&k - &k2));
        let qk = floor_div_image(base, &k);
        let after = word_length(base, &(&qk - floor_div_image(base, &k2)));
        if after > before {
            return Err(violation(&k, &k2, format!("{after} > {before}")));
        }
        let back = word_length(base, &(&k - qk * base.get()));
        max_retraction = max_retraction.max(back);
        if back > retraction_bound {
            return Err(violation(&k, &k, format!("retraction distance {back}")));
        }
    }

    Ok(ContractionCertificate {
        parameters: spec.clone(),
        base,
        exhaustive_pairs: exhaustive,
        random_pairs: spec.random_pairs,
        violations: 0,
        retraction_bound,
        max_retraction_distance: max_retraction,
        warrant: format!(
            "floor division by {g} is 1-Lipschitz for d_{g} along any path of generators, and \
             {g}·⌊k/{g}⌋ differs from k by a digit in 0..{g}; hence μ_{g} is a coarse \
             equivalence and so is μ_p for every prime p dividing {g}"
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifyParams {
    pub i_max: u32,
    pub threshold: u64,
    pub contraction: SampleSpec,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams { i_max: 40, threshold: 20, contraction: SampleSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeClassification {
    pub prime: u64,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

fn divergence_verdict(base: Base, p: u64, params: &ClassifyParams) -> Result<PrimeClassification> {
    let witness = divergence_witness(base, p, params.i_max)?;
    let tail = (params.i_max as usize).div_ceil(2);
    let max_length = witness.lengths().into_iter().max().unwrap_or(0);
    let tail_strictly_increasing = witness.strictly_increasing_tail(tail);
    let images_bounded = witness.max_image_length() <= 2;
    let decided = tail_strictly_increasing && images_bounded && max_length >= params.threshold;
    Ok(PrimeClassification {
        prime: p,
        verdict: if decided { Verdict::NotInvertible } else { Verdict::Undecided },
        evidence: Evidence::DivergenceWitness(DivergenceEvidence {
            parameters: DivergenceParams { i_max: params.i_max, threshold: params.threshold, tail },
            witness,
            max_length,
            tail_strictly_increasing,
            images_bounded,
        }),
    })
}

/// Classifies `μ_p` on `(ℤ, d_g)`.
pub fn classify_prime(base: Base, p: u64, params: &ClassifyParams) -> Result<PrimeClassification> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if base.get().is_multiple_of(p) {
        let cert = contraction_certificate(base, &params.contraction)?;
        return Ok(PrimeClassification {
            prime: p,
            verdict: Verdict::Invertible,
            evidence: Evidence::ContractionCertificate(cert),
        });
    }
    divergence_verdict(base, p, params)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    WordMetric { g: Base },
    Profinite { primes: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectrumReport {
    pub space: Space,
    pub primes_tested: Vec<u64>,
    pub verdicts: Vec<PrimeClassification>,
    /// Tested primes classified INVERTIBLE.
    pub spectrum: Vec<u64>,
    pub undecided: Vec<u64>,
    pub bound: u64,
    /// Invertible naturals in `[1, bound]`: the semigroup generated by the
    /// spectrum and 1.
    pub natural_spectrum: Vec<u64>,
    /// `natural_spectrum ∪ -natural_spectrum`, ascending.
    pub integer_spectrum: Vec<i64>,
    pub rational_spectrum: String,
    /// The generated semigroup agrees with classifying each `n <= bound` by
    /// its prime factors through `μ_{nm} = μ_n ∘ μ_m`.
    pub closure_consistent: bool,
}

impl SpectrumReport {
    pub(crate) fn assemble(space: Space, verdicts: Vec<PrimeClassification>, bound: u64) -> Self {
        let primes_tested: Vec<u64> = verdicts.iter().map(|v| v.prime).collect();
        let pick = |want: Verdict| -> Vec<u64> {
            verdicts.iter().filter(|v| v.verdict == want).map(|v| v.prime).collect()
        };
        let spectrum = pick(Verdict::Invertible);
        let undecided = pick(Verdict::Undecided);
        let natural_spectrum = smooth_numbers(&spectrum, bound);
        let by_factors: Vec<u64> = (1..=bound)
            .filter(|&n| factorize(n).iter().all(|(p, _)| spectrum.contains(p)))
            .collect();
        let closure_consistent = by_factors == natural_spectrum;
        let mut integer_spectrum: Vec<i64> = natural_spectrum
            .iter()
            .flat_map(|&n| [n as i64, -(n as i64)])
            .collect();
        integer_spectrum.sort_unstable();
        let rational_spectrum = if spectrum.is_empty() {
            "{1}".to_string()
        } else {
            let gens: Vec<String> = spectrum.iter().map(u64::to_string).collect();
            format!("multiplicative subgroup of Q+ generated by {{{}}}", gens.join(", "))
        };
        SpectrumReport {
            space,
            primes_tested,
            verdicts,
            spectrum,
            undecided,
            bound,
            natural_spectrum,
            integer_spectrum,
            rational_spectrum,
            closure_consistent,
        }
    }

    pub fn is_decided(&self) -> bool {
        self.undecided.is_empty()
    }

    pub fn verdict_of_prime(&self, p: u64) -> Option<Verdict> {
        self.verdicts.iter().find(|v| v.prime == p).map(|v| v.verdict)
    }

    /// Verdict for `μ_n`, derived from the prime verdicts via
    /// `μ_{nm} = μ_n ∘ μ_m` and `μ_{-1}` being an involution. `None` when a
    /// prime factor was not tested or is undecided.
    pub fn verdict_of(&self, n: i64) -> Option<Verdict> {
        if n == 0 {
            // μ_0 collapses everything; these spaces are unbounded
            return Some(Verdict::NotInvertible);
        }
        let mut verdict = Verdict::Invertible;
        for (p, _) in factorize(n.unsigned_abs()) {
            match self.verdict_of_prime(p)? {
                Verdict::Invertible => {}
                Verdict::NotInvertible => verdict = Verdict::NotInvertible,
                Verdict::Undecided => return None,
            }
        }
        Some(verdict)
    }
}

/// Default upper end of the derived natural spectrum.
pub const DEFAULT_BOUND: u64 = 20;

/// Classifies every prime in `primes` on `(ℤ, d_g)` and assembles the spectra.
pub fn spectrum(base: Base, primes: &[u64], params: &ClassifyParams, bound: u64) -> Result<SpectrumReport> {
    let primes = normalize_primes(primes)?;
    let needs_certificate = primes.iter().any(|p| base.get().is_multiple_of(*p));
    let certificate = if needs_certificate {
        Some(contraction_certificate(base, &params.contraction)?)
    } else {
        None
    };
    let verdicts: Vec<PrimeClassification> = primes
        .par_iter()
        .map(|&p| match &certificate {
            Some(cert) if base.get().is_multiple_of(p) => Ok(PrimeClassification {
                prime: p,
                verdict: Verdict::Invertible,
                evidence: Evidence::ContractionCertificate(cert.clone()),
            }),
            _ => divergence_verdict(base, p, params),
        })
        .collect::<Result<_>>()?;
    Ok(SpectrumReport::assemble(Space::WordMetric { g: base }, verdicts, bound))
}

pub(crate) fn normalize_primes(primes: &[u64]) -> Result<Vec<u64>> {
    if primes.is_empty() {
        return Err(Error::Empty("prime list"));
    }
    if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
        return Err(Error::NotPrime(p));
    }
    let mut out = primes.to_vec();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Distinction {
    Distinguished,
    NotDistinguished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub outcome: Distinction,
    pub common_primes: Vec<u64>,
    /// Primes invertible in exactly one of the two spaces.
    pub differing_primes: Vec<u64>,
    pub principle: String,
}

/// Compares prime verdicts on the primes both reports tested. Differing
/// spectra rule out a coarse isomorphism; equal spectra say nothing.
pub fn compare_spectra(a: &SpectrumReport, b: &SpectrumReport) -> Result<Comparison> {
    for r in [a, b] {
        if let Some(&p) = r.undecided.first() {
            return Err(Error::Undecided(p));
        }
    }
    let common_primes: Vec<u64> = a
        .primes_tested
        .iter()
        .copied()
        .filter(|p| b.primes_tested.contains(p))
        .collect();
    let differing_primes: Vec<u64> = common_primes
        .iter()
        .copied()
        .filter(|&p| a.verdict_of_prime(p) != b.verdict_of_prime(p))
        .collect();
    let outcome = if differing_primes.is_empty() {
        Distinction::NotDistinguished
    } else {
        Distinction::Distinguished
    };
    Ok(Comparison {
        outcome,
        common_primes,
        differing_primes,
        principle: "a coarse isomorphism commutes with every power map, so coarsely isomorphic \
                    coarse groups have equal power-invertibility spectra"
            .to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn b(g: u64) -> Base {
        Base::new(g).unwrap()
    }

    fn quick() -> ClassifyParams {
        ClassifyParams {
            contraction: SampleSpec {
                window: Window::symmetric(40),
                random_pairs: 100,
                random_bits: 96,
                seed: 7,
            },
            ..ClassifyParams::default()
        }
    }

    #[test]
    fn power_map() {
        let m = |n: i64, k: i64| mu_apply(&BigInt::from(n), &BigInt::from(k));
        assert_eq!(m(3, 7), BigInt::from(21));
        assert_eq!(m(0, 123), BigInt::zero());
        assert_eq!(m(-1, 5), BigInt::from(-5));
    }

    #[test]
    fn contraction_holds() {
        for g in [2, 6] {
            let cert = contraction_certificate(b(g), &quick().contraction).unwrap();
            assert_eq!(cert.violations, 0);
            assert_eq!(cert.exhaustive_pairs, 81 * 81);
            assert!(cert.max_retraction_distance <= cert.retraction_bound);
        }
        let single = SampleSpec { window: Window::new(5, 5).unwrap(), random_pairs: 0, ..quick().contraction };
        assert_eq!(contraction_certificate(b(2), &single).unwrap().exhaustive_pairs, 1);
    }

    #[test]
    fn classify_examples() {
        let p = quick();
        assert_eq!(classify_prime(b(2), 2, &p).unwrap().verdict, Verdict::Invertible);
        let c = classify_prime(b(2), 3, &p).unwrap();
        assert_eq!(c.verdict, Verdict::NotInvertible);
        match &c.evidence {
            Evidence::DivergenceWitness(d) => assert_eq!(&d.witness.lengths()[..4], &[1, 2, 3, 4]),
            other => panic!("unexpected evidence {other:?}"),
        }
        assert_eq!(classify_prime(b(6), 5, &p).unwrap().verdict, Verdict::NotInvertible);
        assert_eq!(classify_prime(b(6), 4, &p), Err(Error::NotPrime(4)));
    }

    #[test]
    fn short_witness_is_undecided() {
        let p = ClassifyParams { i_max: 5, ..quick() };
        assert_eq!(classify_prime(b(2), 3, &p).unwrap().verdict, Verdict::Undecided);
    }

    #[test]
    fn spectrum_examples() {
        let r = spectrum(b(6), &[2, 3, 5, 7], &quick(), 20).unwrap();
        assert_eq!(r.spectrum, vec![2, 3]);
        assert_eq!(r.natural_spectrum, vec![1, 2, 3, 4, 6, 8, 9, 12, 16, 18]);
        assert!(r.closure_consistent);
        assert!(r.integer_spectrum.contains(&-18));

        let r2 = spectrum(b(2), &[2, 3, 5], &quick(), 20).unwrap();
        assert_eq!(r2.spectrum, vec![2]);
        let r12 = spectrum(b(12), &[2, 3], &quick(), 20).unwrap();
        assert_eq!(r12.spectrum, vec![2, 3]);
        assert!(spectrum(b(2), &[], &quick(), 20).is_err());
    }

    #[test]
    fn comparisons() {
        let primes = [2, 3, 5];
        let r2 = spectrum(b(2), &primes, &quick(), 20).unwrap();
        let r3 = spectrum(b(3), &primes, &quick(), 20).unwrap();
        let r6 = spectrum(b(6), &primes, &quick(), 20).unwrap();
        let r12 = spectrum(b(12), &primes, &quick(), 20).unwrap();
        let c = compare_spectra(&r2, &r3).unwrap();
        assert_eq!(c.outcome, Distinction::Distinguished);
        assert_eq!(c.differing_primes, vec![2, 3]);
        assert_eq!(compare_spectra(&r6, &r12).unwrap().outcome, Distinction::NotDistinguished);
        assert_eq!(compare_spectra(&r2, &r2).unwrap().outcome, Distinction::NotDistinguished);

        let shaky = spectrum(b(2), &[3], &ClassifyParams { i_max: 4, ..quick() }, 20).unwrap();
        assert_eq!(compare_spectra(&r2, &shaky), Err(Error::Undecided(3)));
    }

    #[test]
    fn composite_verdicts() {
        let r = spectrum(b(10), &[2, 3, 5], &quick(), 30).unwrap();
        assert_eq!(r.verdict_of(20), Some(Verdict::Invertible));
        assert_eq!(r.verdict_of(-25), Some(Verdict::Invertible));
        assert_eq!(r.verdict_of(6), Some(Verdict::NotInvertible));
        assert_eq!(r.verdict_of(7), None);
        assert_eq!(r.verdict_of(1), Some(Verdict::Invertible));
        assert_eq!(r.verdict_of(0), Some(Verdict::NotInvertible));
    }
}
