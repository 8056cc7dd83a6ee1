use std::collections::{BTreeMap, BTreeSet};

use coarsez::gadic_limits::{approx_from_int, divergence_witness, mod_inverse};
use coarsez::oracle::{oracle_length, GeneratorSet};
use coarsez::primes::primes_up_to;
use coarsez::profinite::{floor_div_congruent, qadic_from_int, qadic_inverse_sequence, PrimeSet};
use coarsez::rectify::{build_partition, csb_bijection, InjectiveTable};
use coarsez::spectra::{spectrum, ClassifyParams, SampleSpec, Verdict};
use coarsez::{distance, quasimorphism_defect, rep_to_int, special_rep, word_length, Base, Window, WindowMap};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn base(g: u64) -> Base {
    Base::new(g).unwrap()
}

fn bi(k: i64) -> BigInt {
    BigInt::from(k)
}

#[test]
fn round_trip_exhaustive() {
    for g in 2..=12 {
        let b = base(g);
        for k in -10_000..=10_000 {
            let rep = special_rep(b, &bi(k));
            assert_eq!(rep_to_int(b, rep.digits()).unwrap(), bi(k), "g={g}, k={k}");
        }
    }
}

fn wide() -> impl Strategy<Value = i128> {
    prop_oneof![-10_000i128..=10_000, (i128::MIN >> 24)..=(i128::MAX >> 24)]
}

proptest! {
    #[test]
    fn round_trip_wide(g in 2u64..=12, k in wide()) {
        let b = base(g);
        let k = BigInt::from(k);
        prop_assert_eq!(rep_to_int(b, special_rep(b, &k).digits()).unwrap(), k);
    }

    #[test]
    fn symmetry(g in 2u64..=12, k in wide()) {
        let b = base(g);
        let k = BigInt::from(k);
        prop_assert_eq!(word_length(b, &k), word_length(b, &-&k));
        prop_assert_eq!(special_rep(b, &-&k), special_rep(b, &k).negate());
    }

    #[test]
    fn metric_axioms(g in 2u64..=12, x in wide(), y in wide(), z in wide(), t in wide()) {
        let b = base(g);
        let (x, y, z, t) = (BigInt::from(x), BigInt::from(y), BigInt::from(z), BigInt::from(t));
        prop_assert!(distance(b, &x, &z) <= distance(b, &x, &y) + distance(b, &y, &z));
        prop_assert_eq!(distance(b, &(&x + &t), &(&y + &t)), distance(b, &x, &y));
        prop_assert_eq!(distance(b, &x, &y), distance(b, &y, &x));
        prop_assert_eq!(distance(b, &x, &y) == 0, x == y);
    }

    #[test]
    fn congruence_stability(g in 2u64..=12, n in 0u32..=10, x in wide(), t in -1000i64..=1000) {
        let b = base(g);
        let x = BigInt::from(x);
        let y = &x + b.pow(n + 2) * t;
        let (rx, ry) = (special_rep(b, &x), special_rep(b, &y));
        for i in 0..=n as usize {
            prop_assert_eq!(rx.digit(i), ry.digit(i));
        }
    }

    #[test]
    fn contraction(g in 2u64..=12, x in wide(), y in wide()) {
        let b = base(g);
        let gb = b.to_bigint();
        let (x, y) = (BigInt::from(x), BigInt::from(y));
        prop_assert!(distance(b, &x.div_floor(&gb), &y.div_floor(&gb)) <= distance(b, &x, &y));
    }

    #[test]
    fn quasimorphism_sandwich(g in 2u64..=6, lo in -60i64..=0, len in 0i64..=60) {
        let b = base(g);
        let w = Window::new(lo, lo + len).unwrap();
        let m = WindowMap::from_fn(w, |k| bi(k.div_euclid(g as i64)));
        if let Ok(r) = quasimorphism_defect(&m, b) {
            prop_assert!(r.defect <= 1);
        }
    }

    #[test]
    fn monotone_deepening(g in 2u64..=5, k in -300i64..=300, extra in 0u64..3) {
        let b = base(g);
        let set = GeneratorSet::geometric(b);
        let k = bi(k);
        let need = word_length(b, &k);
        let short = oracle_length(&set, &k, need, None).unwrap();
        let long = oracle_length(&set, &k, need + extra, None).unwrap();
        prop_assert_eq!(short.length, Some(need));
        prop_assert_eq!(long.length, Some(need));
        prop_assert!(long.witness_is_valid());
    }

    #[test]
    fn compatibility(g in 2u64..=12, n in 1u32..=20, m in 1u32..=20, k in wide()) {
        let (n, m) = (n.max(m), n.min(m));
        let b = base(g);
        let k = BigInt::from(k);
        let x = approx_from_int(b, n, &k).unwrap();
        prop_assert_eq!(x.reduce(m).unwrap(), approx_from_int(b, m, &k).unwrap());
        prop_assert!(x.is_compatible(&approx_from_int(b, m, &k).unwrap()));
    }

    #[test]
    fn inverse_correctness(g in 2u64..=12, p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]), n in 1u32..=30) {
        let b = base(g);
        match mod_inverse(p, b, n) {
            Ok(inv) => prop_assert!((inv.residue * p).mod_floor(&b.pow(n)).is_one() || b.pow(n).is_one()),
            Err(_) => prop_assert_eq!(g % p, 0),
        }
    }

    #[test]
    fn witness_cauchy(g in 2u64..=12, p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
        prop_assume!(g % p != 0);
        let b = base(g);
        let w = divergence_witness(b, p, 12).unwrap();
        for (a, c) in w.terms.iter().zip(w.terms.iter().skip(1)) {
            let m = b.pow((p as u32 - 1) * a.i);
            prop_assert!((&c.x - &a.x).mod_floor(&m).is_zero());
        }
    }

    #[test]
    fn prefix_stability(g in 2u64..=12, n in 2u32..=16, x in wide(), t in -1000i64..=1000) {
        let b = base(g);
        let x = BigInt::from(x);
        let y = &x + b.pow(n) * t;
        let (rx, ry) = (special_rep(b, &x), special_rep(b, &y));
        for i in 0..=(n as usize - 2) {
            prop_assert_eq!(rx.digit(i), ry.digit(i));
        }
    }

    #[test]
    fn crt_consistency(e in prop::collection::vec(1u32..=8, 2), d in prop::collection::vec(0u32..=8, 2), k in wide()) {
        let q = PrimeSet::new(&[2, 3]).unwrap();
        let k = BigInt::from(k);
        let smaller: Vec<u32> = e.iter().zip(&d).map(|(e, d)| (*e).min(*d).max(1)).collect();
        let x = qadic_from_int(&q, &e, &k).unwrap();
        prop_assert_eq!(x.reduce(&smaller).unwrap(), qadic_from_int(&q, &smaller, &k).unwrap());
        prop_assert_eq!(x.to_residue(), k.mod_floor(&x.modulus()));
    }

    #[test]
    fn inverse_sequence_coherence(qi in 0usize..4, p in prop::sample::select(vec![3u64, 5, 7, 11]), n_max in 1u32..=20) {
        let q = [vec![2u64], vec![2, 5], vec![13], vec![2, 17]][qi].clone();
        prop_assume!(!q.contains(&p));
        let q = PrimeSet::new(&q).unwrap();
        let a = qadic_inverse_sequence(&q, p, n_max).unwrap();
        for (i, w) in a.windows(2).enumerate() {
            let m = q.tower_modulus(i as u32 + 1);
            prop_assert!((&w[1] - &w[0]).mod_floor(&m).is_zero());
        }
        for (i, an) in a.iter().enumerate() {
            prop_assert!((an * p).mod_floor(&q.tower_modulus(i as u32 + 1)).is_one());
        }
    }

    #[test]
    fn floor_congruence(p in prop::sample::select(vec![2u64, 3, 5]), m in prop::sample::select(vec![1i64, 2, 3, 4, 5, 6, 9, 10]),
                        n in 0u32..=6, x in -100_000i64..=100_000, t in -50i64..=50) {
        prop_assume!(m % p as i64 != 0);
        let step = (p as i64).pow(n + 1) * m;
        let y = x + t * step;
        prop_assert!(floor_div_congruent(p, &bi(x), &bi(y), n, &bi(m)));
    }

    #[test]
    fn partition_exact(g in 2u64..=7, lo in -2000i64..=2000, len in 0i64..=600) {
        let cover = build_partition(base(g), Window::new(lo, lo + len).unwrap());
        prop_assert!(cover.audit().is_exact_cover());
    }

    #[test]
    fn csb_soundness(n in 1usize..=40, fwd_shift in 0i64..5, bwd_shift in 0i64..5, perm_seed in any::<u64>()) {
        let a: Vec<i64> = (0..n as i64).collect();
        let mut images: Vec<i64> = a.iter().map(|x| x + fwd_shift).collect();
        let k = (perm_seed as usize) % n;
        images.rotate_left(k);
        let fwd = InjectiveTable::from_pairs(a.iter().copied().zip(images)).unwrap();
        let bwd = InjectiveTable::from_pairs(a.iter().map(|&y| (y, y + bwd_shift))).unwrap();
        let r = csb_bijection(&fwd, &bwd).unwrap();
        let dom: BTreeSet<i64> = r.bijection.keys().copied().collect();
        let img: BTreeSet<i64> = r.bijection.values().copied().collect();
        prop_assert_eq!(&dom, &a.iter().copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(&img, &dom);
        let bwd_inv: BTreeMap<i64, i64> = bwd.map().iter().map(|(&y, &x)| (x, y)).collect();
        let fallback: BTreeSet<i64> = r.fallback.iter().copied().collect();
        for (&x, &y) in &r.bijection {
            if !fallback.contains(&x) {
                prop_assert!(fwd.get(x) == Some(y) || bwd_inv.get(&x) == Some(&y));
            }
        }
    }
}

#[test]
fn spectrum_closure_laws() {
    let params = ClassifyParams {
        contraction: SampleSpec { window: Window::symmetric(40), random_pairs: 50, ..Default::default() },
        ..Default::default()
    };
    for g in [2, 3, 4, 6, 10, 12] {
        let r = spectrum(base(g), &primes_up_to(60), &params, 60).unwrap();
        for n in 2..=60i64 {
            let v = r.verdict_of(n).unwrap();
            assert_eq!(r.verdict_of(-n), Some(v), "sign symmetry g={g} n={n}");
            if v == Verdict::Invertible {
                for p in primes_up_to(60) {
                    let p = p as i64;
                    if n % p == 0 {
                        assert_eq!(r.verdict_of(p), Some(Verdict::Invertible), "divisor closure g={g} n={n}");
                    }
                }
            }
            for m in 2..=60 / n {
                if v == Verdict::Invertible && r.verdict_of(m) == Some(Verdict::Invertible) {
                    assert_eq!(r.verdict_of(n * m), Some(Verdict::Invertible));
                }
            }
        }
        assert!(r.closure_consistent);
        assert_eq!(r.verdict_of(1), Some(Verdict::Invertible));
    }
}
