use coarsez::gadic_core::word_length_i64;
use coarsez::gadic_limits::divergence_witness;
use coarsez::oracle::{oracle_length, standard_digit_sum, validate_formula, GeneratorSet};
use coarsez::primes::primes_up_to;
use coarsez::profinite::{
    floor_div_continuity_check, nonproper_witness, q_star_members, qadic_inverse_sequence, spectrum_profinite,
    ContinuityParams, PrimeSet, ProfiniteParams,
};
use coarsez::rectify::{build_partition, rectify, FiniteCoarseMap};
use coarsez::spectra::{compare_spectra, spectrum, ClassifyParams, SampleSpec, SpectrumReport, DEFAULT_BOUND};
use coarsez::{distance, quasimorphism_defect, special_rep, word_length, Base, Window, WindowMap};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::args::{Command, Flags, MapSpec};
use crate::report::{evidence_entry, hoist_evidence, object, to_value, Csv, Report};

pub enum Failure {
    Usage(String),
    Core(coarsez::Error),
}

impl From<coarsez::Error> for Failure {
    fn from(e: coarsez::Error) -> Self {
        Failure::Core(e)
    }
}

type Out = Result<Report, Failure>;

fn need<T: Clone>(v: &Option<T>, flag: &str, cmd: Command) -> Result<T, Failure> {
    v.clone().ok_or_else(|| Failure::Usage(format!("{} requires --{flag}", cmd.name())))
}

fn base(f: &Flags, cmd: Command) -> Result<Base, Failure> {
    Ok(Base::new(need(&f.g, "g", cmd)?)?)
}

fn single_prime(f: &Flags, cmd: Command) -> Result<u64, Failure> {
    match need(&f.primes, "primes", cmd)?.as_slice() {
        [p] => Ok(*p),
        _ => Err(Failure::Usage(format!("{} takes exactly one prime in --primes", cmd.name()))),
    }
}

fn prime_set(v: &Option<Vec<u64>>, flag: &str, cmd: Command) -> Result<PrimeSet, Failure> {
    Ok(PrimeSet::new(&need(v, flag, cmd)?)?)
}

/// `--k` alone, or every integer of `--window`.
fn targets(f: &Flags, cmd: Command) -> Result<Vec<BigInt>, Failure> {
    match (&f.k, &f.window) {
        (Some(k), None) => Ok(vec![k.clone()]),
        (None, Some(w)) => Ok(w.iter().map(BigInt::from).collect()),
        (Some(_), Some(_)) => Err(Failure::Usage(format!("{} takes --k or --window, not both", cmd.name()))),
        (None, None) => Err(Failure::Usage(format!("{} requires --k or --window", cmd.name()))),
    }
}

fn single_or_list(mut items: Vec<Value>) -> Value {
    if items.len() == 1 {
        items.pop().unwrap()
    } else {
        Value::Array(items)
    }
}

fn classify_params(f: &Flags) -> ClassifyParams {
    let d = ClassifyParams::default();
    ClassifyParams {
        i_max: f.imax.unwrap_or(d.i_max),
        threshold: f.threshold.unwrap_or(d.threshold),
        contraction: SampleSpec {
            window: f.window.unwrap_or(d.contraction.window),
            seed: f.seed.unwrap_or(d.contraction.seed),
            ..d.contraction
        },
    }
}

fn profinite_params(f: &Flags) -> ProfiniteParams {
    let d = ProfiniteParams::default();
    ProfiniteParams {
        n_max: f.precision.unwrap_or(d.n_max),
        growth_bits: f.threshold.unwrap_or(d.growth_bits),
        continuity: ContinuityParams {
            window: f.window.unwrap_or(d.continuity.window),
            seed: f.seed.unwrap_or(d.continuity.seed),
            ..d.continuity
        },
    }
}

fn default_primes(f: &Flags) -> Vec<u64> {
    f.primes.clone().unwrap_or_else(|| primes_up_to(13))
}

fn spectrum_report(cmd: Command, f: &Flags, r: SpectrumReport) -> Report {
    let mut v = to_value(&r);
    let mut evidence = Vec::new();
    if let Some(Value::Array(items)) = v.get_mut("verdicts") {
        hoist_evidence(items, &mut evidence);
    }
    let mut report = Report::new(cmd, f, v);
    report.evidence = evidence;
    report.undecided = !r.is_decided();
    report
}

enum Side {
    Word(Base),
    Profinite(PrimeSet),
}

fn side(g: Option<u64>, q: &Option<Vec<u64>>, which: &str) -> Result<Side, Failure> {
    match (g, q) {
        (Some(g), None) => Ok(Side::Word(Base::new(g)?)),
        (None, Some(q)) => Ok(Side::Profinite(PrimeSet::new(q)?)),
        _ => Err(Failure::Usage(format!("compare needs exactly one of --g{which} or --Q{which}"))),
    }
}

fn side_spectrum(s: &Side, f: &Flags, primes: &[u64], bound: u64) -> Result<SpectrumReport, Failure> {
    Ok(match s {
        Side::Word(b) => spectrum(*b, primes, &classify_params(f), bound)?,
        Side::Profinite(q) => spectrum_profinite(q, primes, &profinite_params(f), bound)?,
    })
}

pub fn run(cmd: Command, f: &Flags) -> Out {
    match cmd {
        Command::Rep => {
            let b = base(f, cmd)?;
            let mut rows = Vec::new();
            let mut items = Vec::new();
            for k in targets(f, cmd)? {
                let rep = special_rep(b, &k);
                let digits = rep.digits().to_vec();
                let length = rep.word_length();
                let joined: Vec<String> = digits.iter().map(i64::to_string).collect();
                rows.push(vec![b.get().to_string(), k.to_string(), joined.join(" "), length.to_string()]);
                items.push(json!({ "k": k.to_string(), "digits": digits, "length": length }));
            }
            let mut r = Report::new(cmd, f, single_or_list(items));
            r.csv = Some(Csv { header: vec!["g", "k", "digits", "length"], rows });
            Ok(r)
        }
        Command::Len => {
            let b = base(f, cmd)?;
            let mut rows = Vec::new();
            let mut items = Vec::new();
            for k in targets(f, cmd)? {
                let length = word_length(b, &k);
                rows.push(vec![b.get().to_string(), k.to_string(), length.to_string()]);
                items.push(json!({ "k": k.to_string(), "length": length }));
            }
            let mut r = Report::new(cmd, f, single_or_list(items));
            r.csv = Some(Csv { header: vec!["g", "k", "length"], rows });
            Ok(r)
        }
        Command::Dist => {
            let b = base(f, cmd)?;
            let k = need(&f.k, "k", cmd)?;
            let others: Vec<BigInt> = match (&f.k2, &f.window) {
                (Some(k2), None) => vec![k2.clone()],
                (None, Some(w)) => w.iter().map(BigInt::from).collect(),
                _ => return Err(Failure::Usage("dist requires exactly one of --k2 or --window".into())),
            };
            let mut rows = Vec::new();
            let mut items = Vec::new();
            for k2 in others {
                let d = distance(b, &k, &k2);
                rows.push(vec![b.get().to_string(), k.to_string(), k2.to_string(), d.to_string()]);
                items.push(json!({ "k": k.to_string(), "k2": k2.to_string(), "distance": d }));
            }
            let mut r = Report::new(cmd, f, single_or_list(items));
            r.csv = Some(Csv { header: vec!["g", "k", "k2", "distance"], rows });
            Ok(r)
        }
        Command::OracleCheck => {
            let b = base(f, cmd)?;
            if let Some(k) = &f.k {
                let small: i64 = k
                    .try_into()
                    .map_err(|_| Failure::Usage("oracle-check --k must fit in 64 bits".into()))?;
                let budget = standard_digit_sum(b, small.unsigned_abs());
                let res = oracle_length(&GeneratorSet::geometric(b), k, budget, None)?;
                let formula = word_length(b, k);
                let agrees = res.length == Some(formula);
                let mut r = Report::new(
                    cmd,
                    f,
                    object(vec![("formula", json!(formula)), ("oracle", to_value(&res)), ("agrees", json!(agrees))]),
                );
                r.undecided = res.is_inconclusive();
                return if agrees || r.undecided { Ok(r) } else { Err(mismatch(formula, res.length)) };
            }
            let w = f.window.unwrap_or(Window::symmetric(200));
            let report = validate_formula(b, w)?;
            let mut r = Report::new(cmd, f, to_value(&report));
            r.undecided = !report.inconclusive.is_empty();
            if !report.mismatches.is_empty() {
                let m = &report.mismatches[0];
                return Err(mismatch(m.formula, Some(m.oracle)));
            }
            Ok(r)
        }
        Command::Defect => {
            let b = base(f, cmd)?;
            let map = f.map.unwrap_or(MapSpec::Identity);
            let w = f.window.unwrap_or(Window::symmetric(50));
            let m = WindowMap::from_fn(w, |k| BigInt::from(map.apply(k)));
            let report = quasimorphism_defect(&m, b)?;
            Ok(Report::new(cmd, f, object(vec![("map", json!(map.to_string())), ("report", to_value(&report))])))
        }
        Command::Witness => {
            let b = base(f, cmd)?;
            let p = single_prime(f, cmd)?;
            let params = classify_params(f);
            let w = divergence_witness(b, p, params.i_max)?;
            let tail = (params.i_max as usize).div_ceil(2);
            let max_length = w.lengths().into_iter().max().unwrap_or(0);
            Ok(Report::new(
                cmd,
                f,
                object(vec![
                    ("witness", to_value(&w)),
                    ("max_length", json!(max_length)),
                    ("tail_strictly_increasing", json!(w.strictly_increasing_tail(tail))),
                    ("max_image_length", json!(w.max_image_length())),
                ]),
            ))
        }
        Command::Spectrum => {
            let b = base(f, cmd)?;
            let r = spectrum(b, &default_primes(f), &classify_params(f), f.bound.unwrap_or(DEFAULT_BOUND))?;
            Ok(spectrum_report(cmd, f, r))
        }
        Command::Compare => {
            let left = side(f.g, &f.q, "")?;
            let right = side(f.g2, &f.q2, "2")?;
            let primes = default_primes(f);
            let bound = f.bound.unwrap_or(DEFAULT_BOUND);
            let a = side_spectrum(&left, f, &primes, bound)?;
            let b = side_spectrum(&right, f, &primes, bound)?;
            let decided = a.is_decided() && b.is_decided();
            let comparison = if decided { to_value(&compare_spectra(&a, &b)?) } else { json!("UNDECIDED") };
            let mut evidence = Vec::new();
            let mut sides = Vec::new();
            for rep in [&a, &b] {
                let mut v = to_value(rep);
                if let Some(Value::Array(items)) = v.get_mut("verdicts") {
                    hoist_evidence(items, &mut evidence);
                }
                sides.push(v);
            }
            let mut r = Report::new(
                cmd,
                f,
                object(vec![("comparison", comparison), ("left", sides.remove(0)), ("right", sides.remove(0))]),
            );
            r.evidence = evidence;
            r.undecided = !decided;
            Ok(r)
        }
        Command::Qstar => {
            let q = prime_set(&f.q, "Q", cmd)?;
            let bound = f.bound.unwrap_or(100);
            let members = q_star_members(&q, bound);
            Ok(Report::new(cmd, f, object(vec![("bound", json!(bound)), ("members", to_value(&members))])))
        }
        Command::InverseSeq => {
            let q = prime_set(&f.q, "Q", cmd)?;
            let p = single_prime(f, cmd)?;
            let n_max = f.precision.unwrap_or(ProfiniteParams::default().n_max);
            let seq = qadic_inverse_sequence(&q, p, n_max)?;
            let terms: Vec<Value> = seq
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let n = i as u32 + 1;
                    json!({ "n": n, "modulus": q.tower_modulus(n).to_string(), "a": a.to_string() })
                })
                .collect();
            Ok(Report::new(cmd, f, object(vec![("prime", json!(p)), ("terms", Value::Array(terms))])))
        }
        Command::Nonproper => {
            let q = prime_set(&f.q, "Q", cmd)?;
            let p = single_prime(f, cmd)?;
            let params = profinite_params(f);
            let report = nonproper_witness(&q, p, params.n_max)?;
            let decisive = report.image_converges_to_one
                && report.cauchy
                && !report.eventually_constant
                && report.max_abs_bits >= params.growth_bits;
            let mut r = Report::new(
                cmd,
                f,
                object(vec![
                    ("decisive", json!(decisive)),
                    ("last_change", json!(report.last_change)),
                    ("max_abs_bits", json!(report.max_abs_bits)),
                    ("growth_bits", json!(params.growth_bits)),
                ]),
            );
            r.evidence.push(evidence_entry(json!({ "kind": "nonproper_witness" }).merge(to_value(&report))));
            r.undecided = !decisive;
            Ok(r)
        }
        Command::Continuity => {
            let q = prime_set(&f.q, "Q", cmd)?;
            let p = single_prime(f, cmd)?;
            let mut params = profinite_params(f).continuity;
            if let Some(n) = f.precision {
                params.n_max = n;
            }
            let cert = floor_div_continuity_check(&q, p, &params)?;
            let mut r = Report::new(
                cmd,
                f,
                object(vec![("pairs_checked", json!(cert.pairs_checked)), ("violations", json!(cert.violations))]),
            );
            r.evidence.push(evidence_entry(json!({ "kind": "continuity_certificate" }).merge(to_value(&cert))));
            Ok(r)
        }
        Command::ProfiniteSpectrum => {
            let q = prime_set(&f.q, "Q", cmd)?;
            let r = spectrum_profinite(&q, &default_primes(f), &profinite_params(f), f.bound.unwrap_or(DEFAULT_BOUND))?;
            Ok(spectrum_report(cmd, f, r))
        }
        Command::Partition => {
            let b = base(f, cmd)?;
            let w = f.window.unwrap_or(Window::new(0, 20).expect("nonempty"));
            let cover = build_partition(b, w);
            let audit = cover.audit();
            let rows = cover
                .blocks
                .iter()
                .flat_map(|(n, xs)| xs.iter().map(move |x| vec![n.to_string(), x.to_string()]))
                .collect();
            let mut r = Report::new(cmd, f, object(vec![("cover", to_value(&cover)), ("audit", to_value(&audit))]));
            r.csv = Some(Csv { header: vec!["block", "element"], rows });
            Ok(r)
        }
        Command::Rectify => {
            let b = base(f, cmd)?;
            let w = f.window.unwrap_or(Window::new(0, 63).expect("nonempty"));
            let map = f.map.unwrap_or(MapSpec::Mul(2));
            let inverse = f.inverse.unwrap_or(MapSpec::Floor(2));
            let fm = FiniteCoarseMap::from_fn(w, |x| map.apply(x));
            let im = FiniteCoarseMap::from_fn(w, |y| inverse.apply(y));
            let rep = rectify(b, &fm, &im)?;
            let pairs: Vec<Value> = rep
                .csb
                .bijection
                .iter()
                .map(|(&x, &y)| json!({ "x": x, "h": y, "f": map.apply(x), "distance": word_length_i64(b, y - map.apply(x)) }))
                .collect();
            Ok(Report::new(
                cmd,
                f,
                object(vec![
                    ("map", json!(map.to_string())),
                    ("inverse", json!(inverse.to_string())),
                    ("bijection", Value::Array(pairs)),
                    ("fallback", to_value(&rep.csb.fallback)),
                    ("chains", json!(rep.csb.chains)),
                    ("cycles", json!(rep.csb.cycles)),
                    ("forward_window", json!(rep.forward_window.to_string())),
                    ("backward_window", json!(rep.backward_window.to_string())),
                    ("audit", to_value(&rep.audit)),
                ]),
            ))
        }
    }
}

fn mismatch(formula: u64, oracle: Option<u64>) -> Failure {
    Failure::Usage(format!("digit-sum formula gives {formula} but search gives {oracle:?}"))
}

trait Merge {
    fn merge(self, other: Value) -> Value;
}

impl Merge for Value {
    fn merge(mut self, other: Value) -> Value {
        if let (Value::Object(a), Value::Object(b)) = (&mut self, other) {
            a.extend(b);
        }
        self
    }
}
