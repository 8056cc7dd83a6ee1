use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u64),

    #[error("malformed digit vector: {0}")]
    InvalidDigits(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{p} and {g} are not coprime")]
    NotCoprime { p: u64, g: u64 },

    #[error("precision {precision} is too small, need at least {required}")]
    InsufficientPrecision { precision: u32, required: u32 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("no admissible pair (a, b) with a, b, a+b inside [{lo}, {hi}]")]
    NoAdmissiblePair { lo: i64, hi: i64 },

    #[error("contraction violated for ({k}, {k2}): {detail}")]
    ContractionViolated { k: BigInt, k2: BigInt, detail: String },

    #[error("floor-division congruence violated for x = {x}, y = {y}, modulus {modulus}")]
    ContinuityViolated { x: BigInt, y: BigInt, modulus: BigInt },

    #[error("covering inclusion violated for k = {k}, element {element}")]
    CoveringViolated { k: i64, element: i64 },

    #[error("prime {0} lies in the prime set")]
    PrimeInSet(u64),

    #[error("prime {0} does not lie in the prime set")]
    PrimeNotInSet(u64),

    #[error("block {block} has room for {available} elements but {needed} are required")]
    WindowTooSmall { block: i64, needed: usize, available: usize },

    #[error("value {value} lies outside the window [{lo}, {hi}]")]
    OutOfWindow { value: i64, lo: i64, hi: i64 },

    #[error("table is not injective: {a} and {b} both map to {image}")]
    NotInjective { a: i64, b: i64, image: i64 },

    #[error("finite sets have different sizes: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("search values exceed the exact 128-bit range")]
    Overflow,

    #[error("undecided verdict for prime {0}")]
    Undecided(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
