//! Word metrics on the integers for the generating sets `S_g = {±g^n}`,
//! finite-precision g-adic and pro-Q residue arithmetic, and power-map
//! invertibility spectra of the coarse groups `(ℤ, d_g)` and `(ℤ, ℰ_Q)`.
//!
//! All operations are pure; integers are exact and unbounded unless a
//! function says otherwise.

pub mod error;
pub mod gadic_core;
pub mod gadic_limits;
pub mod oracle;
pub mod primes;
pub mod profinite;
pub mod rectify;
pub mod serde_int;
pub mod spectra;
pub mod window;

pub use error::{Error, Result};
pub use gadic_core::{
    distance, floor_div_image, quasimorphism_defect, rep_to_int, special_rep, word_length, Base,
    SpecialRep,
};
pub use window::{Window, WindowMap};
