use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use coarsez::Window;
use num_bigint::BigInt;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "coarsez", version, about = "Word metrics, g-adic arithmetic and power-invertibility spectra on the integers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Special g-adic digits of k
    Rep,
    /// Word length of k in S_g
    Len,
    /// Distance between k and k2
    Dist,
    /// Check the digit-sum formula against exhaustive search
    OracleCheck,
    /// Quasimorphism defect of a map into (Z, d_g)
    Defect,
    /// Divergence witness for multiplication by p
    Witness,
    /// Power-invertibility spectrum of (Z, d_g)
    Spectrum,
    /// Compare two spectra
    Compare,
    /// Members of Q* up to a bound
    Qstar,
    /// Approximations of 1/p in the pro-Q completion
    InverseSeq,
    /// Non-properness signature of multiplication by p in the pro-Q topology
    Nonproper,
    /// Continuity certificate for floor division by p in the pro-Q topology
    Continuity,
    /// Power-invertibility spectrum of (Z, E_Q)
    ProfiniteSpectrum,
    /// Partition of a window into blocks B_n
    Partition,
    /// Bijection close to a map and its coarse inverse
    Rectify,
}

impl Command {
    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Integer maps named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapSpec {
    Identity,
    Floor(i64),
    Mul(i64),
    Add(i64),
    Const(i64),
}

impl MapSpec {
    pub fn apply(self, k: i64) -> i64 {
        match self {
            MapSpec::Identity => k,
            MapSpec::Floor(d) => k.div_euclid(d),
            MapSpec::Mul(n) => n * k,
            MapSpec::Add(c) => k + c,
            MapSpec::Const(c) => c,
        }
    }
}

impl FromStr for MapSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "identity" {
            return Ok(MapSpec::Identity);
        }
        let (name, arg) = s.split_once(':').ok_or_else(|| format!("unknown map {s:?}"))?;
        let arg: i64 = arg.parse().map_err(|_| format!("bad map argument in {s:?}"))?;
        match name {
            "floor" if arg > 0 => Ok(MapSpec::Floor(arg)),
            "floor" => Err("floor divisor must be positive".into()),
            "mul" => Ok(MapSpec::Mul(arg)),
            "add" => Ok(MapSpec::Add(arg)),
            "const" => Ok(MapSpec::Const(arg)),
            _ => Err(format!("unknown map {s:?}; use identity, floor:d, mul:n, add:c or const:c")),
        }
    }
}

impl std::fmt::Display for MapSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MapSpec::Identity => write!(f, "identity"),
            MapSpec::Floor(d) => write!(f, "floor:{d}"),
            MapSpec::Mul(n) => write!(f, "mul:{n}"),
            MapSpec::Add(c) => write!(f, "add:{c}"),
            MapSpec::Const(c) => write!(f, "const:{c}"),
        }
    }
}

fn serialize_display<T: std::fmt::Display, S: serde::Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct Flags {
    /// Base of the generating set S_g
    #[arg(long, global = true)]
    pub g: Option<u64>,
    /// Second base, for compare
    #[arg(long, global = true)]
    pub g2: Option<u64>,
    /// Prime set Q, comma separated
    #[arg(long = "Q", global = true, value_delimiter = ',')]
    #[serde(rename = "Q")]
    pub q: Option<Vec<u64>>,
    /// Second prime set, for compare
    #[arg(long = "Q2", global = true, value_delimiter = ',')]
    #[serde(rename = "Q2")]
    pub q2: Option<Vec<u64>>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(serialize_with = "serialize_display")]
    pub k: Option<BigInt>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(serialize_with = "serialize_display")]
    pub k2: Option<BigInt>,
    /// Primes to classify, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub primes: Option<Vec<u64>>,
    #[arg(long, global = true)]
    pub imax: Option<u32>,
    #[arg(long, global = true)]
    pub threshold: Option<u64>,
    /// Integer window lo:hi
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(serialize_with = "serialize_display")]
    pub window: Option<Window>,
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Upper bound for qstar and for the derived natural spectrum
    #[arg(long, global = true)]
    pub bound: Option<u64>,
    /// Map for defect and rectify: identity, floor:d, mul:n, add:c, const:c
    #[arg(long, global = true)]
    #[serde(serialize_with = "serialize_display")]
    pub map: Option<MapSpec>,
    /// Coarse inverse for rectify
    #[arg(long, global = true)]
    #[serde(serialize_with = "serialize_display")]
    pub inverse: Option<MapSpec>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_specs() {
        assert_eq!("identity".parse(), Ok(MapSpec::Identity));
        assert_eq!("floor:2".parse::<MapSpec>().unwrap().apply(-7), -4);
        assert_eq!("mul:3".parse::<MapSpec>().unwrap().apply(5), 15);
        assert_eq!("const:1".parse::<MapSpec>().unwrap().apply(99), 1);
        assert!("floor:0".parse::<MapSpec>().is_err());
        assert!("square".parse::<MapSpec>().is_err());
        assert_eq!(MapSpec::Add(-3).to_string(), "add:-3");
    }

    #[test]
    fn command_names() {
        assert_eq!(Command::ProfiniteSpectrum.name(), "profinite-spectrum");
        assert_eq!(Command::Rep.name(), "rep");
    }
}
