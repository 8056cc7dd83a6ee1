use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty window [{lo}, {hi}]")));
        }
        Ok(Window { lo, hi })
    }

    /// `[-r, r]`
    pub fn symmetric(r: i64) -> Self {
        Window { lo: -r.abs(), hi: r.abs() }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + Clone {
        self.lo..=self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("window must look like lo:hi, got {s:?}"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        Window::new(lo, hi)
    }
}

/// An integer map known only by its values on a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowMap {
    window: Window,
    values: Vec<BigInt>,
}

impl WindowMap {
    pub fn from_fn(window: Window, f: impl Fn(i64) -> BigInt) -> Self {
        let values = window.iter().map(f).collect();
        WindowMap { window, values }
    }

    pub fn from_values(window: Window, values: Vec<BigInt>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::SizeMismatch { left: window.len(), right: values.len() });
        }
        Ok(WindowMap { window, values })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn get(&self, x: i64) -> Option<&BigInt> {
        if self.window.contains(x) {
            Some(&self.values[(x - self.window.lo) as usize])
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.window.iter().zip(self.values.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_window() {
        assert_eq!("-50:50".parse::<Window>().unwrap(), Window { lo: -50, hi: 50 });
        assert!("5:1".parse::<Window>().is_err());
        assert!("5".parse::<Window>().is_err());
    }

    #[test]
    fn window_map_lookup() {
        let w = Window::new(-2, 2).unwrap();
        let m = WindowMap::from_fn(w, |x| BigInt::from(x * x));
        assert_eq!(m.get(-2), Some(&BigInt::from(4)));
        assert_eq!(m.get(3), None);
        assert!(WindowMap::from_values(w, vec![]).is_err());
    }
}
