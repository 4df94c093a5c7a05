//! Sweep configuration: size ranges, draw counts, and the master seed.

use std::fmt;
use std::str::FromStr;

/// Inclusive integer range, written `lo..hi` or as a single value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeRange {
    pub lo: usize,
    pub hi: usize,
}

impl SizeRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self, String> {
        if lo == 0 {
            return Err("range endpoints must be at least 1".into());
        }
        if hi < lo {
            return Err(format!("range is empty: {lo}..{hi}"));
        }
        Ok(Self { lo, hi })
    }

    /// Same range with both endpoints raised to at least `min`; used when
    /// a suite needs counts >= dimension.
    pub fn at_least(&self, min: usize) -> SizeRange {
        SizeRange { lo: self.lo.max(min), hi: self.hi.max(min) }
    }
}

impl fmt::Display for SizeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

impl FromStr for SizeRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_end = |part: &str| -> Result<usize, String> {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("expected an integer, got '{part}'"))
        };
        match s.split_once("..") {
            Some((lo, hi)) => SizeRange::new(parse_end(lo)?, parse_end(hi)?),
            None => {
                let v = parse_end(s)?;
                SizeRange::new(v, v)
            }
        }
    }
}

/// Everything a randomized sweep needs besides the suite itself.
#[derive(Clone, Copy, Debug)]
pub struct SweepConfig {
    pub dims: SizeRange,
    pub counts: SizeRange,
    pub draws: u64,
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.draws == 0 {
            return Err("draws must be at least 1".into());
        }
        Ok(())
    }
}
