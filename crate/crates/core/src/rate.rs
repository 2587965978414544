use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A non-negative exact rate in packets per network use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(Ratio<u64>);

impl Rate {
    pub const ZERO: Rate = Rate(Ratio::new_raw(0, 1));

    /// # Panics
    /// If `denominator` is zero.
    pub fn new(numerator: u64, denominator: u64) -> Self {
        Rate(Ratio::new(numerator, denominator))
    }

    pub fn integer(n: u64) -> Self {
        Rate(Ratio::from_integer(n))
    }

    /// `[numerator / denominator]^+`, with a zero denominator mapped to 0.
    pub fn positive_part(numerator: i64, denominator: u64) -> Self {
        if denominator == 0 || numerator <= 0 {
            Rate::ZERO
        } else {
            Rate::new(numerator as u64, denominator)
        }
    }

    pub(crate) fn from_signed(r: Ratio<i64>) -> Self {
        if *r.numer() <= 0 {
            Rate::ZERO
        } else {
            Rate::new(*r.numer() as u64, *r.denom() as u64)
        }
    }

    pub fn numerator(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }

    pub fn is_zero(&self) -> bool {
        self.numerator() == 0
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator() == 1 {
            write!(f, "{}", self.numerator())
        } else {
            write!(f, "{}/{}", self.numerator(), self.denominator())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rate {0:?}")]
pub struct ParseRateError(String);

impl FromStr for Rate {
    type Err = ParseRateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRateError(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: u64 = n.parse().map_err(|_| err())?;
        let d: u64 = d.parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        Ok(Rate::new(n, d))
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_formats() {
        assert_eq!(Rate::new(10, 4).to_string(), "5/2");
        assert_eq!(Rate::new(4, 2).to_string(), "2");
        assert_eq!(Rate::new(0, 7), Rate::ZERO);
        assert_eq!("18/7".parse::<Rate>().unwrap(), Rate::new(18, 7));
        assert_eq!("3".parse::<Rate>().unwrap(), Rate::integer(3));
        assert!("1/0".parse::<Rate>().is_err());
        assert!("-1/2".parse::<Rate>().is_err());
    }

    #[test]
    fn positive_part_clamps() {
        assert_eq!(Rate::positive_part(-3, 4), Rate::ZERO);
        assert_eq!(Rate::positive_part(3, 0), Rate::ZERO);
        assert_eq!(Rate::positive_part(6, 4), Rate::new(3, 2));
    }

    #[test]
    fn ordering_is_numeric() {
        assert!(Rate::new(2, 3) > Rate::new(1, 2));
        assert!(Rate::new(5, 2) > Rate::integer(2));
    }

    #[test]
    fn serde_as_string() {
        let json = serde_json::to_string(&Rate::new(5, 2)).unwrap();
        assert_eq!(json, "\"5/2\"");
        assert_eq!(serde_json::from_str::<Rate>(&json).unwrap(), Rate::new(5, 2));
    }
}
