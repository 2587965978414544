//! Finite fields used for packet symbols: prime fields GF(p) and GF(2^8).
//!
//! Symbols are plain `u16` values in `0..order`. The field is a small `Copy`
//! value passed alongside the data it operates on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u16;

/// GF(2^8) modulo x^8 + x^4 + x^3 + x^2 + 1 with generator 2.
const GF256_POLY: u16 = 0x11d;

struct Gf256Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

const fn gf256_tables() -> Gf256Tables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= GF256_POLY;
        }
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Gf256Tables { exp, log }
}

static GF256: Gf256Tables = gf256_tables();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Field {
    /// Integers modulo a prime `p < 2^16`.
    Prime(u16),
    Gf256,
}

impl Default for Field {
    fn default() -> Self {
        Field::GF257
    }
}

fn is_prime(n: u16) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n as u32).all(|d| !(n as u32).is_multiple_of(d))
}

impl Field {
    pub const GF257: Field = Field::Prime(257);

    pub fn prime(p: u16) -> Result<Self> {
        if is_prime(p) {
            Ok(Field::Prime(p))
        } else {
            Err(Error::UnknownField(format!("gf{p}")))
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Field::Prime(p) => *p as usize,
            Field::Gf256 => 256,
        }
    }

    pub fn zero(&self) -> Symbol {
        0
    }

    pub fn one(&self) -> Symbol {
        1
    }

    pub fn contains(&self, a: Symbol) -> bool {
        (a as usize) < self.order()
    }

    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        match self {
            Field::Prime(p) => ((a as u32 + b as u32) % *p as u32) as Symbol,
            Field::Gf256 => a ^ b,
        }
    }

    pub fn neg(&self, a: Symbol) -> Symbol {
        match self {
            Field::Prime(p) => {
                if a == 0 {
                    0
                } else {
                    p - a
                }
            }
            Field::Gf256 => a,
        }
    }

    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        match self {
            Field::Prime(p) => ((a as u32 * b as u32) % *p as u32) as Symbol,
            Field::Gf256 => {
                if a == 0 || b == 0 {
                    0
                } else {
                    let s = GF256.log[a as usize] as usize + GF256.log[b as usize] as usize;
                    GF256.exp[s] as Symbol
                }
            }
        }
    }

    pub fn pow(&self, a: Symbol, mut e: u64) -> Symbol {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Symbol) -> Option<Symbol> {
        if a == 0 {
            return None;
        }
        match self {
            Field::Prime(p) => Some(self.pow(a, *p as u64 - 2)),
            Field::Gf256 => Some(GF256.exp[255 - GF256.log[a as usize] as usize] as Symbol),
        }
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Option<Symbol> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// The `i`-th of `order - 1` distinct nonzero elements.
    pub fn nonzero_element(&self, i: usize) -> Option<Symbol> {
        (i + 1 < self.order()).then_some((i + 1) as Symbol)
    }

    /// Largest symbol value carried by message payloads: bytes, or the whole
    /// field when it is smaller than a byte.
    pub fn payload_alphabet(&self) -> usize {
        self.order().min(256)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Prime(p) => write!(f, "gf{p}"),
            Field::Gf256 => write!(f, "gf256"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "gf256" {
            return Ok(Field::Gf256);
        }
        lower
            .strip_prefix("gf")
            .and_then(|n| n.parse::<u16>().ok())
            .filter(|&p| is_prime(p))
            .map(Field::Prime)
            .ok_or_else(|| Error::UnknownField(s.to_string()))
    }
}

impl TryFrom<String> for Field {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Field> for String {
    fn from(f: Field) -> String {
        f.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIELDS: [Field; 4] = [Field::Prime(257), Field::Gf256, Field::Prime(5), Field::Prime(2)];

    #[test]
    fn parse_and_display() {
        assert_eq!("gf257".parse::<Field>().unwrap(), Field::GF257);
        assert_eq!("GF256".parse::<Field>().unwrap(), Field::Gf256);
        assert_eq!("gf5".parse::<Field>().unwrap(), Field::Prime(5));
        assert!("gf255".parse::<Field>().is_err());
        assert!("gf".parse::<Field>().is_err());
        assert_eq!(Field::Gf256.to_string(), "gf256");
        assert_eq!(serde_json::to_string(&Field::GF257).unwrap(), "\"gf257\"");
    }

    #[test]
    fn gf256_known_products() {
        let f = Field::Gf256;
        assert_eq!(f.mul(2, 0x80), 0x1d);
        assert_eq!(f.mul(3, 7), 9);
        for a in 1..256u16 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn prime_inverses() {
        let f = Field::GF257;
        for a in 1..257u16 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
        assert_eq!(f.div(3, 0), None);
    }

    #[test]
    fn nonzero_elements_are_distinct() {
        for f in FIELDS {
            let xs: Vec<_> = (0..f.order() - 1).map(|i| f.nonzero_element(i).unwrap()).collect();
            assert!(xs.iter().all(|&x| x != 0 && f.contains(x)));
            let mut sorted = xs.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), xs.len());
            assert_eq!(f.nonzero_element(f.order() - 1), None);
        }
    }

    fn elem() -> impl Strategy<Value = (Field, Symbol, Symbol, Symbol)> {
        (0..FIELDS.len()).prop_flat_map(|k| {
            let f = FIELDS[k];
            let q = f.order() as Symbol;
            (Just(f), 0..q, 0..q, 0..q)
        })
    }

    proptest! {
        #[test]
        fn field_axioms((f, a, b, c) in elem()) {
            prop_assert_eq!(f.add(a, b), f.add(b, a));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, f.neg(a)), 0);
            prop_assert_eq!(f.sub(f.add(a, b), b), a);
            prop_assert!(f.contains(f.mul(a, b)) && f.contains(f.add(a, b)));
            if b != 0 {
                prop_assert_eq!(f.mul(f.div(a, b).unwrap(), b), a);
            }
        }
    }
}
