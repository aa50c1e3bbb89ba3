//! Natural numbers extended with a single infinite element `ℵ₀`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A count or size in `ℕ ∪ {ℵ₀}`. Arithmetic saturates at `Aleph0`.
///
/// Zero is representable because raw bi-cluster counts may be zero; node
/// sizes in constraint solutions are always at least one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtNat {
    Fin(u64),
    Aleph0,
}

pub use ExtNat::{Aleph0, Fin};

impl ExtNat {
    pub const ZERO: ExtNat = Fin(0);
    pub const ONE: ExtNat = Fin(1);

    pub fn is_finite(self) -> bool {
        matches!(self, Fin(_))
    }

    pub fn is_infinite(self) -> bool {
        self == Aleph0
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Fin(n) => Some(n),
            Aleph0 => None,
        }
    }

    /// Multiply by a small scalar (the edge labels 1 and 2).
    pub fn mul_small(self, k: u64) -> ExtNat {
        match self {
            Fin(n) => n.checked_mul(k).map(Fin).unwrap_or(Aleph0),
            Aleph0 if k == 0 => Fin(0),
            Aleph0 => Aleph0,
        }
    }

    pub fn is_positive(self) -> bool {
        self != Fin(0)
    }
}

impl Add for ExtNat {
    type Output = ExtNat;
    fn add(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (Fin(a), Fin(b)) => a.checked_add(b).map(Fin).unwrap_or(Aleph0),
            _ => Aleph0,
        }
    }
}

impl Sum for ExtNat {
    fn sum<I: Iterator<Item = ExtNat>>(iter: I) -> ExtNat {
        iter.fold(Fin(0), |a, b| a + b)
    }
}

impl Ord for ExtNat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Fin(a), Fin(b)) => a.cmp(b),
            (Fin(_), Aleph0) => Ordering::Less,
            (Aleph0, Fin(_)) => Ordering::Greater,
            (Aleph0, Aleph0) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtNat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for ExtNat {
    fn from(n: u64) -> Self {
        Fin(n)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fin(n) => write!(f, "{n}"),
            Aleph0 => write!(f, "inf"),
        }
    }
}

// JSON: integers, or the string "inf".
impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Fin(n) => s.serialize_u64(*n),
            Aleph0 => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Fin(n)),
            Raw::S(s) if s == "inf" || s == "aleph0" => Ok(Aleph0),
            Raw::S(s) => Err(serde::de::Error::custom(format!(
                "expected integer or \"inf\", got {s:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorbing() {
        assert_eq!(Aleph0 + Fin(1), Aleph0);
        assert_eq!(Aleph0.mul_small(2), Aleph0);
        assert_eq!([Fin(1), Aleph0, Fin(3)].into_iter().sum::<ExtNat>(), Aleph0);
        assert_eq!([Fin(1), Fin(3)].into_iter().sum::<ExtNat>(), Fin(4));
        assert!(Fin(u64::MAX) < Aleph0);
        assert_eq!(Fin(u64::MAX) + Fin(1), Aleph0);
    }

    #[test]
    fn json() {
        let v: Vec<ExtNat> = serde_json::from_str("[3, \"inf\"]").unwrap();
        assert_eq!(v, vec![Fin(3), Aleph0]);
        assert_eq!(serde_json::to_string(&v).unwrap(), "[3,\"inf\"]");
    }
}
