use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// Arbitrary-precision integer with an `i64` fast path.
///
/// The `Big` variant only ever holds values outside the `i64` range, so the
/// derived equality is value equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Integer {
    Small(i64),
    Big(Box<BigInt>),
}

impl Integer {
    pub fn from_big(b: BigInt) -> Self {
        match b.to_i64() {
            Some(v) => Integer::Small(v),
            None => Integer::Big(Box::new(b)),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Integer::Small(v) => BigInt::from(*v),
            Integer::Big(b) => (**b).clone(),
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Integer::Small(v) => Some(*v),
            Integer::Big(_) => None,
        }
    }

    pub fn add(&self, other: &Integer) -> Integer {
        if let (Integer::Small(a), Integer::Small(b)) = (self, other) {
            if let Some(v) = a.checked_add(*b) {
                return Integer::Small(v);
            }
        }
        Integer::from_big(self.to_big() + other.to_big())
    }

    pub fn sub(&self, other: &Integer) -> Integer {
        if let (Integer::Small(a), Integer::Small(b)) = (self, other) {
            if let Some(v) = a.checked_sub(*b) {
                return Integer::Small(v);
            }
        }
        Integer::from_big(self.to_big() - other.to_big())
    }

    pub fn mul(&self, other: &Integer) -> Integer {
        if let (Integer::Small(a), Integer::Small(b)) = (self, other) {
            if let Some(v) = a.checked_mul(*b) {
                return Integer::Small(v);
            }
        }
        Integer::from_big(self.to_big() * other.to_big())
    }
}

impl From<i64> for Integer {
    fn from(v: i64) -> Self {
        Integer::Small(v)
    }
}

impl Ord for Integer {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Integer::Small(a), Integer::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Integer {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for Integer {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        if let Ok(v) = s.parse::<i64>() {
            return Ok(Integer::Small(v));
        }
        s.parse::<BigInt>().map(Integer::from_big).map_err(|_| ())
    }
}

impl fmt::Display for Integer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integer::Small(v) => write!(f, "{v}"),
            Integer::Big(b) => write!(f, "{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Integer::from(i64::MAX).add(&Integer::from(1));
        assert!(matches!(big, Integer::Big(_)));
        assert_eq!(big.to_string(), "9223372036854775808");
        let back = big.sub(&Integer::from(1));
        assert_eq!(back, Integer::Small(i64::MAX));
        assert!(Integer::from(i64::MIN) < big);
    }

    #[test]
    fn parses_large_literals() {
        let v: Integer = "123456789012345678901234567890".parse().unwrap();
        assert_eq!(v.mul(&Integer::from(0)), Integer::Small(0));
    }
}
