//! Exact rational arithmetic and the `"p/q"` string encoding used by every
//! file format in the crate.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serializer};

/// Exact rational number. All distances, defects and weights use this type.
pub type Rational = Ratio<i128>;

/// `num / den` as an exact rational. Panics if `den == 0`.
pub fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(num as i128, den as i128)
}

/// `num / den`, or zero when the denominator is zero (empty point sets).
pub(crate) fn ratio_or_zero(num: usize, den: usize) -> Rational {
    if den == 0 {
        Rational::zero()
    } else {
        ratio(num, den)
    }
}

/// `2^{-r}`.
pub fn inv_pow2(r: usize) -> Rational {
    Rational::new(1, 1i128 << r)
}

/// Renders `q` as `"p/q"` in lowest terms with a positive denominator.
/// Integers keep the explicit `/1`.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {0:?}: expected \"p/q\" or an integer")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i128 = p.trim().parse().map_err(|_| err())?;
            let q: i128 = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: i128 = s.parse().map_err(|_| err())?;
            Ok(Rational::new(p, 1))
        }
    }
}

/// Wrapper that displays a rational as `"p/q"`.
pub struct Display<'a>(pub &'a Rational);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

pub(crate) fn is_probability(q: &Rational) -> bool {
    *q >= Rational::zero() && *q <= Rational::one()
}

/// Serde adapter: `#[serde(with = "pstab::rational::string")]`.
pub mod string {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for optional rationals; `None` is `null`.
pub mod opt_string {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|raw| parse_rational(&raw).map_err(serde::de::Error::custom))
            .transpose()
    }
}
