//! Exact rational quantities for times (seconds) and rates (Hz).
//!
//! Sample times are `k / f` for integer `k`; computing pane indices with
//! floating point would misplace samples that sit exactly on an interval
//! bound (e.g. `0.29 * 100.0 < 29.0`). Values are parsed from their shortest
//! decimal representation and kept exact from then on.

use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(Ratio::new(numer, denom))
    }

    pub fn integer(value: i64) -> Self {
        Rational(Ratio::from_integer(value))
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    /// Converts through the shortest decimal string that round-trips `x`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::BadNumber(x.to_string()));
        }
        x.to_string().parse()
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_positive(self) -> bool {
        self.0 > Ratio::zero()
    }

    pub fn ceil_int(self) -> i64 {
        self.0.ceil().to_integer()
    }

    pub fn floor_int(self) -> i64 {
        self.0.floor().to_integer()
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }
}

impl std::ops::Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl std::ops::Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl std::str::FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadNumber(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Rational::new(n, d));
        }
        let (mantissa, exp) = match t.split_once(['e', 'E']) {
            Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (neg, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let all: String = format!("{int_part}{frac_part}");
        let mut numer: i64 = if all.is_empty() { 0 } else { all.parse().map_err(|_| bad())? };
        let scale = exp - frac_part.len() as i32;
        let mut denom: i64 = 1;
        let pow10 = |e: u32| 10i64.checked_pow(e).ok_or_else(bad);
        if scale >= 0 {
            numer = numer.checked_mul(pow10(scale as u32)?).ok_or_else(bad)?;
        } else {
            denom = pow10((-scale) as u32)?;
        }
        if neg {
            numer = -numer;
        }
        Ok(Rational::new(numer, denom))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let x = self.to_f64();
        if Rational::from_f64(x).ok() == Some(*self) {
            serializer.serialize_f64(x)
        } else {
            serializer.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Number(f64),
    Text(String),
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match Repr::deserialize(deserializer)? {
            Repr::Number(x) => Rational::from_f64(x),
            Repr::Text(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_decimal_values_serialize_as_fractions() {
        let third = Rational::new(1, 3);
        assert_eq!(serde_json::to_string(&third).unwrap(), "\"1/3\"");
        assert_eq!(serde_json::from_str::<Rational>("\"1/3\"").unwrap(), third);
        assert_eq!(serde_json::to_string(&Rational::new(1, 50)).unwrap(), "0.02");
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!("0.02".parse::<Rational>().unwrap(), Rational::new(1, 50));
        assert_eq!(Rational::from_f64(0.29).unwrap(), Rational::new(29, 100));
        assert_eq!(Rational::from_f64(100.0).unwrap(), Rational::integer(100));
        assert_eq!("-1.5".parse::<Rational>().unwrap(), Rational::new(-3, 2));
        assert_eq!("2e-3".parse::<Rational>().unwrap(), Rational::new(1, 500));
        assert_eq!("1/3".parse::<Rational>().unwrap(), Rational::new(1, 3));
    }

    #[test]
    fn sample_bounds_do_not_drift() {
        let hz = Rational::integer(100);
        let b = Rational::from_f64(0.29).unwrap();
        assert_eq!((b * hz).floor_int(), 29);
        assert_eq!((b * hz).ceil_int(), 29);
    }

    #[test]
    fn rejects_garbage() {
        assert!("abc".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!(Rational::from_f64(f64::NAN).is_err());
    }
}
