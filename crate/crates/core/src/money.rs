//! Fixed-point USD notionals.
//!
//! Every notional handled by the cascade is an integer number of micro-dollars
//! (1e-6 USD). Sums and differences are exact, which lets the conservation
//! identities of the waterfall hold with `==` rather than a tolerance.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Micro-dollars per dollar.
pub const SCALE: i128 = 1_000_000;

/// A signed USD amount with 1e-6 resolution.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Usd(i128);

impl Usd {
    pub const ZERO: Usd = Usd(0);

    pub const fn from_micros(micros: i128) -> Self {
        Usd(micros)
    }

    pub const fn micros(self) -> i128 {
        self.0
    }

    pub const fn from_dollars(dollars: i64) -> Self {
        Usd(dollars as i128 * SCALE)
    }

    /// Rounds a floating-point dollar amount to the nearest micro, ties to even.
    ///
    /// Non-finite input maps to zero; callers validate finiteness upstream.
    pub fn from_f64(dollars: f64) -> Self {
        if !dollars.is_finite() {
            return Usd::ZERO;
        }
        Usd((dollars * SCALE as f64).round_ties_even() as i128)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn abs(self) -> Self {
        Usd(self.0.abs())
    }

    pub fn signum(self) -> i32 {
        self.0.signum() as i32
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Scales by a real factor (e.g. a portfolio weight), rounding half-even.
    pub fn scale(self, factor: f64) -> Self {
        Usd::from_f64(self.to_f64() * factor)
    }

    /// Divides by a positive integer count, rounding half-even at 1e-6.
    pub fn div_round(self, divisor: i128) -> Self {
        assert!(divisor > 0, "divisor must be positive");
        let q = self.0.div_euclid(divisor);
        let r = self.0.rem_euclid(divisor);
        let twice = 2 * r;
        let up = match twice.cmp(&divisor) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => q % 2 != 0,
        };
        Usd(if up { q + 1 } else { q })
    }

    /// Number of whole `unit`s contained in `|self|` (floor of the ratio).
    pub fn whole_multiples_of(self, unit: Usd) -> u64 {
        assert!(unit.0 > 0, "unit must be positive");
        (self.0.abs() / unit.0) as u64
    }
}

impl Add for Usd {
    type Output = Usd;
    fn add(self, rhs: Usd) -> Usd {
        Usd(self.0 + rhs.0)
    }
}

impl AddAssign for Usd {
    fn add_assign(&mut self, rhs: Usd) {
        self.0 += rhs.0;
    }
}

impl Sub for Usd {
    type Output = Usd;
    fn sub(self, rhs: Usd) -> Usd {
        Usd(self.0 - rhs.0)
    }
}

impl SubAssign for Usd {
    fn sub_assign(&mut self, rhs: Usd) {
        self.0 -= rhs.0;
    }
}

impl Neg for Usd {
    type Output = Usd;
    fn neg(self) -> Usd {
        Usd(-self.0)
    }
}

impl Mul<i128> for Usd {
    type Output = Usd;
    fn mul(self, rhs: i128) -> Usd {
        Usd(self.0 * rhs)
    }
}

impl Sum for Usd {
    fn sum<I: Iterator<Item = Usd>>(iter: I) -> Usd {
        iter.fold(Usd::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Usd> for Usd {
    fn sum<I: Iterator<Item = &'a Usd>>(iter: I) -> Usd {
        iter.copied().sum()
    }
}

impl fmt::Display for Usd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let scale = SCALE as u128;
        f.pad(&format!("{sign}{}.{:06}", abs / scale, abs % scale))
    }
}

impl fmt::Debug for Usd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Usd({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid USD amount {0:?}")]
pub struct ParseUsdError(String);

impl FromStr for Usd {
    type Err = ParseUsdError;

    /// Parses a plain decimal (`-1234.5`, `20000`, `+7.000001`) exactly.
    /// More than six fractional digits is rejected rather than rounded.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseUsdError(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if (int_part.is_empty() && frac_part.is_empty())
            || frac_part.len() > 6
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let whole: i128 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| err())?
        };
        let mut frac: i128 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| err())?
        };
        for _ in frac_part.len()..6 {
            frac *= 10;
        }
        let micros = whole
            .checked_mul(SCALE)
            .and_then(|w| w.checked_add(frac))
            .ok_or_else(err)?;
        Ok(Usd(if neg { -micros } else { micros }))
    }
}

impl Serialize for Usd {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Usd {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(v) => Ok(Usd::from_dollars(v)),
            Raw::Float(v) if v.is_finite() => Ok(Usd::from_f64(v)),
            Raw::Float(v) => Err(serde::de::Error::custom(format!("non-finite amount {v}"))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
