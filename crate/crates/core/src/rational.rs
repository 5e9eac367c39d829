//! Exact rational arithmetic for exponent bookkeeping.
//!
//! The critical regime `m = n + 2` is a measure-zero line in the (n, m)
//! plane, so deciding it with floating point comparisons is fragile.
//! Exponents entered as decimal text ("0.05", "2.1e0") are kept as exact
//! rationals and the regime trichotomy is decided on those.

use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i128,
    den: i128, // > 0
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalError {
    #[error("cannot parse `{0}` as a decimal number")]
    Parse(String),
    #[error("value out of exactly-representable range")]
    OutOfRange,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Rational::new(v as i128, 1)
    }

    /// Exact conversion: every finite f64 is mantissa * 2^exp.
    pub fn from_f64_exact(v: f64) -> Result<Self, RationalError> {
        if !v.is_finite() {
            return Err(RationalError::OutOfRange);
        }
        if v == 0.0 {
            return Ok(Rational::new(0, 1));
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i128 } else { 1i128 };
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (mant, exp) = if exp_bits == 0 {
            (frac, -1074i64)
        } else {
            (frac + (1i128 << 52), exp_bits - 1075)
        };
        // Exponent sweep for sane physical exponents only.
        if !(-100..=60).contains(&exp) {
            return Err(RationalError::OutOfRange);
        }
        if exp >= 0 {
            Ok(Rational::new(sign * (mant << exp), 1))
        } else {
            Ok(Rational::new(sign * mant, 1i128 << (-exp)))
        }
    }

    /// Parse decimal text (optionally with an exponent suffix) exactly:
    /// "1.05" -> 21/20, "5e-2" -> 1/20.
    pub fn from_decimal_str(s: &str) -> Result<Self, RationalError> {
        let s = s.trim();
        let err = || RationalError::Parse(s.to_string());
        if s.is_empty() {
            return Err(err());
        }
        let (mantissa, exp10) = match s.find(['e', 'E']) {
            Some(pos) => {
                let e: i32 = s[pos + 1..].parse().map_err(|_| err())?;
                (&s[..pos], e)
            }
            None => (s, 0),
        };
        let (mantissa, sign) = match mantissa.strip_prefix('-') {
            Some(rest) => (rest, -1i128),
            None => (mantissa.strip_prefix('+').unwrap_or(mantissa), 1i128),
        };
        let (int_part, frac_part) = match mantissa.find('.') {
            Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        let digits: String = format!("{int_part}{frac_part}");
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let mut num: i128 = digits.parse().map_err(|_| err())?;
        num *= sign;
        let shift = exp10 - frac_part.len() as i32;
        let pow10 = |k: u32| -> Result<i128, RationalError> {
            10i128.checked_pow(k).ok_or(RationalError::OutOfRange)
        };
        if shift >= 0 {
            let p = pow10(shift as u32)?;
            let num = num.checked_mul(p).ok_or(RationalError::OutOfRange)?;
            Ok(Rational::new(num, 1))
        } else {
            Ok(Rational::new(num, pow10((-shift) as u32)?))
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_positive(self) -> bool {
        self.num > 0
    }

    pub fn add_int(self, v: i64) -> Self {
        Rational::new(self.num + v as i128 * self.den, self.den)
    }

    #[allow(clippy::should_implement_trait)] // by-value helpers, not operator overloads
    pub fn add(self, other: Self) -> Self {
        Rational::new(
            self.num * other.den + other.num * self.den,
            self.den * other.den,
        )
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Self) -> Self {
        Rational::new(
            self.num * other.den - other.num * self.den,
            self.den * other.den,
        )
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parse_is_exact() {
        let a = Rational::from_decimal_str("0.1").unwrap();
        assert_eq!(a, Rational::new(1, 10));
        let b = Rational::from_decimal_str("2.1").unwrap();
        assert_eq!(b.sub(a), Rational::from_int(2));
        assert_eq!(Rational::from_decimal_str("5e-2").unwrap(), Rational::new(1, 20));
        assert_eq!(Rational::from_decimal_str("1.5e1").unwrap(), Rational::from_int(15));
        assert_eq!(Rational::from_decimal_str("-0.25").unwrap(), Rational::new(-1, 4));
        assert!(Rational::from_decimal_str("abc").is_err());
        assert!(Rational::from_decimal_str("").is_err());
    }

    #[test]
    fn f64_exact_roundtrip() {
        for v in [1.0, 3.0, 0.5, 2.75, -1.25, 0.0] {
            let r = Rational::from_f64_exact(v).unwrap();
            assert_eq!(r.to_f64(), v);
        }
        // 0.1f64 is not 1/10, and the conversion must reflect that.
        let r = Rational::from_f64_exact(0.1).unwrap();
        assert_ne!(r, Rational::new(1, 10));
        assert_eq!(r.to_f64(), 0.1);
    }

    #[test]
    fn ordering() {
        let a = Rational::from_decimal_str("1.05").unwrap();
        let b = Rational::from_decimal_str("1.1").unwrap();
        assert!(a < b);
        assert!(a.add_int(2) > b);
    }
}
