//! Binary floating point with an explicit decimal working precision.
//!
//! A `BigFloat` is `mantissa * 2^exponent` with the mantissa rounded to
//! `bits_for(digits)` bits. Those bits cover `digits + GUARD_DIGITS` decimal
//! digits, so the first `digits` digits reported by `to_decimal` survive a
//! handful of rounding steps and are reproducible at higher precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Decimal digits carried beyond the requested precision.
pub const GUARD_DIGITS: u32 = 10;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

pub fn bits_for(digits: u32) -> u64 {
    ((digits + GUARD_DIGITS) as f64 * LOG2_10).ceil() as u64
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigFloat {
    mantissa: BigInt,
    exponent: i64,
    digits: u32,
}

/// Divide by `2^shift`, rounding half away from zero.
fn round_shift(m: &BigInt, shift: u64) -> BigInt {
    if shift == 0 {
        return m.clone();
    }
    let half = BigInt::one() << (shift - 1);
    let mag = m.magnitude().clone();
    let rounded = BigInt::from_biguint(Sign::Plus, (mag + half.magnitude()) >> shift);
    if m.sign() == Sign::Minus {
        -rounded
    } else {
        rounded
    }
}

/// `a / b` rounded half away from zero.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    if (r.abs() << 1u32) >= b.abs() {
        if (a.sign() == Sign::Minus) != (b.sign() == Sign::Minus) {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

impl BigFloat {
    fn normalized(mantissa: BigInt, exponent: i64, digits: u32) -> Self {
        if mantissa.is_zero() {
            return Self::zero(digits);
        }
        let limit = bits_for(digits);
        let bits = mantissa.bits();
        let (mantissa, exponent) = if bits > limit {
            let s = bits - limit;
            (round_shift(&mantissa, s), exponent + s as i64)
        } else {
            (mantissa, exponent)
        };
        // strip trailing zero bits so equal values compare equal
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        BigFloat { mantissa: mantissa >> tz, exponent: exponent + tz as i64, digits }
    }

    pub fn zero(digits: u32) -> Self {
        BigFloat { mantissa: BigInt::zero(), exponent: 0, digits }
    }

    pub fn from_int(n: &BigInt, digits: u32) -> Self {
        Self::normalized(n.clone(), 0, digits)
    }

    pub fn from_i64(n: i64, digits: u32) -> Self {
        Self::from_int(&BigInt::from(n), digits)
    }

    /// `m * 2^exponent`, rounded to `digits`.
    pub fn from_parts(m: BigInt, exponent: i64, digits: u32) -> Self {
        Self::normalized(m, exponent, digits)
    }

    pub fn from_rational(q: &BigRational, digits: u32) -> Self {
        if q.is_zero() {
            return Self::zero(digits);
        }
        let target = bits_for(digits) as i64 + 2;
        let (num, den) = (q.numer(), q.denom());
        let exp = num.bits() as i64 - den.bits() as i64 - target;
        let mant = if exp < 0 {
            round_div(&(num << (-exp) as u64), den)
        } else {
            round_div(num, &(den << exp as u64))
        };
        Self::normalized(mant, exp, digits)
    }

    /// Exact conversion of a finite double; non-finite input gives zero.
    pub fn from_f64(x: f64, digits: u32) -> Self {
        BigRational::from_float(x).map_or_else(|| Self::zero(digits), |q| Self::from_rational(&q, digits))
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn with_digits(&self, digits: u32) -> Self {
        Self::normalized(self.mantissa.clone(), self.exponent, digits)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        BigFloat { mantissa: self.mantissa.abs(), ..self.clone() }
    }

    /// Exact value as a dyadic rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as u64)
        } else {
            BigRational::new(self.mantissa.clone(), BigInt::one() << (-self.exponent) as u64)
        }
    }

    /// Position just above the leading bit: `|x| < 2^top`.
    fn top(&self) -> i64 {
        self.exponent + self.mantissa.bits() as i64
    }

    pub fn add(&self, other: &Self) -> Self {
        let digits = self.digits.min(other.digits);
        if self.is_zero() {
            return other.with_digits(digits);
        }
        if other.is_zero() {
            return self.with_digits(digits);
        }
        let budget = bits_for(digits) as i64 + 4;
        // an operand entirely below the other's rounding unit only nudges the last bit
        if other.top() < self.top() - budget {
            return self.add_tiny(other, digits, budget);
        }
        if self.top() < other.top() - budget {
            return other.add_tiny(self, digits, budget);
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        Self::normalized(a + b, e, digits)
    }

    fn add_tiny(&self, tiny: &Self, digits: u32, budget: i64) -> Self {
        // keep a sticky contribution of the tiny operand's sign
        let e = self.top() - budget - 2;
        let a = if self.exponent >= e {
            &self.mantissa << (self.exponent - e) as u64
        } else {
            round_shift(&self.mantissa, (e - self.exponent) as u64)
        };
        let sticky = BigInt::from(tiny.signum());
        Self::normalized((a << 1u32) + sticky, e - 1, digits)
    }

    pub fn neg(&self) -> Self {
        BigFloat { mantissa: -&self.mantissa, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::normalized(
            &self.mantissa * &other.mantissa,
            self.exponent + other.exponent,
            self.digits.min(other.digits),
        )
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::InvalidArgument("BigFloat division by zero".into()));
        }
        let digits = self.digits.min(other.digits);
        if self.is_zero() {
            return Ok(Self::zero(digits));
        }
        let target = bits_for(digits) as i64 + 4;
        let shift = (target + other.mantissa.bits() as i64 - self.mantissa.bits() as i64).max(0);
        let q = round_div(&(&self.mantissa << shift as u64), &other.mantissa);
        Ok(Self::normalized(q, self.exponent - other.exponent - shift, digits))
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Self::normalized(&self.mantissa * k, self.exponent, self.digits)
    }

    pub fn div_int(&self, k: i64) -> Result<Self> {
        self.div(&BigFloat::from_i64(k, self.digits))
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = BigFloat::from_i64(1, self.digits);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.signum() < 0 {
            return Err(Error::InvalidArgument("square root of a negative BigFloat".into()));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let want = 2 * bits_for(self.digits) as i64 + 4;
        let mut shift = (want - self.mantissa.bits() as i64).max(0);
        if (self.exponent - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = (&self.mantissa << shift as u64).sqrt();
        Ok(Self::normalized(m, (self.exponent - shift) / 2, self.digits))
    }

    /// `ln |x|` to double precision, for rates and exponents; `-inf` at zero.
    pub fn ln_abs_f64(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        crate::exact::rational::ln_abs_int(&self.mantissa) + self.exponent as f64 * std::f64::consts::LN_2
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs_f64() / std::f64::consts::LN_10
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        let s = (bits - 60).max(0);
        let m = (&self.mantissa >> s as u64).to_f64().unwrap();
        m * 2f64.powi((self.exponent + s) as i32)
    }

    /// `round(x * 10^d)` as an integer.
    pub fn to_scaled_int(&self, d: u32) -> BigInt {
        let p = num_traits::pow(BigInt::from(10), d as usize);
        let m = &self.mantissa * p;
        if self.exponent >= 0 {
            m << self.exponent as u64
        } else {
            round_shift(&m, (-self.exponent) as u64)
        }
    }

    /// Decimal rendering with `sig` significant digits. Plain notation for
    /// moderate magnitudes, `d.ddde±x` otherwise.
    pub fn to_decimal(&self, sig: u32) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let sig = sig.max(1);
        let mut e10 = self.log10_abs().floor() as i64;
        let mut scaled;
        loop {
            let shift = sig as i64 - 1 - e10;
            let q = self.to_rational();
            let ten = BigInt::from(10);
            let v = if shift >= 0 {
                q * BigRational::from_integer(num_traits::pow(ten, shift as usize))
            } else {
                q / BigRational::from_integer(num_traits::pow(ten, (-shift) as usize))
            };
            scaled = round_div(v.numer(), v.denom()).abs();
            let len = scaled.to_string().len() as i64;
            if len == sig as i64 + 1 {
                e10 += 1;
                continue;
            }
            if len < sig as i64 {
                e10 -= 1;
                continue;
            }
            break;
        }
        let ds = scaled.to_string();
        let sign = if self.signum() < 0 { "-" } else { "" };
        if (-6..sig as i64).contains(&e10) {
            if e10 >= 0 {
                let (ip, fp) = ds.split_at(e10 as usize + 1);
                if fp.is_empty() {
                    format!("{sign}{ip}")
                } else {
                    format!("{sign}{ip}.{fp}")
                }
            } else {
                format!("{sign}0.{}{}", "0".repeat((-e10 - 1) as usize), ds)
            }
        } else {
            let (h, t) = ds.split_at(1);
            if t.is_empty() {
                format!("{sign}{h}e{e10}")
            } else {
                format!("{sign}{h}.{t}e{e10}")
            }
        }
    }

    /// Parse plain or scientific decimal notation, or `p/q`.
    pub fn parse(s: &str, digits: u32) -> Result<Self> {
        let s = s.trim();
        let (mant, e10) = match s.split_once(['e', 'E']) {
            Some((m, e)) => (m, e.parse::<i64>().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?),
            None => (s, 0),
        };
        let mut q = crate::exact::rational::parse_rational(mant)?;
        let ten = BigRational::from_integer(BigInt::from(10));
        if e10 >= 0 {
            q *= num_traits::pow(ten, e10 as usize);
        } else {
            q /= num_traits::pow(ten, (-e10) as usize);
        }
        Ok(Self::from_rational(&q, digits))
    }

    /// Number of leading decimal digits on which `self` and `other` agree,
    /// measured as `-log10 |a - b|` relative to `max(1, |a|)`; capped at the
    /// smaller working precision.
    pub fn agreeing_digits(&self, other: &Self) -> u32 {
        let cap = self.digits.min(other.digits);
        let diff = self.sub(other);
        if diff.is_zero() {
            return cap;
        }
        let scale = self.log10_abs().max(0.0);
        let d = scale - diff.log10_abs();
        if d <= 0.0 {
            0
        } else {
            (d.floor() as u32).min(cap)
        }
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.to_rational().cmp(&other.to_rational()))
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(self.digits))
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({}; {} digits)", self.to_decimal(self.digits), self.digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;

    #[test]
    fn rational_round_trip_to_precision() {
        let x = BigFloat::from_rational(&rat(1, 3), 30);
        assert_eq!(x.to_decimal(30), "0.333333333333333333333333333333");
        let y = BigFloat::from_rational(&rat(-22, 7), 20);
        assert_eq!(y.to_decimal(20), "-3.1428571428571428571");
    }

    #[test]
    fn arithmetic() {
        let a = BigFloat::from_i64(2, 40);
        let r2 = a.sqrt().unwrap();
        assert_eq!(r2.to_decimal(30), "1.41421356237309504880168872421");
        let b = r2.mul(&r2).sub(&a);
        assert!(b.log10_abs() < -45.0);
        let third = BigFloat::from_i64(1, 40).div_int(3).unwrap();
        assert_eq!(third.mul_int(3).to_decimal(20), "1.0000000000000000000");
    }

    #[test]
    fn tiny_addend_is_absorbed() {
        let one = BigFloat::from_i64(1, 20);
        let tiny = BigFloat::from_parts(BigInt::one(), -100_000, 20);
        assert_eq!(one.add(&tiny).to_decimal(20), "1.0000000000000000000");
        assert_eq!(tiny.add(&one).to_decimal(20), "1.0000000000000000000");
    }

    #[test]
    fn formatting_and_parsing() {
        let x = BigFloat::parse("1.5e-38", 30).unwrap();
        assert_eq!(x.to_decimal(3), "1.50e-38");
        let y = BigFloat::parse("12345.678", 30).unwrap();
        assert_eq!(y.to_decimal(6), "12345.7");
        assert_eq!(BigFloat::parse("3/4", 10).unwrap().to_decimal(2), "0.75");
        assert_eq!(BigFloat::from_i64(100, 10).to_decimal(3), "100");
    }

    #[test]
    fn scaled_int_and_agreement() {
        let x = BigFloat::from_rational(&rat(1, 7), 30);
        assert_eq!(x.to_scaled_int(6), BigInt::from(142857));
        let y = BigFloat::from_rational(&(rat(1, 7) + rat(1, 1_000_000_000_000)), 30);
        assert_eq!(x.agreeing_digits(&y), 11);
    }

    #[test]
    fn huge_exponents_do_not_overflow_logs() {
        let x = BigFloat::from_parts(BigInt::from(3), -10_000, 20);
        let expected = 3f64.ln() - 10_000.0 * std::f64::consts::LN_2;
        assert!((x.ln_abs_f64() - expected).abs() < 1e-9);
    }
}
