//! Helpers around `BigRational`: parsing, formatting, logarithms, lcm.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Parse `"p"`, `"p/q"`, or a plain decimal like `"-1.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), fp.len());
        return Ok(BigRational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// `"p"` for integers, `"p/q"` otherwise; exact and round-trippable.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Natural log of `|n|` as an `f64`, valid far outside the `f64` range.
pub fn ln_abs_int(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of `|q|` as an `f64`; `-inf` for zero.
pub fn ln_abs(q: &BigRational) -> f64 {
    ln_abs_int(q.numer()) - ln_abs_int(q.denom())
}

/// `lcm(1, ..., n)`, with `lcm() = 1` for `n = 0`.
pub fn lcm_upto(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for p in primes_upto(n) {
        let mut pk = p;
        while pk * p <= n {
            pk *= p;
        }
        acc *= BigInt::from(pk);
    }
    acc
}

pub fn primes_upto(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &p)| p).map(|(i, _)| i as u64).collect()
}

/// Build `num/den` in lowest terms when every prime dividing `den` is known
/// to be at most `max_prime` (trial division only, no general gcd).
pub fn reduce_smooth(mut num: BigInt, mut den: BigInt, max_prime: u64) -> BigRational {
    if num.is_zero() {
        return BigRational::zero();
    }
    if den.sign() == Sign::Minus {
        num = -num;
        den = -den;
    }
    for p in primes_upto(max_prime) {
        let bp = BigInt::from(p);
        loop {
            let (qd, rd) = den.div_rem(&bp);
            if !rd.is_zero() {
                break;
            }
            let (qn, rn) = num.div_rem(&bp);
            if !rn.is_zero() {
                break;
            }
            den = qd;
            num = qn;
        }
    }
    BigRational::new_raw(num, den)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn is_integer(q: &BigRational) -> bool {
    q.denom().is_one()
}

pub fn abs(q: &BigRational) -> BigRational {
    q.abs()
}

/// serde adapter: a rational as a `"p/q"` string.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = RationalRepr::deserialize(d)?;
        s.into_rational().map_err(serde::de::Error::custom)
    }

    /// Accept either a JSON string or a JSON integer.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RationalRepr {
        Str(String),
        Int(i64),
    }

    impl RationalRepr {
        pub(crate) fn into_rational(self) -> Result<BigRational> {
            match self {
                RationalRepr::Str(s) => parse_rational(&s),
                RationalRepr::Int(i) => Ok(int(i)),
            }
        }
    }
}

/// serde adapter: a list of rationals as `"p/q"` strings.
pub mod serde_rational_vec {
    use super::serde_rational::RationalRepr;
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&format_rational(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        let raw = Vec::<RationalRepr>::deserialize(d)?;
        raw.into_iter().map(|r| r.into_rational().map_err(serde::de::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn format_round_trips() {
        for q in [rat(3, 4), rat(-5, 1), rat(0, 1), rat(-7, 9)] {
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
    }

    #[test]
    fn lcm_and_logs() {
        assert_eq!(lcm_upto(10), BigInt::from(2520));
        assert_eq!(lcm_upto(0), BigInt::one());
        let big = num_traits::pow(BigInt::from(10), 500);
        assert!((ln_abs_int(&big) - 500.0 * 10f64.ln()).abs() < 1e-9);
        assert!((ln_abs(&rat(1, 8)) + 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn smooth_reduction_matches_gcd() {
        let num = BigInt::from(2 * 3 * 3 * 7 * 11);
        let den = BigInt::from(2 * 2 * 3 * 5 * 7);
        let r = reduce_smooth(num.clone(), den.clone(), 7);
        assert_eq!(r, BigRational::new(num, den));
    }
}
