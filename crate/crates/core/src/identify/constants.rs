//! Mathematical constants to arbitrary precision, each computed by two
//! independent methods that must agree.
//!
//! Series are summed in binary fixed point: an integer `X` stands for
//! `X / 2^b`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::apery::AperyProblem;
use crate::error::{Error, Result};
use crate::exact::bigfloat::bits_for;
use crate::exact::BigFloat;

/// Names accepted by [`constant`].
pub const CONSTANT_NAMES: [&str; 7] = ["pi", "zeta2", "zeta3", "zeta5", "log2", "catalan", "gamma"];

/// Extra working bits beyond the requested precision.
const WORK_BITS: u64 = 64;
/// The two methods must agree to within this many trailing bits.
const SLACK_BITS: u64 = 32;

fn one(b: u64) -> BigInt {
    BigInt::one() << b
}

/// `atan(1/x)` or `atanh(1/x)`.
fn arctan_inv(x: u64, b: u64, hyperbolic: bool) -> BigInt {
    let x2 = BigInt::from(x) * x;
    let mut p = one(b) / x;
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !p.is_zero() {
        let term = &p / (2 * k + 1);
        if hyperbolic || k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        p /= &x2;
        k += 1;
    }
    sum
}

fn pi_machin(b: u64) -> BigInt {
    arctan_inv(5, b, false) * 16 - arctan_inv(239, b, false) * 4
}

fn pi_takano(b: u64) -> BigInt {
    (arctan_inv(49, b, false) * 12 + arctan_inv(57, b, false) * 32 - arctan_inv(239, b, false) * 5
        + arctan_inv(110443, b, false) * 12)
        * 4
}

/// `sum_{k>=1} 1/(k 2^k)`.
fn log2_binary(b: u64) -> BigInt {
    let mut p = one(b) >> 1u32;
    let mut sum = BigInt::zero();
    let mut k = 1u64;
    while !p.is_zero() {
        sum += &p / k;
        p >>= 1u32;
        k += 1;
    }
    sum
}

fn log2_atanh(b: u64) -> BigInt {
    arctan_inv(3, b, true) * 2
}

/// `sum_{k>=1} s^(k+1) w(k) / (k^p C(2k,k))` with `s = -1` when alternating.
fn central_binomial_sum(b: u64, p: u32, alternating: bool, weight: impl Fn(u64, &BigInt) -> BigInt) -> BigInt {
    // c = 2^b / C(2k,k)
    let mut c = one(b);
    let mut sum = BigInt::zero();
    let mut k = 1u64;
    loop {
        c = c * k / (2 * (2 * k - 1));
        if c.is_zero() {
            break;
        }
        let term = weight(k, &c) / BigInt::from(k).pow(p);
        if alternating && k.is_multiple_of(2) {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    sum
}

fn zeta3_series(b: u64) -> BigInt {
    central_binomial_sum(b, 3, true, |_, c| c.clone()) * 5 / 2
}

fn zeta2_series(b: u64) -> BigInt {
    central_binomial_sum(b, 2, false, |_, c| c.clone()) * 3
}

/// `2 sum (-1)^(k+1)/(k^5 C(2k,k)) - 5/2 sum (-1)^(k+1) H2(k-1)/(k^3 C(2k,k))`.
fn zeta5_koecher(b: u64) -> BigInt {
    let first = central_binomial_sum(b, 5, true, |_, c| c.clone());
    // running H2(k-1) at scale 2^b
    let scale = one(b);
    let h2 = std::cell::RefCell::new((BigInt::zero(), 1u64));
    let second = central_binomial_sum(b, 3, true, |k, c| {
        let mut g = h2.borrow_mut();
        while g.1 < k {
            let j = g.1;
            g.0 += &scale / (BigInt::from(j) * j);
            g.1 += 1;
        }
        (c * &g.0) >> b
    });
    first * 2 - second * 5 / 2
}

/// Accelerated `sum_{k>=0} (-1)^k a_k` for totally monotone `a_k`, using
/// the integer Chebyshev weights `d_k`; error about `(3+sqrt 8)^-n`.
fn alternating_accelerated(b: u64, a: impl Fn(u64) -> BigInt) -> BigInt {
    let n = ((b as f64) * std::f64::consts::LN_2 / (3.0 + 8f64.sqrt()).ln()).ceil() as u64 + 2;
    let mut terms = Vec::with_capacity(n as usize + 1);
    let mut t = BigInt::one();
    terms.push(t.clone());
    for i in 1..=n {
        t = t * 4u32 * (n + i - 1) * (n - i + 1) / ((2 * i) * (2 * i - 1));
        terms.push(t.clone());
    }
    let mut d = Vec::with_capacity(terms.len());
    let mut acc = BigInt::zero();
    for t in &terms {
        acc += t;
        d.push(acc.clone());
    }
    let dn = &d[n as usize];
    let mut sum = BigInt::zero();
    for k in 0..n {
        let term = (dn - &d[k as usize]) * a(k);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum / dn
}

fn zeta5_borwein(b: u64) -> BigInt {
    let s = one(b);
    let eta = alternating_accelerated(b, |k| &s / BigInt::from(k + 1).pow(5));
    eta * 16 / 15
}

fn catalan_accelerated(b: u64) -> BigInt {
    let s = one(b);
    alternating_accelerated(b, |k| &s / BigInt::from(2 * k + 1).pow(2))
}

/// `pi/8 log(2+sqrt 3) + 3/8 sum_{k>=0} 1/((2k+1)^2 C(2k,k))`.
fn catalan_ramanujan(b: u64) -> BigInt {
    let s = one(b);
    let sqrt3 = (BigInt::from(3) << (2 * b)).sqrt();
    // log(2 + sqrt 3) = 2 atanh(1/sqrt 3) = (2/sqrt 3) sum 1/((2k+1) 3^k)
    let mut p = s.clone();
    let mut series = BigInt::zero();
    let mut k = 0u64;
    while !p.is_zero() {
        series += &p / (2 * k + 1);
        p /= 3;
        k += 1;
    }
    let log_term = ((series * 2) << b) / &sqrt3;
    let pi = pi_machin(b);
    // 1/C(2k,k) weights with odd squares
    let mut c = s.clone();
    let mut sum = c.clone();
    let mut k = 1u64;
    loop {
        c = c * k / (2 * (2 * k - 1));
        if c.is_zero() {
            break;
        }
        sum += &c / BigInt::from(2 * k + 1).pow(2);
        k += 1;
    }
    ((pi * log_term) >> b) / 8 + sum * 3 / 8
}

/// Smallest `m` with `2^m >= x`.
fn log2_ceil(x: f64) -> u64 {
    x.max(2.0).log2().ceil() as u64
}

/// Brent-McMillan with `n = 2^m`: `gamma = U/V` where
/// `V = sum (n^k/k!)^2`, `U = sum (n^k/k!)^2 (H_k - log n)`.
fn gamma_brent_mcmillan(b: u64) -> BigInt {
    let m = log2_ceil(b as f64 * std::f64::consts::LN_2 / 4.0 + 1.0);
    let n2 = BigInt::one() << (2 * m);
    let log_n = log2_binary(b) * m;
    let mut a = -log_n;
    let mut bk = one(b);
    let (mut u, mut v) = (a.clone(), bk.clone());
    let mut k = 1u64;
    loop {
        bk = &bk * &n2 / (k * k);
        a = (&a * &n2 / k + &bk) / k;
        if bk.is_zero() && a.is_zero() {
            break;
        }
        u += &a;
        v += &bk;
        k += 1;
    }
    (u << b) / v
}

/// Bernoulli numbers `B_2, B_4, ..., B_2n` as `(numerator, denominator)`
/// from the tangent numbers.
fn bernoulli_even(n: usize) -> Vec<(BigInt, BigInt)> {
    let mut t = vec![BigInt::zero(); n + 1];
    if n >= 1 {
        t[1] = BigInt::one();
    }
    for k in 2..=n {
        t[k] = &t[k - 1] * (k - 1);
    }
    for k in 2..=n {
        for j in k..=n {
            t[j] = &t[j - 1] * (j - k) + &t[j] * (j - k + 2);
        }
    }
    (1..=n)
        .map(|k| {
            let four_k = BigInt::one() << (2 * k);
            let num = &t[k] * (2 * k);
            let num = if k.is_multiple_of(2) { -num } else { num };
            (num, &four_k * (&four_k - 1))
        })
        .collect()
}

/// Euler-Maclaurin with `N = 2^m`:
/// `gamma = H_N - log N - 1/(2N) + sum_j B_2j / (2j N^2j)`.
fn gamma_euler_maclaurin(b: u64) -> BigInt {
    let m = log2_ceil(b as f64 * 0.35);
    let big_n = 1u64 << m;
    let s = one(b);
    let mut h = BigInt::zero();
    for k in 1..=big_n {
        h += &s / k;
    }
    let mut g = h - log2_binary(b) * m - (&s >> (m + 1));
    let bern = bernoulli_even((b as usize) / 2 + 4);
    let mut prev: Option<BigInt> = None;
    for (j, (num, den)) in bern.iter().enumerate() {
        let j = j as u64 + 1;
        let term = ((&s * num) / (den * (2 * j))) >> (2 * j * m);
        if term.is_zero() {
            break;
        }
        // the series is asymptotic: stop once terms start growing
        if prev.as_ref().is_some_and(|p| term.abs() > p.abs()) {
            break;
        }
        g += &term;
        prev = Some(term);
    }
    g
}

fn zeta3_apery(digits: u32) -> Result<BigFloat> {
    // the error decays like (1+sqrt 2)^(-8n), about 3.06 digits per step
    let n = ((digits + 2 * crate::exact::bigfloat::GUARD_DIGITS) as f64 / 3.06).ceil() as usize + 2;
    let p = AperyProblem::zeta3();
    let a = p.run_a(n)?;
    let b = p.run_b(n)?;
    Ok(BigFloat::from_rational(&(&a.values[n] / &b.values[n]), digits))
}

fn dual(name: &str, digits: u32, first: impl Fn(u64) -> BigInt, second: impl Fn(u64) -> BigInt) -> Result<BigFloat> {
    let b = bits_for(digits) + WORK_BITS;
    let (x, y) = (first(b), second(b));
    if (&x - &y).abs() > (BigInt::one() << SLACK_BITS) {
        return Err(Error::NonConvergent(format!("the two evaluations of {name} disagree")));
    }
    Ok(BigFloat::from_parts(x, -(b as i64), digits))
}

fn compute(name: &str, digits: u32) -> Result<BigFloat> {
    match name {
        "pi" => dual(name, digits, pi_machin, pi_takano),
        "log2" => dual(name, digits, log2_binary, log2_atanh),
        "zeta2" => dual(name, digits, |b| (pi_machin(b).pow(2) >> b) / 6, zeta2_series),
        "zeta5" => dual(name, digits, zeta5_borwein, zeta5_koecher),
        "catalan" => dual(name, digits, catalan_accelerated, catalan_ramanujan),
        "gamma" => dual(name, digits, gamma_brent_mcmillan, gamma_euler_maclaurin),
        "zeta3" => {
            let b = bits_for(digits) + WORK_BITS;
            let series = BigFloat::from_parts(zeta3_series(b), -(b as i64), digits);
            let apery = zeta3_apery(digits)?;
            if series.agreeing_digits(&apery) < digits {
                return Err(Error::NonConvergent("the two evaluations of zeta3 disagree".into()));
            }
            Ok(series)
        }
        other => Err(Error::UnknownConstant(other.to_string())),
    }
}

fn cache() -> &'static RwLock<HashMap<String, BigFloat>> {
    static CACHE: OnceLock<RwLock<HashMap<String, BigFloat>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The named constant to `digits` significant digits.
pub fn constant(name: &str, digits: u32) -> Result<BigFloat> {
    let key = name.to_ascii_lowercase();
    if let Some(v) = cache().read().unwrap().get(&key) {
        if v.digits() >= digits {
            return Ok(v.with_digits(digits));
        }
    }
    let v = compute(&key, digits)?;
    let mut w = cache().write().unwrap();
    let keep = w.get(&key).is_some_and(|old| old.digits() >= digits);
    if !keep {
        w.insert(key, v.clone());
    }
    Ok(v)
}

/// A basis element: a constant, `1`, or one of the products `pi2` (`pi^2`)
/// and `log2sq` (`log(2)^2`).
pub fn basis_value(name: &str, digits: u32) -> Result<BigFloat> {
    match name.to_ascii_lowercase().as_str() {
        "1" | "one" => Ok(BigFloat::from_i64(1, digits)),
        "pi2" | "pi^2" => {
            let p = constant("pi", digits)?;
            Ok(p.mul(&p))
        }
        "log2sq" | "log2^2" => {
            let l = constant("log2", digits)?;
            Ok(l.mul(&l))
        }
        other => constant(other, digits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(name: &str, digits: u32, expect: &str) {
        let v = constant(name, digits).unwrap();
        assert_eq!(v.to_decimal(digits), expect, "{name}");
    }

    #[test]
    fn reference_values() {
        check("zeta3", 20, "1.2020569031595942854");
        check("zeta2", 20, "1.6449340668482264365");
        check("log2", 5, "0.69315");
        check("pi", 30, "3.14159265358979323846264338328");
        check("zeta5", 25, "1.036927755143369926331365");
        check("catalan", 25, "0.9159655941772190150546035");
        check("gamma", 25, "0.5772156649015328606065121");
    }

    #[test]
    fn high_precision_agreement() {
        for name in CONSTANT_NAMES {
            constant(name, 300).unwrap();
        }
    }

    #[test]
    fn unknown_name() {
        assert_eq!(constant("e", 10), Err(Error::UnknownConstant("e".into())));
    }

    #[test]
    fn bernoulli_numbers() {
        let b = bernoulli_even(4);
        let as_pairs: Vec<(i64, i64)> = b
            .iter()
            .map(|(n, d)| {
                let g = num_integer::Integer::gcd(n, d);
                ((n / &g).try_into().unwrap(), (d / &g).try_into().unwrap())
            })
            .collect();
        assert_eq!(as_pairs, vec![(1, 6), (-1, 30), (1, 42), (-1, 30)]);
    }
}
