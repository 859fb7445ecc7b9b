//! Closed-form conjectures for computed limits: a constant dictionary and
//! integer-relation search by lattice reduction.
//!
//! A match is a conjecture supported by numerics, never a proof.

mod constants;
mod lll;

pub use constants::{basis_value, constant, CONSTANT_NAMES};
pub use lll::lll_reduce;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::BigFloat;
use crate::Rational;

/// Below this precision relation finding is refused.
pub const MIN_DIGITS: u32 = 20;

/// Basis used when none is given.
pub const DEFAULT_BASIS: [&str; 6] = ["1", "zeta2", "zeta3", "pi2", "log2", "log2sq"];

fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), e as usize)
}

fn combination(m: &[BigInt], values: &[BigFloat], digits: u32) -> BigFloat {
    m.iter()
        .zip(values)
        .fold(BigFloat::zero(digits), |acc, (c, v)| acc.add(&v.with_digits(digits).mul(&BigFloat::from_int(c, digits))))
}

/// `|x| < 10^-e`.
fn below_pow10(x: &BigFloat, e: u32) -> bool {
    x.is_zero() || x.abs().to_rational() < Rational::new(BigInt::one(), pow10(e))
}

/// A nonzero integer vector `m` with `|sum m_i v_i| < 10^(-digits/2)` and
/// every `|m_i| < 10^(digits/4)`, or `None`. The first nonzero entry is
/// positive.
pub fn integer_relation(values: &[BigFloat], digits: u32) -> Result<Option<Vec<BigInt>>> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument("integer_relation needs at least two values".into()));
    }
    if digits < MIN_DIGITS {
        return Err(Error::InsufficientPrecision { got: digits, need: MIN_DIGITS });
    }
    let least = values.iter().map(BigFloat::digits).min().unwrap();
    if least < digits {
        return Err(Error::InsufficientPrecision { got: least, need: digits });
    }
    let n = values.len();
    let lattice: Vec<Vec<BigInt>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut row = vec![BigInt::zero(); n + 1];
            row[i] = BigInt::one();
            row[n] = v.to_scaled_int(digits);
            row
        })
        .collect();
    let height = pow10(digits / 4);
    for row in lll_reduce(lattice) {
        let mut m: Vec<BigInt> = row[..n].to_vec();
        if m.iter().all(Zero::is_zero) || m.iter().any(|c| c.abs() >= height) {
            continue;
        }
        let g = m.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        for c in &mut m {
            *c /= &g;
        }
        if m.iter().find(|c| !c.is_zero()).unwrap().is_negative() {
            for c in &mut m {
                *c = -&*c;
            }
        }
        if below_pow10(&combination(&m, values, digits), digits / 2) {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// `value = -(sum_{i>=1} coeffs[i] * basis[i-1]) / coeffs[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantMatch {
    pub basis: Vec<String>,
    /// The relation, target coefficient first.
    pub coeffs: Vec<BigInt>,
    /// `|sum coeffs_i * v_i|` at the verification precision.
    pub residual: BigFloat,
    pub confidence_digits: u32,
}

impl ConstantMatch {
    /// Rational coefficient of each basis element in the value.
    pub fn basis_coefficients(&self) -> Vec<Rational> {
        let m0 = Rational::from(self.coeffs[0].clone());
        self.coeffs[1..].iter().map(|c| -Rational::from(c.clone()) / &m0).collect()
    }

    /// The value implied by the relation, at `digits`.
    pub fn implied_value(&self, digits: u32) -> Result<BigFloat> {
        let mut acc = BigFloat::zero(digits);
        for (name, c) in self.basis.iter().zip(self.basis_coefficients()) {
            if !c.is_zero() {
                acc = acc.add(&basis_value(name, digits)?.mul(&BigFloat::from_rational(&c, digits)));
            }
        }
        Ok(acc)
    }

    /// Human-readable right-hand side, e.g. `3*zeta2` or `-1/2 + 7/4*zeta3`.
    pub fn expression(&self) -> String {
        let terms: Vec<String> = self
            .basis
            .iter()
            .zip(self.basis_coefficients())
            .filter(|(_, c)| !c.is_zero())
            .map(|(name, c)| {
                let c = crate::exact::rational::format_rational(&c);
                if name == "1" {
                    c
                } else if c == "1" {
                    name.clone()
                } else if c == "-1" {
                    format!("-{name}")
                } else {
                    format!("{c}*{name}")
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ").replace("+ -", "- ")
        }
    }
}

fn format_residual(r: &BigFloat) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let l = r.log10_abs();
    let e = l.floor();
    let mut m = 10f64.powf(l - e);
    let mut e = e as i64;
    if m >= 9.995 {
        m /= 10.0;
        e += 1;
    }
    format!("{m:.2}e{e}")
}

#[derive(Serialize, Deserialize)]
struct MatchWire {
    basis: Vec<String>,
    coeffs: Vec<serde_json::Value>,
    residual: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confidence_digits: Option<u32>,
}

impl Serialize for ConstantMatch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| match c.to_i64() {
                Some(v) => serde_json::Value::from(v),
                None => serde_json::Value::from(c.to_string()),
            })
            .collect();
        MatchWire {
            basis: self.basis.clone(),
            coeffs,
            residual: format_residual(&self.residual),
            confidence_digits: Some(self.confidence_digits),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConstantMatch {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = MatchWire::deserialize(d)?;
        let coeffs = w
            .coeffs
            .iter()
            .map(|v| match v {
                serde_json::Value::Number(n) => n.to_string().parse::<BigInt>().map_err(D::Error::custom),
                serde_json::Value::String(s) => s.parse::<BigInt>().map_err(D::Error::custom),
                _ => Err(D::Error::custom("coefficient must be an integer")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if coeffs.len() != w.basis.len() + 1 || coeffs[0].is_zero() {
            return Err(D::Error::custom("coeffs must hold the target coefficient followed by one per basis element"));
        }
        let residual = BigFloat::parse(&w.residual, 20).map_err(D::Error::custom)?.abs();
        let confidence_digits = w.confidence_digits.unwrap_or_else(|| confidence(&residual, &coeffs[0], 0));
        Ok(ConstantMatch { basis: w.basis, coeffs, residual, confidence_digits })
    }
}

/// Digits to which the implied value matches: `-log10(residual / |m0|)`.
fn confidence(residual: &BigFloat, m0: &BigInt, cap: u32) -> u32 {
    if residual.is_zero() {
        return cap;
    }
    let d = crate::exact::rational::ln_abs_int(m0) / std::f64::consts::LN_10 - residual.log10_abs();
    d.max(0.0).floor() as u32
}

/// Result of a relation search with its verification step.
#[derive(Clone, Debug, PartialEq)]
pub enum RelationOutcome {
    Match(ConstantMatch),
    /// A relation was found but its residual did not shrink when everything
    /// was recomputed at higher precision.
    Withdrawn { basis: Vec<String>, coeffs: Vec<BigInt>, residual: BigFloat, recheck: BigFloat },
    NoRelation,
}

/// Index of the last element taking part in a relation.
fn last_participant(m: &[BigInt]) -> usize {
    (0..m.len()).rev().find(|&i| !m[i].is_zero()).unwrap()
}

/// Drop basis elements that are integer combinations of earlier ones, so
/// the relation with the target is unique. A basis relation counts only if
/// it still holds to `digits` places at twice the precision.
fn prune_dependent(names: &mut Vec<String>, digits: u32) -> Result<()> {
    while names.len() >= 2 {
        let vals = names.iter().map(|n| basis_value(n, digits)).collect::<Result<Vec<_>>>()?;
        let Some(m) = integer_relation(&vals, digits)? else { break };
        let hi = 2 * digits;
        let hvals = names.iter().map(|n| basis_value(n, hi)).collect::<Result<Vec<_>>>()?;
        if !below_pow10(&combination(&m, &hvals, hi), digits) {
            break;
        }
        names.remove(last_participant(&m));
    }
    Ok(())
}

/// Search for `m0 * value + sum m_i b_i = 0` at `digits`, then re-evaluate
/// at `2 * digits` (the value at whatever precision it carries up to that).
/// The match stands only if the residual shrinks by `10^(digits/4)`.
pub fn find_relation(value: &BigFloat, basis_names: &[&str], digits: u32) -> Result<RelationOutcome> {
    if value.digits() < digits {
        return Err(Error::InsufficientPrecision { got: value.digits(), need: digits });
    }
    let mut names: Vec<String> = basis_names.iter().map(|s| s.to_ascii_lowercase()).collect();
    prune_dependent(&mut names, digits)?;
    loop {
        if names.is_empty() {
            return Ok(RelationOutcome::NoRelation);
        }
        let mut vals = vec![value.with_digits(digits)];
        for name in &names {
            vals.push(basis_value(name, digits)?);
        }
        let Some(m) = integer_relation(&vals, digits)? else {
            return Ok(RelationOutcome::NoRelation);
        };
        if m[0].is_zero() {
            // a relation among the basis alone: drop one participant
            names.remove(last_participant(&m) - 1);
            continue;
        }
        let r1 = combination(&m, &vals, digits).abs();
        let hi = 2 * digits;
        let mut hvals = vec![value.with_digits(value.digits().min(hi)).with_digits(hi)];
        for name in &names {
            hvals.push(basis_value(name, hi)?);
        }
        let r2 = combination(&m, &hvals, hi).abs();
        let floor = BigFloat::from_rational(&Rational::new(BigInt::one(), pow10(digits)), hi);
        let reference = if r1 > floor { r1.clone() } else { floor };
        let bound = reference.mul(&BigFloat::from_rational(&Rational::new(BigInt::one(), pow10(digits / 4)), hi));
        if r2.is_zero() || r2 <= bound {
            let confidence_digits = confidence(&r2, &m[0], hi);
            return Ok(RelationOutcome::Match(ConstantMatch { basis: names, coeffs: m, residual: r2, confidence_digits }));
        }
        return Ok(RelationOutcome::Withdrawn { basis: names, coeffs: m, residual: r1, recheck: r2 });
    }
}

/// The verified match from [`find_relation`], if any.
pub fn identify(value: &BigFloat, basis_names: &[&str], digits: u32) -> Result<Option<ConstantMatch>> {
    Ok(match find_relation(value, basis_names, digits)? {
        RelationOutcome::Match(m) => Some(m),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn rational_relation() {
        let v = [BigFloat::from_i64(1, 40), BigFloat::from_rational(&rat(1, 2), 40)];
        assert_eq!(integer_relation(&v, 40).unwrap(), Some(ints(&[1, -2])));
    }

    #[test]
    fn pi_squared_relation() {
        let pi = constant("pi", 40).unwrap();
        let v = [pi.mul(&pi), constant("zeta2", 40).unwrap()];
        assert_eq!(integer_relation(&v, 40).unwrap(), Some(ints(&[1, -6])));
    }

    #[test]
    fn no_relation_with_e() {
        let e = BigFloat::parse("2.718281828459045235360287471352662497757247093699959574966967627724", 60).unwrap();
        let v = [BigFloat::from_i64(1, 40), e];
        assert_eq!(integer_relation(&v, 40).unwrap(), None);
    }

    #[test]
    fn low_precision_refused() {
        let v = [BigFloat::from_i64(1, 10), BigFloat::from_i64(2, 10)];
        assert_eq!(integer_relation(&v, 10), Err(Error::InsufficientPrecision { got: 10, need: 20 }));
    }

    #[test]
    fn three_quarters() {
        let m = identify(&BigFloat::from_rational(&rat(3, 4), 30), &["1"], 30).unwrap().unwrap();
        assert_eq!(m.basis_coefficients(), vec![rat(3, 4)]);
        assert_eq!(m.expression(), "3/4");
    }

    #[test]
    fn scale_coherence() {
        let v = constant("zeta3", 80).unwrap().mul_int(7).add(&BigFloat::from_rational(&rat(-1, 3), 80));
        let a = identify(&v, &DEFAULT_BASIS, 40).unwrap().unwrap();
        let b = identify(&v.mul_int(2), &DEFAULT_BASIS, 40).unwrap().unwrap();
        let doubled: Vec<Rational> = a.basis_coefficients().iter().map(|c| c * Rational::from_integer(2.into())).collect();
        assert_eq!(a.basis, b.basis);
        assert_eq!(b.basis_coefficients(), doubled);
        assert_eq!(a.expression(), "-1/3 + 7*zeta3");
    }

    #[test]
    fn dependent_basis_is_pruned() {
        let v = constant("zeta2", 80).unwrap().mul_int(3);
        let m = identify(&v, &DEFAULT_BASIS, 40).unwrap().unwrap();
        assert_eq!(m.expression(), "3*zeta2");
        assert!(!m.basis.contains(&"pi2".to_string()));
    }

    #[test]
    fn perturbed_value_is_withdrawn() {
        let tiny = BigFloat::parse("1e-45", 80).unwrap();
        let v = constant("zeta2", 80).unwrap().mul_int(3).add(&tiny);
        match find_relation(&v, &["1", "zeta2"], 40).unwrap() {
            RelationOutcome::Withdrawn { coeffs, .. } => assert_eq!(coeffs, ints(&[1, 0, -3])),
            other => panic!("expected withdrawal, got {other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let m = identify(&constant("zeta3", 60).unwrap(), &["1", "zeta3"], 30).unwrap().unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.starts_with(r#"{"basis":["1","zeta3"],"coeffs":[1,0,-1],"residual":"#), "{s}");
        let back: ConstantMatch = serde_json::from_str(&s).unwrap();
        assert_eq!(back.coeffs, m.coeffs);
        assert_eq!(back.basis, m.basis);
    }
}
