//! Linear recurrences with polynomial coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{format_rational, int, parse_rational};
use crate::{PolyQ, Rational};

/// What the right-hand side of a recurrence is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RhsKind {
    /// Homogeneous.
    #[default]
    Zero,
    /// The telescoped certificate boundary `G(n, n+1) - G(n, 0)`.
    Boundary,
    /// A separately supplied P-recursive sequence.
    Seq,
}

/// `sum_{i=0..L} p_i(n) X(n+i) = rhs(n)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Recurrence {
    coeffs: Vec<PolyQ>,
    rhs: RhsKind,
}

impl Recurrence {
    /// Coefficients `p_0, ..., p_L`; the last must be nonzero.
    pub fn new(coeffs: Vec<PolyQ>) -> Result<Self> {
        Self::with_rhs(coeffs, RhsKind::Zero)
    }

    pub fn with_rhs(coeffs: Vec<PolyQ>, rhs: RhsKind) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::InvalidArgument("recurrence needs at least one coefficient".into())),
            Some(p) if p.is_zero() => Err(Error::InvalidArgument("leading coefficient p_L is zero".into())),
            _ => Ok(Recurrence { coeffs, rhs }),
        }
    }

    /// Convenience constructor from integer coefficient lists (ascending in n).
    pub fn from_i64s(coeffs: &[&[i64]]) -> Result<Self> {
        Self::new(coeffs.iter().map(|c| PolyQ::from_i64s(c)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[PolyQ] {
        &self.coeffs
    }

    pub fn rhs(&self) -> RhsKind {
        self.rhs
    }

    pub fn set_rhs(&mut self, rhs: RhsKind) {
        self.rhs = rhs;
    }

    pub fn leading(&self) -> &PolyQ {
        self.coeffs.last().unwrap()
    }

    pub fn coeff_at(&self, i: usize, n: i64) -> Rational {
        self.coeffs[i].eval(&int(n))
    }

    /// `sum_i p_i(n) seq[n+i]`; `None` if the sequence is too short.
    pub fn apply(&self, seq: &[Rational], n: i64) -> Option<Rational> {
        let base = usize::try_from(n).ok()?;
        if base + self.order() >= seq.len() {
            return None;
        }
        Some(
            self.coeffs
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (i, p)| acc + p.eval(&int(n)) * &seq[base + i]),
        )
    }

    /// Canonical form: no common polynomial factor, integer coefficients
    /// with content 1, positive leading coefficient of `p_L`.
    pub fn normalized(&self) -> Self {
        let mut g = PolyQ::zero();
        for p in &self.coeffs {
            g = g.gcd(p);
            if g.is_constant() {
                break;
            }
        }
        let mut cs: Vec<PolyQ> = if g.degree().unwrap_or(0) > 0 {
            self.coeffs.iter().map(|p| p.exact_div(&g).unwrap()).collect()
        } else {
            self.coeffs.clone()
        };
        let mut den_lcm = BigInt::one();
        for c in cs.iter().flat_map(|p| p.coeffs()) {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = BigInt::zero();
        for c in cs.iter().flat_map(|p| p.coeffs()) {
            content = content.gcd(&(c.numer() * (&den_lcm / c.denom())));
        }
        let mut scale = BigRational::new(den_lcm, content);
        if cs.last().unwrap().leading().unwrap().is_negative() {
            scale = -scale;
        }
        cs = cs.iter().map(|p| p.scale(&scale)).collect();
        Recurrence { coeffs: cs, rhs: self.rhs }
    }

    /// The coefficients as integer lists; `None` unless normalized to integers.
    pub fn integer_coeffs(&self) -> Option<Vec<Vec<BigInt>>> {
        self.coeffs
            .iter()
            .map(|p| p.coeffs().iter().map(|c| c.is_integer().then(|| c.numer().clone())).collect())
            .collect()
    }
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let shift = match i {
                0 => "X(n)".to_string(),
                _ => format!("X(n+{i})"),
            };
            write!(f, "[{p}] {shift}")?;
        }
        write!(f, " = {}", match self.rhs {
            RhsKind::Zero => "0",
            RhsKind::Boundary => "G(n,n+1) - G(n,0)",
            RhsKind::Seq => "C(n)",
        })
    }
}

impl fmt::Debug for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Recurrence({self})")
    }
}

/// Wire form `{"order": L, "coeffs": [[c0, c1, ...], ...], "rhs": "zero"}` with
/// `coeffs[i][d]` the coefficient of `n^d` in `p_i`. Integers that fit in
/// an i64 are JSON numbers, anything else a decimal or `"p/q"` string.
#[derive(Serialize, Deserialize)]
struct RecurrenceWire {
    order: usize,
    coeffs: Vec<Vec<serde_json::Value>>,
    #[serde(default)]
    rhs: RhsWire,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
enum RhsWire {
    #[default]
    Zero,
    Boundary,
    Seq,
}

fn coeff_to_json(c: &Rational) -> serde_json::Value {
    if c.is_integer() {
        if let Ok(v) = i64::try_from(c.numer().clone()) {
            return serde_json::Value::from(v);
        }
    }
    serde_json::Value::String(format_rational(c))
}

fn json_to_coeff(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::Number(n) => {
            n.as_i64().map(int).ok_or_else(|| Error::Parse(format!("non-integer coefficient {n}")))
        }
        serde_json::Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("bad coefficient {other}"))),
    }
}

impl Serialize for Recurrence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RecurrenceWire {
            order: self.order(),
            coeffs: self.coeffs.iter().map(|p| p.coeffs().iter().map(coeff_to_json).collect()).collect(),
            rhs: match self.rhs {
                RhsKind::Zero => RhsWire::Zero,
                RhsKind::Boundary => RhsWire::Boundary,
                RhsKind::Seq => RhsWire::Seq,
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Recurrence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = RecurrenceWire::deserialize(d)?;
        if w.coeffs.len() != w.order + 1 {
            return Err(D::Error::custom(format!(
                "order {} needs {} coefficient lists, got {}",
                w.order,
                w.order + 1,
                w.coeffs.len()
            )));
        }
        let coeffs = w
            .coeffs
            .iter()
            .map(|p| p.iter().map(json_to_coeff).collect::<Result<Vec<_>>>().map(PolyQ::new))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let rhs = match w.rhs {
            RhsWire::Zero => RhsKind::Zero,
            RhsWire::Boundary => RhsKind::Boundary,
            RhsWire::Seq => RhsKind::Seq,
        };
        Recurrence::with_rhs(coeffs, rhs).map_err(D::Error::custom)
    }
}

/// The forward form of the classical recurrence behind Apéry's
/// approximations to ζ(3):
/// `(n+2)^3 X(n+2) - (2n+3)(17n^2+51n+39) X(n+1) + (n+1)^3 X(n) = 0`.
pub fn zeta3_recurrence() -> Recurrence {
    let p0 = PolyQ::from_i64s(&[1, 1]).pow(3);
    let p1 = -(&PolyQ::from_i64s(&[3, 2]) * &PolyQ::from_i64s(&[39, 51, 17]));
    let p2 = PolyQ::from_i64s(&[2, 1]).pow(3);
    Recurrence::new(vec![p0, p1, p2]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;

    #[test]
    fn normalization_is_canonical() {
        // 2(n+1) * [ X(n+1) - 2X(n) ] with rational scaling
        let f = PolyQ::from_i64s(&[1, 1]).scale(&rat(-2, 3));
        let r = Recurrence::new(vec![f.scale(&int(-2)), f.clone()]).unwrap();
        let n = r.normalized();
        assert_eq!(n, Recurrence::from_i64s(&[&[-2], &[1]]).unwrap());
        assert_eq!(n.normalized(), n);
    }

    #[test]
    fn json_round_trip() {
        let r = zeta3_recurrence();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with(r#"{"order":2,"coeffs":[[1,3,3,1],"#));
        let back: Recurrence = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        let bad = serde_json::from_str::<Recurrence>(r#"{"order": 2, "coeffs": [[1]], "rhs": "zero"}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn apply_matches_hand_computation() {
        let r = Recurrence::from_i64s(&[&[-2], &[1]]).unwrap();
        let seq = [1, 2, 4, 9].map(int);
        assert_eq!(r.apply(&seq, 2), Some(int(1)));
        assert_eq!(r.apply(&seq, 3), None);
    }

    #[test]
    fn zero_leading_coefficient_rejected() {
        assert!(Recurrence::new(vec![PolyQ::one(), PolyQ::zero()]).is_err());
    }
}
