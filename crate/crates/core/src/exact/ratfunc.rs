//! Univariate rational functions over the rationals, kept in lowest terms.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::scalar::{Field, Ring};
use crate::PolyQ;

/// `num / den` with `gcd(num, den) = 1` and `den` monic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: PolyQ,
    den: PolyQ,
}

impl RationalFunction {
    pub fn new(num: PolyQ, den: PolyQ) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_constant() {
            (num, den)
        } else {
            (num.exact_div(&g).unwrap(), den.exact_div(&g).unwrap())
        };
        let lc = den.leading().unwrap().clone();
        if !lc.is_one() {
            let inv = lc.inv();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RationalFunction { num, den }
    }

    pub fn from_poly(p: PolyQ) -> Self {
        RationalFunction { num: p, den: PolyQ::one() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(PolyQ::constant(c))
    }

    pub fn num(&self) -> &PolyQ {
        &self.num
    }

    pub fn den(&self) -> &PolyQ {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// The value as a rational constant, if it has no dependence on the variable.
    pub fn as_constant(&self) -> Option<BigRational> {
        (self.num.is_constant() && self.den.is_constant()).then(|| self.num.coeff(0))
    }

    /// Evaluate at a point; `None` at a pole.
    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    /// `f(x + a)`.
    pub fn shift(&self, a: &BigRational) -> Self {
        Self::new(self.num.shift(a), self.den.shift(a))
    }
}

impl Zero for RationalFunction {
    fn zero() -> Self {
        RationalFunction { num: PolyQ::zero(), den: PolyQ::one() }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RationalFunction {
    fn one() -> Self {
        RationalFunction { num: PolyQ::one(), den: PolyQ::one() }
    }
}

impl Add for RationalFunction {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.den == rhs.den {
            return Self::new(&self.num + &rhs.num, self.den);
        }
        Self::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
    }
}

impl Sub for RationalFunction {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for RationalFunction {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        Self::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for RationalFunction {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by the zero rational function");
        Self::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl Neg for RationalFunction {
    type Output = Self;
    fn neg(self) -> Self {
        RationalFunction { num: -self.num, den: self.den }
    }
}

impl Ring for RationalFunction {
    fn from_i64(v: i64) -> Self {
        Self::from_poly(PolyQ::from_i64(v))
    }
}
impl Field for RationalFunction {}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})/({:?})", self.num, self.den)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(cs: &[i64]) -> PolyQ {
        PolyQ::from_i64s(cs)
    }

    #[test]
    fn normalizes_common_factors() {
        // (x^2 - 1)/(2x + 2) = (x - 1)/2 ... with monic denominator: (x/2 - 1/2)/1
        let f = RationalFunction::new(p(&[-1, 0, 1]), p(&[2, 2]));
        assert!(f.is_polynomial());
        assert_eq!(f.eval(&BigRational::from_i64(3)), Some(BigRational::from_i64(1)));
    }

    #[test]
    fn field_identities() {
        let a = RationalFunction::new(p(&[1, 1]), p(&[0, 1]));
        let b = RationalFunction::new(p(&[2]), p(&[-1, 1]));
        let s = a.clone() + b.clone();
        assert_eq!(s.clone() - b.clone(), a);
        assert_eq!((a.clone() * b.clone()) / b.clone(), a);
        assert!((a.clone() - a).is_zero());
    }
}
