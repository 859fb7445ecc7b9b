//! Truncated power series in `t`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::{Field, Ring};
use crate::error::{Error, Result};

/// A power series `c_0 + c_1 t + ... + c_R t^R` known modulo `t^(R+1)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Jet<T> {
    coeffs: Vec<T>,
}

impl<T: Ring> Jet<T> {
    /// Build from coefficients; the order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a jet carries at least the constant coefficient");
        Jet { coeffs }
    }

    /// Pad or truncate `coeffs` to exactly `order + 1` entries.
    pub fn from_coeffs(mut coeffs: Vec<T>, order: usize) -> Self {
        coeffs.resize(order + 1, T::zero());
        Jet { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Jet { coeffs: vec![T::zero(); order + 1] }
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = c;
        j
    }

    pub fn one(order: usize) -> Self {
        Self::constant(T::one(), order)
    }

    /// `a + b t`.
    pub fn linear(a: T, b: T, order: usize) -> Self {
        let mut j = Self::constant(a, order);
        if order >= 1 {
            j.coeffs[1] = b;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Index of the first nonzero coefficient, `None` if the jet vanishes to
    /// its full order.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot raise the order of a jet by truncation");
        Jet { coeffs: self.coeffs[..=order].to_vec() }
    }

    pub fn scale(&self, c: &T) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::InvalidArgument(format!(
                "jet order mismatch: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Jet {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Jet {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect(),
        })
    }

    /// Product truncated at the common order.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let r = self.order();
        let mut out = vec![T::zero(); r + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=r - i].iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Ok(Jet { coeffs: out })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Jet::one(self.order());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// The rising product `(b t + 1 + start)(b t + 2 + start)...` with `len`
    /// factors, i.e. `(bt+1)_{start+len} / (bt+1)_{start}`.
    pub fn rising_segment(b: i64, start: i64, len: usize, order: usize) -> Self {
        let mut acc = Jet::one(order);
        for j in 0..len as i64 {
            let factor = Jet::linear(T::from_i64(1 + start + j), T::from_i64(b), order);
            acc = &acc * &factor;
        }
        acc
    }
}

impl<T: Field> Jet<T> {
    /// Multiplicative inverse modulo `t^(R+1)`.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::NonInvertibleJet);
        }
        let inv0 = c0.inv();
        let r = self.order();
        let mut out: Vec<T> = Vec::with_capacity(r + 1);
        out.push(inv0.clone());
        for m in 1..=r {
            let mut acc = T::zero();
            for i in 1..=m {
                acc = acc + self.coeffs[i].clone() * out[m - i].clone();
            }
            out.push(-(acc * inv0.clone()));
        }
        Ok(Jet { coeffs: out })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.reciprocal()?)
    }

    /// `exp` of a jet with zero constant term.
    pub fn exp_nilpotent(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::InvalidArgument("exp needs a zero constant coefficient".into()));
        }
        // m e_m = sum_{p=1..m} p l_p e_{m-p}
        let r = self.order();
        let mut out: Vec<T> = vec![T::one()];
        for m in 1..=r {
            let mut acc = T::zero();
            for p in 1..=m {
                acc = acc + T::from_i64(p as i64) * self.coeffs[p].clone() * out[m - p].clone();
            }
            out.push(acc / T::from_i64(m as i64));
        }
        Ok(Jet { coeffs: out })
    }
}

/// `(b t + 1)_m` as a jet of the given order. Negative lengths are rejected.
pub fn jet_pochhammer<T: Ring>(b: i64, m: i64, order: usize) -> Result<Jet<T>> {
    if m < 0 {
        return Err(Error::InvalidArgument(format!("negative rising-factorial length {m}")));
    }
    Ok(Jet::rising_segment(b, 0, m as usize, order))
}

macro_rules! jet_op {
    ($tr:ident, $m:ident, $try:ident) => {
        impl<T: Ring> $tr for &Jet<T> {
            type Output = Jet<T>;
            /// Panics on order mismatch; use the `try_` form for fallible input.
            fn $m(self, rhs: &Jet<T>) -> Jet<T> {
                self.$try(rhs).expect("jet order mismatch")
            }
        }
        impl<T: Ring> $tr for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: Jet<T>) -> Jet<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
jet_op!(Add, add, try_add);
jet_op!(Sub, sub, try_sub);
jet_op!(Mul, mul, try_mul);

impl<T: Ring> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        Jet { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }
}

impl<T: fmt::Debug> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet{:?}", self.coeffs)
    }
}

impl<T: Ring + fmt::Display> fmt::Display for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*t")?,
                _ => write!(f, "({c})*t^{i}")?,
            }
        }
        write!(f, " + O(t^{})", self.coeffs.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{JetQ, Rational};
    use num_rational::BigRational;

    fn q(v: i64) -> Rational {
        BigRational::from_i64(v)
    }
    fn qq(a: i64, b: i64) -> Rational {
        BigRational::new(a.into(), b.into())
    }
    fn jet(cs: &[i64]) -> JetQ {
        Jet::new(cs.iter().map(|&c| q(c)).collect())
    }

    #[test]
    fn mul_examples() {
        assert_eq!(jet(&[1, 1, 0]) * jet(&[1, -1, 0]), jet(&[1, 0, -1]));
        assert_eq!(jet(&[1, 1, 0]) * jet(&[1, 0, 0]), jet(&[1, 1, 0]));
        assert_eq!(jet(&[1, 2, 1]) * jet(&[1, 1, 0]), jet(&[1, 3, 3]));
    }

    #[test]
    fn order_mismatch_is_an_error() {
        assert!(matches!(jet(&[1, 1]).try_mul(&jet(&[1, 1, 1])), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn reciprocal_examples() {
        assert_eq!(jet(&[1, -1, 0]).reciprocal().unwrap(), jet(&[1, 1, 1]));
        assert_eq!(jet(&[1, 0, 0, 0]).reciprocal().unwrap(), jet(&[1, 0, 0, 0]));
        let r = jet(&[2, 1, 0]).reciprocal().unwrap();
        assert_eq!(r, Jet::new(vec![qq(1, 2), qq(-1, 4), qq(1, 8)]));
        assert_eq!(jet(&[0, 1]).reciprocal(), Err(Error::NonInvertibleJet));
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(jet_pochhammer::<Rational>(1, 2, 2).unwrap(), jet(&[2, 3, 1]));
        assert_eq!(jet_pochhammer::<Rational>(0, 5, 3).unwrap(), jet(&[120, 0, 0, 0]));
        assert_eq!(jet_pochhammer::<Rational>(-1, 1, 1).unwrap(), jet(&[1, -1]));
        assert!(jet_pochhammer::<Rational>(1, -1, 1).is_err());
    }

    #[test]
    fn valuation_and_exp() {
        assert_eq!(jet(&[0, 0, 3, 1]).valuation(), Some(2));
        assert_eq!(jet(&[0, 0]).valuation(), None);
        // exp(t) = 1 + t + t^2/2 + t^3/6
        let e = jet(&[0, 1, 0, 0]).exp_nilpotent().unwrap();
        assert_eq!(e, Jet::new(vec![q(1), q(1), qq(1, 2), qq(1, 6)]));
    }
}
