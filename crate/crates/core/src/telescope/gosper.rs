//! Gosper's algorithm: indefinite summation of hypergeometric terms.
//!
//! Conventions: the term ratio is brought to the form
//! `t(k+1)/t(k) = a(k)/b(k) * c(k+1)/c(k)` with `gcd(a(k), b(k+h)) = 1` for
//! every integer `h >= 0`. An antidifference exists iff the polynomial
//! equation `a(k) x(k+1) - b(k-1) x(k) = c(k)` has a polynomial solution,
//! and then `z(k) = b(k-1) x(k) / c(k) * t(k)` satisfies `z(k+1) - z(k) = t(k)`.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::linalg::nullspace;
use crate::exact::{Field, Poly, RationalFunction, Ring};
use crate::PolyQ;

/// Scalars that can report being a small non-negative integer constant.
pub trait IntegerProbe {
    fn as_nonneg_integer(&self) -> Option<usize>;
}

impl IntegerProbe for BigRational {
    fn as_nonneg_integer(&self) -> Option<usize> {
        (self.is_integer() && !self.is_negative()).then(|| self.to_integer().to_usize()).flatten()
    }
}

impl IntegerProbe for RationalFunction {
    fn as_nonneg_integer(&self) -> Option<usize> {
        self.as_constant()?.as_nonneg_integer()
    }
}

fn deg<T: Field>(p: &Poly<T>) -> i64 {
    p.degree().map_or(-1, |d| d as i64)
}

/// Upper bound on the degree of a polynomial solution `x` of
/// `a(k) x(k+1) - b1(k) x(k) = c(k)` where `b1(k) = b(k-1)` and `deg c = deg_c`.
/// `None` when no polynomial solution can exist.
pub fn degree_bound<T: Field + IntegerProbe>(a: &Poly<T>, b1: &Poly<T>, deg_c: i64) -> Option<usize> {
    // a x(k+1) - b1 x(k) = (a-b1)(x(k+1)+x(k))/2 + (a+b1)(x(k+1)-x(k))/2
    let s = a - b1;
    let u = a + b1;
    let (ds, du) = (deg(&s), deg(&u));
    let mut best: i64 = -1;
    if ds >= du {
        best = deg_c - ds;
    } else {
        best = best.max(deg_c - du + 1);
        if ds == du - 1 && !s.is_zero() {
            let ratio = T::from_i64(-2) * s.leading().unwrap().clone() / u.leading().unwrap().clone();
            if let Some(d0) = ratio.as_nonneg_integer() {
                best = best.max(d0 as i64);
            }
        }
    }
    (best >= 0).then_some(best as usize)
}

/// One solution of the parametric Gosper equation
/// `a(k) x(k+1) - b1(k) x(k) = sum_i params[i] * rhs[i](k)`.
#[derive(Clone, Debug)]
pub struct GosperSolution<T> {
    pub params: Vec<T>,
    pub x: Poly<T>,
}

/// Coefficient matrix of the parametric Gosper equation: columns for the
/// `degree + 1` ansatz coefficients of `x`, then one per right-hand side.
pub fn gosper_system<T: Ring>(a: &Poly<T>, b1: &Poly<T>, rhs: &[Poly<T>], degree: Option<usize>) -> Vec<Vec<T>> {
    let xcols = degree.map_or(0, |d| d + 1);
    let mut columns: Vec<Poly<T>> = Vec::with_capacity(xcols + rhs.len());
    let kp1 = Poly::linear(T::one(), T::one());
    let mut pow_k = Poly::<T>::one();
    let mut pow_kp1 = Poly::<T>::one();
    for _ in 0..xcols {
        columns.push(&(a * &pow_kp1) - &(b1 * &pow_k));
        pow_k = &pow_k * &Poly::x();
        pow_kp1 = &pow_kp1 * &kp1;
    }
    for r in rhs {
        columns.push(-r);
    }
    // an all-zero system still needs one row to carry the column count
    let nrows = columns.iter().map(|c| c.coeffs().len()).max().unwrap_or(0).max(1);
    (0..nrows).map(|i| columns.iter().map(|c| c.coeff(i)).collect()).collect()
}

/// Split nullspace vectors into ansatz and parameter parts.
pub fn split_solutions<T: Ring>(basis: Vec<Vec<T>>, degree: Option<usize>) -> Vec<GosperSolution<T>> {
    let xcols = degree.map_or(0, |d| d + 1);
    basis
        .into_iter()
        .map(|v| GosperSolution { x: Poly::new(v[..xcols].to_vec()), params: v[xcols..].to_vec() })
        .collect()
}

/// Nullspace basis of the parametric Gosper equation with `x` of degree at
/// most `degree` (no `x` columns when `degree` is `None`).
pub fn solve_parametric<T: Field>(
    a: &Poly<T>,
    b1: &Poly<T>,
    rhs: &[Poly<T>],
    degree: Option<usize>,
) -> Vec<GosperSolution<T>> {
    let rows = gosper_system(a, b1, rhs, degree);
    let ncols = rows[0].len();
    split_solutions(nullspace(&rows, ncols), degree)
}

/// Gosper normal form for a univariate rational ratio: returns `(a, b, c)`.
pub fn normal_form(ratio: &RationalFunction) -> (PolyQ, PolyQ, PolyQ) {
    let mut a = ratio.num().clone();
    let mut b = ratio.den().clone();
    let mut c = PolyQ::one();
    let bound = (root_bound(&a) + root_bound(&b)).ceil() as i64;
    for h in 0..=bound.max(0) {
        loop {
            let g = a.gcd(&b.shift_by(h));
            if g.is_constant() {
                break;
            }
            a = a.exact_div(&g).unwrap();
            b = b.exact_div(&g.shift_by(-h)).unwrap();
            for i in 1..=h {
                c = &c * &g.shift_by(-i);
            }
        }
    }
    (a, b, c)
}

/// Cauchy bound on the absolute value of the roots.
fn root_bound(p: &PolyQ) -> f64 {
    let Some(lc) = p.leading() else { return 0.0 };
    if p.is_constant() {
        return 0.0;
    }
    let lc = lc.abs();
    let m = p.coeffs()[..p.coeffs().len() - 1]
        .iter()
        .map(|c| (c.abs() / &lc).to_f64().unwrap_or(f64::MAX))
        .fold(0.0, f64::max);
    1.0 + m
}

/// Given `t(k+1)/t(k)`, return `S(k)` with `z(k) = S(k) t(k)` an
/// antidifference (`z(k+1) - z(k) = t(k)`), or `None` if `t` is not
/// Gosper-summable.
pub fn gosper(ratio: &RationalFunction) -> Result<Option<RationalFunction>> {
    if ratio.is_zero() {
        return Err(Error::InvalidArgument("term ratio must be a nonzero rational function".into()));
    }
    let (a, b, c) = normal_form(ratio);
    let b1 = b.shift_by(-1);
    let Some(d) = degree_bound(&a, &b1, deg(&c)) else {
        return Ok(None);
    };
    let sols = solve_parametric(&a, &b1, std::slice::from_ref(&c), Some(d));
    // the parameter must be nonzero; scale it to 1
    let Some(sol) = sols.into_iter().find(|s| !s.params[0].is_zero()) else {
        return Ok(None);
    };
    let x = sol.x.scale(&sol.params[0].inv());
    Ok(Some(RationalFunction::new(&b1 * &x, c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::int;

    fn p(cs: &[i64]) -> PolyQ {
        PolyQ::from_i64s(cs)
    }

    fn check_identity(ratio: &RationalFunction, s: &RationalFunction) {
        // S(k+1) ratio(k) - S(k) = 1
        let lhs = s.shift(&int(1)) * ratio.clone() - s.clone();
        assert_eq!(lhs, RationalFunction::from_poly(PolyQ::one()));
    }

    #[test]
    fn k_times_factorial() {
        let ratio = RationalFunction::new(p(&[1, 2, 1]), p(&[0, 1]));
        let s = gosper(&ratio).unwrap().expect("summable");
        assert_eq!(s, RationalFunction::new(p(&[1]), p(&[0, 1])));
        check_identity(&ratio, &s);
    }

    #[test]
    fn triangular_numbers() {
        let ratio = RationalFunction::new(p(&[1, 1]), p(&[0, 1]));
        let s = gosper(&ratio).unwrap().expect("summable");
        assert_eq!(s, RationalFunction::from_poly(p(&[-1, 1]).scale(&crate::exact::rational::rat(1, 2))));
        check_identity(&ratio, &s);
    }

    #[test]
    fn harmonic_is_not_summable() {
        let ratio = RationalFunction::new(p(&[0, 1]), p(&[1, 1]));
        assert_eq!(gosper(&ratio).unwrap(), None);
    }

    #[test]
    fn geometric_and_binomial_ratios() {
        // 2^k: antidifference 2^k
        let r = RationalFunction::constant(int(2));
        let s = gosper(&r).unwrap().unwrap();
        check_identity(&r, &s);
        // C(n,k) at fixed n=5 is not Gosper-summable
        let r = RationalFunction::new(p(&[5, -1]), p(&[1, 1]));
        assert_eq!(gosper(&r).unwrap(), None);
        // (-1)^k C(4,k) is: ratio -(4-k)/(k+1)
        let r = RationalFunction::new(p(&[-4, 1]), p(&[1, 1]));
        let s = gosper(&r).unwrap().unwrap();
        check_identity(&r, &s);
    }

    #[test]
    fn zero_ratio_is_rejected() {
        assert!(gosper(&RationalFunction::zero()).is_err());
    }
}
