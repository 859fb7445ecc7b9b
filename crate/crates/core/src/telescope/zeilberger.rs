//! Zeilberger's creative telescoping for proper hypergeometric terms.
//!
//! For order `L` every shift `F(n+i,k)` is written as `H(n,k) Q_i(n,k)` with
//! a common hypergeometric base `H` and polynomials `Q_i`. The parametric
//! Gosper equation is then solved, fraction-free over `Q[n]`, for the unknown coefficients
//! `p_0..p_L` together with the polynomial ansatz.

use std::fmt;

use num_traits::{One, Zero};

use super::gosper::{degree_bound, gosper_system, split_solutions};
use super::recurrence::Recurrence;
use crate::error::{Error, Result};
use crate::exact::rational::int;
use crate::exact::linalg::nullspace_fraction_free;
use crate::exact::Poly;
use crate::hyperterm::{eval_bipoly, Factorial, ProperTerm, TermValue};
use crate::{BiPolyQ, PolyQ, Rational, RationalFunction};

type PolyRf = Poly<RationalFunction>;

/// Default upper limit on the order search.
pub const DEFAULT_MAX_ORDER: usize = 6;

/// `G(n,k) = num(n,k) / den(n,k) * H(n,k)` where `F(n,k) = q0(n,k) H(n,k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    base: ProperTerm,
    q0: BiPolyQ,
    num: BiPolyQ,
    den: BiPolyQ,
}

impl Certificate {
    /// `R = G/F` as a `(numerator, denominator)` pair of bivariate polynomials.
    pub fn ratio(&self) -> (BiPolyQ, BiPolyQ) {
        (self.num.clone(), &self.den * &self.q0)
    }

    /// `G(n,k)`, or `None` at a pole or where the base term is undefined.
    pub fn eval(&self, n: i64, k: i64) -> Option<Rational> {
        let d = eval_bipoly(&self.den, &int(n), &int(k));
        if d.is_zero() {
            return None;
        }
        match self.base.value(n, k).ok()? {
            TermValue::ZeroBySupport => Some(Rational::zero()),
            TermValue::Value(h) => Some(eval_bipoly(&self.num, &int(n), &int(k)) / d * h),
        }
    }

    /// `R(n,k)` at a point, `None` at a pole.
    pub fn ratio_at(&self, n: i64, k: i64) -> Option<Rational> {
        let (num, den) = self.ratio();
        let d = eval_bipoly(&den, &int(n), &int(k));
        (!d.is_zero()).then(|| eval_bipoly(&num, &int(n), &int(k)) / d)
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (num, den) = self.ratio();
        write!(f, "R(n,k) = ({}) / ({})", num.in_var("k"), den.in_var("k"))
    }
}

/// A linear form `n_c * n + k_c * k + c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Lin {
    n: i64,
    k: i64,
    c: i64,
}

impl Lin {
    fn to_bipoly(self) -> BiPolyQ {
        Poly::new(vec![PolyQ::linear(int(self.n), int(self.c)), PolyQ::constant(int(self.k))])
    }
}

fn product(fs: &[Lin]) -> BiPolyQ {
    fs.iter().fold(BiPolyQ::one(), |acc, f| &acc * &f.to_bipoly())
}

fn to_rf(p: &BiPolyQ) -> PolyRf {
    p.map(|c| RationalFunction::from_poly(c.clone()))
}

/// Clear the `Q(n)` denominators of a polynomial in `k`; returns the
/// polynomial and the monic multiplier used.
fn clear_denominators(p: &PolyRf) -> (BiPolyQ, PolyQ) {
    let mut l = PolyQ::one();
    for c in p.coeffs() {
        let g = l.gcd(c.den());
        l = (&l * c.den()).exact_div(&g).unwrap();
    }
    let cleared = p.map(|c| (c.num() * &l).exact_div(c.den()).unwrap());
    (cleared, l)
}

/// If `f(k) = lambda * g(k+h)` for an integer `h >= 0`, return `(lambda, h)`.
fn shift_match(f: Lin, g: Lin) -> Option<(Rational, i64)> {
    if f.k == 0 || g.k == 0 || f.n * g.k != f.k * g.n {
        return None;
    }
    let num = f.c * g.k - f.k * g.c;
    let den = f.k * g.k;
    (num % den == 0 && num / den >= 0).then(|| (Rational::new(f.k.into(), g.k.into()), num / den))
}

struct Setup {
    base: ProperTerm,
    q: Vec<BiPolyQ>,
    a: BiPolyQ,
    b: BiPolyQ,
    c: BiPolyQ,
}

fn setup(term: &ProperTerm, order: usize) -> Setup {
    let l = order as i64;
    let mut base_num = Vec::new();
    let mut base_den = Vec::new();
    let mut q_factors: Vec<Vec<Lin>> = vec![Vec::new(); order + 1];
    for f in &term.num {
        let c0 = f.offset + (f.n_coeff * l).min(0);
        base_num.push(Factorial::new(f.n_coeff, f.k_coeff, c0));
        for (i, qf) in q_factors.iter_mut().enumerate() {
            let d = f.n_coeff * i as i64 + f.offset - c0;
            qf.extend((1..=d).map(|j| Lin { n: f.n_coeff, k: f.k_coeff, c: c0 + j }));
        }
    }
    for f in &term.den {
        let w0 = f.offset + (f.n_coeff * l).max(0);
        base_den.push(Factorial::new(f.n_coeff, f.k_coeff, w0));
        for (i, qf) in q_factors.iter_mut().enumerate() {
            let d = w0 - f.n_coeff * i as i64 - f.offset;
            qf.extend((0..d).map(|j| Lin { n: f.n_coeff, k: f.k_coeff, c: w0 - j }));
        }
    }
    let q = q_factors
        .iter()
        .enumerate()
        .map(|(i, fs)| &term.poly.map(|c| c.shift_by(i as i64)) * &product(fs))
        .collect();

    // H(n,k+1)/H(n,k) as x * prod(top) / prod(bottom)
    let mut top = Vec::new();
    let mut bottom = Vec::new();
    for f in &base_num {
        let (n, k, c) = (f.n_coeff, f.k_coeff, f.offset);
        if k > 0 {
            top.extend((1..=k).map(|j| Lin { n, k, c: c + j }));
        } else {
            bottom.extend((0..-k).map(|j| Lin { n, k, c: c - j }));
        }
    }
    for f in &base_den {
        let (n, k, c) = (f.n_coeff, f.k_coeff, f.offset);
        if k > 0 {
            bottom.extend((1..=k).map(|j| Lin { n, k, c: c + j }));
        } else {
            top.extend((0..-k).map(|j| Lin { n, k, c: c - j }));
        }
    }

    // Gosper normal form, removing the smallest shift first
    let mut lambda = term.x.clone();
    let mut c_factors = Vec::new();
    loop {
        let best = top
            .iter()
            .enumerate()
            .flat_map(|(i, &f)| bottom.iter().enumerate().filter_map(move |(j, &g)| Some((i, j, shift_match(f, g)?))))
            .min_by_key(|(_, _, (_, h))| *h);
        let Some((i, j, (lam, h))) = best else { break };
        let g = bottom.remove(j);
        top.remove(i);
        lambda *= lam;
        c_factors.extend((0..h).map(|s| Lin { c: g.c + g.k * s, ..g }));
    }
    let a = product(&top).scale(&PolyQ::constant(lambda));
    Setup {
        base: ProperTerm { poly: BiPolyQ::one(), num: base_num, den: base_den, x: term.x.clone() },
        q,
        a,
        b: product(&bottom),
        c: product(&c_factors),
    }
}

/// Try a fixed order; `None` if no recurrence of that order exists.
fn try_order(term: &ProperTerm, order: usize) -> Result<Option<(Recurrence, Certificate)>> {
    let s = setup(term, order);
    let b1 = s.b.shift_by(-1);
    let rhs: Vec<BiPolyQ> = s.q.iter().map(|q| &s.c * q).collect();
    let deg_c = rhs.iter().filter_map(|r| r.degree()).max().map_or(-1, |d| d as i64);
    let degree = degree_bound(&to_rf(&s.a), &to_rf(&b1), deg_c);
    // entries are polynomials in n, so eliminate over Q[n] without fractions
    let rows = gosper_system(&s.a, &b1, &rhs, degree);
    let ncols = rows[0].len();
    let sols = split_solutions(nullspace_fraction_free(&rows, ncols), degree);
    let mut sols = sols.into_iter().map(|v| super::gosper::GosperSolution {
        params: v.params.into_iter().map(RationalFunction::from_poly).collect(),
        x: to_rf(&v.x),
    });
    let Some(sol) = sols.find(|v| v.params.iter().any(|p| !p.is_zero())) else {
        return Ok(None);
    };
    if sol.params[order].is_zero() {
        // a lower-order relation in disguise; the search at lower order missed it
        return Ok(None);
    }

    let (raw, _) = clear_denominators(&Poly::new(sol.params.clone()).map(|p| p.clone()));
    let raw_coeffs: Vec<PolyQ> = (0..=order).map(|i| raw.coeff(i)).collect();
    let rec = Recurrence::new(raw_coeffs)?.normalized();
    // scale relating the normalized coefficients to the raw solution
    let scale = RationalFunction::from_poly(rec.leading().clone()) / sol.params[order].clone();
    let x = sol.x.map(|c| c.clone() * scale.clone());
    let (x_cleared, dn) = clear_denominators(&x);
    let cert = Certificate {
        base: s.base,
        q0: s.q[0].clone(),
        num: &s.b.shift_by(-1) * &x_cleared,
        den: &s.c * &BiPolyQ::constant(dn),
    };
    Ok(Some((rec, cert)))
}

/// Minimal-order recurrence `sum_i p_i(n) F(n+i,k) = G(n,k+1) - G(n,k)`.
pub fn zeilberger(term: &ProperTerm, max_order: usize) -> Result<(Recurrence, Certificate)> {
    if max_order == 0 {
        return Err(Error::InvalidArgument("max_order must be at least 1".into()));
    }
    for order in 1..=max_order {
        if let Some(found) = try_order(term, order)? {
            return Ok(found);
        }
    }
    Err(Error::OrderExceeded(max_order))
}

/// Exact check of the telescoping identity for `0 <= n <= n_max`,
/// `0 <= k <= n + L`. Points where either side is undefined are skipped;
/// skipping more than a tenth of the lattice is an error.
pub fn check_certificate(term: &ProperTerm, rec: &Recurrence, cert: &Certificate, n_max: i64) -> Result<bool> {
    let order = rec.order() as i64;
    let (mut skipped, mut total) = (0usize, 0usize);
    let mut ok = true;
    for n in 0..=n_max {
        let p: Vec<Rational> = (0..=rec.order()).map(|i| rec.coeff_at(i, n)).collect();
        for k in 0..=n + order {
            total += 1;
            let lhs = (0..=order).try_fold(Rational::zero(), |acc, i| {
                term.value(n + i, k).ok().map(|v| acc + &p[i as usize] * v.to_rational())
            });
            let rhs = cert.eval(n, k + 1).zip(cert.eval(n, k)).map(|(g1, g0)| g1 - g0);
            match lhs.zip(rhs) {
                Some((l, r)) => ok &= l == r,
                None => skipped += 1,
            }
        }
    }
    if skipped * 10 > total {
        return Err(Error::Inconclusive { skipped, total });
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn franel(s: u32) -> ProperTerm {
        ProperTerm::franel(s, int(1))
    }

    fn annihilates(term: &ProperTerm, rec: &Recurrence, n_max: i64) -> bool {
        let seq: Vec<Rational> = (0..=n_max + rec.order() as i64).map(|n| term.row_sum(n).unwrap()).collect();
        (0..=n_max).all(|n| rec.apply(&seq, n).unwrap().is_zero())
    }

    #[test]
    fn franel_one_and_two() {
        let (r1, c1) = zeilberger(&franel(1), 6).unwrap();
        assert_eq!(r1, Recurrence::from_i64s(&[&[-2], &[1]]).unwrap());
        assert!(check_certificate(&franel(1), &r1, &c1, 20).unwrap());
        let (r2, c2) = zeilberger(&franel(2), 6).unwrap();
        assert_eq!(r2, Recurrence::from_i64s(&[&[-2, -4], &[1, 1]]).unwrap());
        assert!(check_certificate(&franel(2), &r2, &c2, 20).unwrap());
    }

    #[test]
    fn franel_three() {
        let (r, c) = zeilberger(&franel(3), 6).unwrap();
        let expected = Recurrence::from_i64s(&[&[-8, -16, -8], &[-16, -21, -7], &[4, 4, 1]]).unwrap();
        assert_eq!(r, expected);
        assert!(check_certificate(&franel(3), &r, &c, 20).unwrap());
        assert!(annihilates(&franel(3), &r, 30));
    }

    #[test]
    fn corrupted_coefficient_fails() {
        let (r, c) = zeilberger(&franel(3), 6).unwrap();
        let mut cs = r.coeffs().to_vec();
        cs[1] = &cs[1] + &PolyQ::one();
        let bad = Recurrence::new(cs).unwrap();
        assert!(!check_certificate(&franel(3), &bad, &c, 20).unwrap());
    }

    #[test]
    fn weighted_and_polynomial_terms() {
        // sum C(n,k) 2^k = 3^n
        let t = ProperTerm::franel(1, int(2));
        let (r, c) = zeilberger(&t, 3).unwrap();
        assert_eq!(r, Recurrence::from_i64s(&[&[-3], &[1]]).unwrap());
        assert!(check_certificate(&t, &r, &c, 15).unwrap());
        // sum k C(n,k) = n 2^(n-1)
        let t = ProperTerm { poly: Poly::new(vec![PolyQ::zero(), PolyQ::one()]), ..franel(1) };
        let (r, c) = zeilberger(&t, 3).unwrap();
        assert!(check_certificate(&t, &r, &c, 15).unwrap());
        assert!(annihilates(&t, &r, 20));
    }

    #[test]
    fn apery_zeta3_summand() {
        // C(n,k)^2 C(n+k,k)^2 = (n+k)!^2 / (k!^4 (n-k)!^2)
        let t = ProperTerm::new(
            BiPolyQ::one(),
            vec![Factorial::new(1, 1, 0); 2],
            [Factorial::new(0, 1, 0); 4].into_iter().chain([Factorial::new(1, -1, 0); 2]).collect(),
            int(1),
        )
        .unwrap();
        let (r, c) = zeilberger(&t, 3).unwrap();
        assert_eq!(r, super::super::recurrence::zeta3_recurrence());
        assert!(check_certificate(&t, &r, &c, 12).unwrap());
    }

    #[test]
    fn order_limit_is_reported() {
        assert!(matches!(zeilberger(&franel(3), 1), Err(Error::OrderExceeded(1))));
    }
}
