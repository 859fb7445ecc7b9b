//! Proper hypergeometric terms
//!
//! ```text
//! F(n,k) = P(n,k) * prod (a_i n + b_i k + c_i)! / prod (u_j n + v_j k + w_j)! * x^k
//! ```
//!
//! together with exact evaluation at lattice points and the t-transform, in
//! which each factorial `(a n + b k + c)!` becomes the rising factorial
//! `(b t + 1)_{a n + b k + c}` and `P(n,k)` becomes `P(n, k + t)`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{self, factorial, format_rational, lcm_upto, parse_rational, reduce_smooth};
use crate::exact::Ring;
use crate::{BiPolyQ, Jet, JetQ, PolyQ, Rational};

/// One factorial `(n_coeff * n + k_coeff * k + offset)!`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Factorial {
    pub n_coeff: i64,
    pub k_coeff: i64,
    pub offset: i64,
}

impl Factorial {
    pub const fn new(n_coeff: i64, k_coeff: i64, offset: i64) -> Self {
        Factorial { n_coeff, k_coeff, offset }
    }

    pub fn arg(&self, n: i64, k: i64) -> i64 {
        self.n_coeff * n + self.k_coeff * k + self.offset
    }
}

/// A proper hypergeometric term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProperTerm {
    /// `P(n,k)` as a polynomial in `k` with coefficients in `Q[n]`.
    pub poly: BiPolyQ,
    pub num: Vec<Factorial>,
    pub den: Vec<Factorial>,
    /// Geometric weight, never zero.
    pub x: Rational,
}

/// The value of a term at a lattice point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermValue {
    Value(Rational),
    /// A denominator factorial has a negative argument.
    ZeroBySupport,
}

impl TermValue {
    pub fn to_rational(&self) -> Rational {
        match self {
            TermValue::Value(v) => v.clone(),
            TermValue::ZeroBySupport => Rational::zero(),
        }
    }
}

/// Evaluate a bivariate polynomial at `(n, k)`.
pub fn eval_bipoly(p: &BiPolyQ, n: &Rational, k: &Rational) -> Rational {
    p.map(|c| c.eval(n)).eval(k)
}

fn pow_signed(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

impl ProperTerm {
    pub fn new(poly: BiPolyQ, num: Vec<Factorial>, den: Vec<Factorial>, x: Rational) -> Result<Self> {
        if x.is_zero() {
            return Err(Error::InvalidArgument("geometric weight x must be nonzero".into()));
        }
        Ok(ProperTerm { poly, num, den, x })
    }

    /// `C(n,k)^s * x^k`.
    pub fn franel(s: u32, x: Rational) -> Self {
        ProperTerm {
            poly: BiPolyQ::one(),
            num: vec![Factorial::new(1, 0, 0); s as usize],
            den: [Factorial::new(0, 1, 0), Factorial::new(1, -1, 0)]
                .iter()
                .flat_map(|f| std::iter::repeat_n(*f, s as usize))
                .collect(),
            x,
        }
    }

    /// Same factorials and weight, polynomial part multiplied by `c`.
    pub fn scaled(&self, c: &Rational) -> Self {
        ProperTerm { poly: self.poly.scale(&PolyQ::constant(c.clone())), ..self.clone() }
    }

    fn p_at(&self, n: i64, k: i64) -> Rational {
        eval_bipoly(&self.poly, &rational::int(n), &rational::int(k))
    }

    /// Exact value, distinguishing the zero-by-support convention.
    pub fn value(&self, n: i64, k: i64) -> Result<TermValue> {
        if self.den.iter().any(|f| f.arg(n, k) < 0) {
            return Ok(TermValue::ZeroBySupport);
        }
        if let Some(f) = self.num.iter().find(|f| f.arg(n, k) < 0) {
            return Err(Error::UndefinedTerm(format!(
                "numerator factorial argument {} is negative at (n={n}, k={k})",
                f.arg(n, k)
            )));
        }
        let mut numer = BigInt::one();
        for f in &self.num {
            numer *= factorial(f.arg(n, k) as u64);
        }
        let mut denom = BigInt::one();
        for f in &self.den {
            denom *= factorial(f.arg(n, k) as u64);
        }
        let v = self.p_at(n, k) * BigRational::new(numer, denom) * pow_signed(&self.x, k);
        Ok(TermValue::Value(v))
    }

    /// Exact value with zero-by-support mapped to 0.
    pub fn eval(&self, n: i64, k: i64) -> Result<Rational> {
        if n < 0 {
            return Err(Error::InvalidArgument(format!("term evaluated at negative n={n}")));
        }
        Ok(self.value(n, k)?.to_rational())
    }

    /// `P(n, k + t)` as a jet.
    fn poly_jet(&self, n: i64, k: i64, order: usize) -> JetQ {
        let in_k = self.poly.map(|c| c.eval(&rational::int(n)));
        let shifted = in_k.shift_by(k);
        Jet::from_coeffs(shifted.coeffs().iter().take(order + 1).cloned().collect(), order)
    }

    /// The t-transformed summand at `(n, k)` to order `order`.
    pub fn zs_eval(&self, n: i64, k: i64, order: usize) -> Result<JetQ> {
        self.zs_eval_with(n, k, order, &mut |b, m| Ok(Jet::rising_segment(b, 0, m, order)))
    }

    fn zs_eval_with(
        &self,
        n: i64,
        k: i64,
        order: usize,
        poch: &mut impl FnMut(i64, usize) -> Result<JetQ>,
    ) -> Result<JetQ> {
        let length = |f: &Factorial| {
            let m = f.arg(n, k);
            if m < 0 {
                return Err(Error::UndefinedTerm(format!(
                    "rising factorial of negative length {m} at (n={n}, k={k})"
                )));
            }
            Ok(m as usize)
        };
        let mut numer = self.poly_jet(n, k, order);
        for f in &self.num {
            numer = &numer * &poch(f.k_coeff, length(f)?)?;
        }
        let mut denom = JetQ::one(order);
        for f in &self.den {
            denom = &denom * &poch(f.k_coeff, length(f)?)?;
        }
        let weight = pow_signed(&self.x, k);
        Ok(numer.try_div(&denom)?.scale(&weight))
    }

    /// Transformed row sums for `n = 0..=n_max`, sharing the rising
    /// factorials between rows.
    pub fn row_sum_jets(&self, n_max: i64, order: usize) -> Result<Vec<JetQ>> {
        let mut cache: HashMap<i64, Vec<JetQ>> = HashMap::new();
        let mut poch = |b: i64, m: usize| -> Result<JetQ> {
            let v = cache.entry(b).or_insert_with(|| vec![JetQ::one(order)]);
            while v.len() <= m {
                let j = v.len() as i64;
                let next = &v[v.len() - 1] * &Jet::linear(rational::int(j), rational::int(b), order);
                v.push(next);
            }
            Ok(v[m].clone())
        };
        (0..=n_max)
            .map(|n| {
                (0..=n).try_fold(JetQ::zero(order), |acc, k| Ok(&acc + &self.zs_eval_with(n, k, order, &mut poch)?))
            })
            .collect()
    }

    /// `sum_{k=0..n} F(n,k)`.
    pub fn row_sum(&self, n: i64) -> Result<Rational> {
        if n < 0 {
            return Err(Error::InvalidArgument(format!("row sum at negative n={n}")));
        }
        (0..=n).try_fold(Rational::zero(), |acc, k| Ok(acc + self.eval(n, k)?))
    }

    /// `sum_{k=0..n}` of the t-transformed summand.
    pub fn row_sum_jet(&self, n: i64, order: usize) -> Result<JetQ> {
        if n < 0 {
            return Err(Error::InvalidArgument(format!("row sum at negative n={n}")));
        }
        (0..=n).try_fold(JetQ::zero(order), |acc, k| Ok(&acc + &self.zs_eval(n, k, order)?))
    }

    /// Coefficient of `t^r` in the transformed summand divided by the
    /// untransformed one.
    pub fn coeff_c(&self, r: usize, n: i64, k: i64) -> Result<Rational> {
        let base = self.eval(n, k)?;
        if base.is_zero() {
            return Err(Error::UndefinedCoefficient { n, k });
        }
        Ok(self.zs_eval(n, k, r)?.coeff(r) / base)
    }

    /// The normalized weight jet `zs_eval / eval` computed through harmonic
    /// sums: `log((bt+1)_m / m!) = sum_p (-1)^(p+1) b^p H_m^(p) t^p / p`.
    ///
    /// Only depends on sums `sum_{j<=m} 1/j^p`, so it stays fast for
    /// `n` in the hundreds of thousands. Requires a constant `P`.
    pub fn normalized_jet_harmonic(&self, n: i64, k: i64, order: usize) -> Result<JetQ> {
        if self.poly.degree().is_some_and(|d| d > 0) || self.poly.coeff(0).degree().is_some_and(|d| d > 0) {
            return Err(Error::InvalidArgument("harmonic route needs a constant polynomial part".into()));
        }
        let mut parts: Vec<(i64, i64, i64)> = Vec::new(); // (sign, slope, length)
        for (sign, fs) in [(1, &self.num), (-1, &self.den)] {
            for f in fs.iter() {
                let m = f.arg(n, k);
                if m < 0 {
                    return Err(Error::UndefinedTerm(format!("negative factorial argument {m}")));
                }
                if f.k_coeff != 0 && m > 0 {
                    parts.push((sign, f.k_coeff, m));
                }
            }
        }
        if order == 0 || parts.is_empty() {
            return Ok(JetQ::one(order));
        }
        let max_m = parts.iter().map(|p| p.2).max().unwrap() as u64;
        let mut lengths: Vec<u64> = parts.iter().map(|p| p.2 as u64).collect();
        lengths.sort_unstable();
        lengths.dedup();
        let table = HarmonicTable::new(&lengths, order as u32);
        let coeffs = weight_coefficients(&parts, &table, order, max_m);
        Ok(Jet::new(coeffs))
    }
}

/// Exact `sum_{j<=m} 1/j^p` for a few `m` and all `p <= max_power`, stored
/// as integers over the common denominator `lcm(1..M)^p`.
pub struct HarmonicTable {
    lcm: BigInt,
    /// `numerators[(m_index, p-1)]`
    lengths: Vec<u64>,
    numerators: Vec<Vec<BigInt>>,
}

impl HarmonicTable {
    /// One sweep over `j = 1..max(lengths)`, snapshotting at each requested
    /// length. `lengths` must be sorted.
    pub fn new(lengths: &[u64], max_power: u32) -> Self {
        let max_m = lengths.last().copied().unwrap_or(0);
        let lcm = lcm_upto(max_m);
        let powers: Vec<BigInt> = (1..=max_power).map(|p| num_traits::pow(lcm.clone(), p as usize)).collect();
        let mut acc = vec![BigInt::zero(); max_power as usize];
        let mut numerators = Vec::with_capacity(lengths.len());
        let mut next = 0;
        while next < lengths.len() && lengths[next] == 0 {
            numerators.push(acc.clone());
            next += 1;
        }
        for j in 1..=max_m {
            let bj = BigInt::from(j);
            for (p, lp) in powers.iter().enumerate() {
                let mut term = lp.clone();
                for _ in 0..=p {
                    term /= &bj;
                }
                acc[p] += term;
            }
            while next < lengths.len() && lengths[next] == j {
                numerators.push(acc.clone());
                next += 1;
            }
        }
        HarmonicTable { lcm, lengths: lengths.to_vec(), numerators }
    }

    pub fn lcm(&self) -> &BigInt {
        &self.lcm
    }

    /// Numerator of `H_m^(p)` over `lcm^p`.
    pub fn numerator(&self, m: u64, p: u32) -> &BigInt {
        let i = self.lengths.binary_search(&m).expect("length not in harmonic table");
        &self.numerators[i][p as usize - 1]
    }

    pub fn value(&self, m: u64, p: u32) -> Rational {
        BigRational::new(self.numerator(m, p).clone(), num_traits::pow(self.lcm.clone(), p as usize))
    }
}

/// Coefficients of `exp(sum_p l_p t^p)` where `p * l_p = S_p / L^p`,
/// carried as integers `E_r` with `c_r = E_r / (r! L^r)`.
fn weight_coefficients(parts: &[(i64, i64, i64)], table: &HarmonicTable, order: usize, max_m: u64) -> Vec<Rational> {
    let l = table.lcm().clone();
    // S_p = sum over factors of sign * (-1)^(p+1) * b^p * N_{m,p}
    let s: Vec<BigInt> = (1..=order as u32)
        .map(|p| {
            parts.iter().fold(BigInt::zero(), |acc, &(sign, b, m)| {
                let alt = if p % 2 == 1 { 1 } else { -1 };
                let coeff = BigInt::from(sign * alt) * num_traits::pow(BigInt::from(b), p as usize);
                acc + coeff * table.numerator(m as u64, p)
            })
        })
        .collect();
    let fact: Vec<BigInt> = (0..=order as u64).map(factorial).collect();
    let mut e: Vec<BigInt> = vec![BigInt::one()];
    for r in 1..=order {
        let mut acc = BigInt::zero();
        for p in 1..=r {
            // (r-1)! / (r-p)! is an integer
            let w = &fact[r - 1] / &fact[r - p];
            acc += w * &s[p - 1] * &e[r - p];
        }
        e.push(acc);
    }
    let max_prime = max_m.max(order as u64);
    e.into_iter()
        .enumerate()
        .map(|(r, er)| {
            let den = &fact[r] * num_traits::pow(l.clone(), r);
            reduce_smooth(er, den, max_prime)
        })
        .collect()
}

/// Harmonic-sum form of the second coefficient for `C(n,k)^s`:
/// `(s/2)(H2_k + H2_{n-k}) + (s^2/2)(H_{n-k} - H_k)^2`.
pub fn c2_closed_form(s: u32, n: i64, k: i64) -> Result<Rational> {
    if k < 0 || k > n {
        return Err(Error::InvalidArgument(format!("k={k} outside 0..={n}")));
    }
    let h = |m: i64, p: usize| -> Rational {
        (1..=m).fold(Rational::zero(), |acc, i| acc + num_traits::pow(BigRational::from_integer(i.into()), p).recip())
    };
    let s = Rational::from_i64(s as i64);
    let half = rational::rat(1, 2);
    let d = h(n - k, 1) - h(k, 1);
    Ok(&s * &half * (h(k, 2) + h(n - k, 2)) + &s * &s * &half * &d * &d)
}

// ---- JSON ----

/// Wire form: `{"P": [[c00, c01, ...], ...], "num": [[a,b,c]...], "den": [[u,v,w]...], "x": "p/q"}`
/// with `P[i][j]` the coefficient of `n^i k^j`.
#[derive(Serialize, Deserialize)]
struct TermWire {
    #[serde(rename = "P")]
    p: Vec<Vec<serde_json::Value>>,
    num: Vec<[i64; 3]>,
    den: Vec<[i64; 3]>,
    x: serde_json::Value,
}

fn json_to_rational(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(rational::int)
            .ok_or_else(|| Error::Parse(format!("non-integer number {n} (use \"p/q\")"))),
        other => Err(Error::Parse(format!("expected a rational, got {other}"))),
    }
}

fn rational_to_json(q: &Rational) -> serde_json::Value {
    if q.is_integer() && q.numer().abs() < BigInt::from(1i64 << 53) {
        serde_json::Value::from(i64::try_from(q.numer().clone()).unwrap())
    } else {
        serde_json::Value::String(format_rational(q))
    }
}

impl Serialize for ProperTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let deg_k = self.poly.coeffs().len();
        let deg_n = self.poly.coeffs().iter().map(|c| c.coeffs().len()).max().unwrap_or(0);
        let grid: Vec<Vec<serde_json::Value>> = (0..deg_n)
            .map(|i| (0..deg_k).map(|j| rational_to_json(&self.poly.coeff(j).coeff(i))).collect())
            .collect();
        let wire = TermWire {
            p: grid,
            num: self.num.iter().map(|f| [f.n_coeff, f.k_coeff, f.offset]).collect(),
            den: self.den.iter().map(|f| [f.n_coeff, f.k_coeff, f.offset]).collect(),
            x: serde_json::Value::String(format_rational(&self.x)),
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProperTerm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = TermWire::deserialize(d)?;
        let deg_k = wire.p.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut by_k: Vec<Vec<Rational>> = vec![vec![Rational::zero(); wire.p.len()]; deg_k];
        for (i, row) in wire.p.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                by_k[j][i] = json_to_rational(v).map_err(D::Error::custom)?;
            }
        }
        let poly = BiPolyQ::new(by_k.into_iter().map(PolyQ::new).collect());
        let x = json_to_rational(&wire.x).map_err(D::Error::custom)?;
        let f = |v: &[i64; 3]| Factorial::new(v[0], v[1], v[2]);
        ProperTerm::new(poly, wire.num.iter().map(f).collect(), wire.den.iter().map(f).collect(), x)
            .map_err(D::Error::custom)
    }
}
