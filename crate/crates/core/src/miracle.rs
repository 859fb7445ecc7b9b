//! The divisibility miracle of the t-transform and the Apéry problems it
//! produces for generalized Franel sums `sum_k C(n,k)^s a^k`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::apery::AperyProblem;
use crate::error::{Error, Result};
use crate::exact::rational::{int, rat, serde_rational};
use crate::exact::BigFloat;
use crate::guess::{guess_recurrence, SequencePrefix};
use crate::hyperterm::ProperTerm;
use crate::telescope::{zeilberger, Recurrence, DEFAULT_MAX_ORDER};
use crate::{JetQ, Rational};

/// Rows checked by [`build_problem`] before trusting the A-side recurrence.
pub const BUILD_CHECK_ROWS: i64 = 30;

/// Combine transformed row sums with a recurrence: `sum_i p_i(n) S(n+i; t)`
/// where `sums[j]` holds `S(first + j; t)`.
fn combine(rec: &Recurrence, sums: &[JetQ], first: i64, n: i64) -> Result<JetQ> {
    let order = sums[0].order();
    let mut acc = JetQ::zero(order);
    for i in 0..=rec.order() {
        acc = &acc + &sums[(n - first) as usize + i].scale(&rec.coeff_at(i, n));
    }
    if !acc.coeff(0).is_zero() {
        return Err(Error::RecurrenceMismatch(n));
    }
    Ok(acc)
}

/// Right side `C(n; t) = sum_i p_i(n) rowsum(n+i; t)` of the transformed
/// recurrence, modulo `t^(order+1)`.
pub fn rhs_jet(term: &ProperTerm, rec: &Recurrence, n: i64, order: usize) -> Result<JetQ> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!("negative n={n}")));
    }
    let sums = (0..=rec.order() as i64)
        .map(|i| term.row_sum_jet(n + i, order))
        .collect::<Result<Vec<_>>>()?;
    combine(rec, &sums, n, n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiracleReport {
    pub s: usize,
    #[serde(with = "serde_rational")]
    pub a: Rational,
    pub jet_order: usize,
    pub n_checked: i64,
    pub min_valuation: usize,
    pub expected: usize,
    pub pass: bool,
}

/// Valuation the miracle predicts: `s+1` for odd `s` with weight 1, `s`
/// otherwise.
pub fn expected_valuation(s: usize, a: &Rational) -> usize {
    if s % 2 == 1 && a.is_one() {
        s + 1
    } else {
        s
    }
}

/// Minimum t-adic valuation of the right side over `0 <= n <= n_max`.
/// `s` is read off the term as its number of numerator factorials, which is
/// the power for Franel terms, and `a` as its geometric weight.
pub fn valuation_check(term: &ProperTerm, rec: &Recurrence, n_max: i64, order: usize) -> Result<MiracleReport> {
    let s = term.num.len();
    let expected = expected_valuation(s, &term.x);
    if order < expected + 1 {
        return Err(Error::InvalidArgument(format!(
            "jet order {order} cannot certify valuation {expected}; use at least {}",
            expected + 1
        )));
    }
    let sums = term.row_sum_jets(n_max + rec.order() as i64, order)?;
    let mut min_valuation = order + 1;
    for n in 0..=n_max {
        let jet = combine(rec, &sums, 0, n)?;
        min_valuation = min_valuation.min(jet.valuation().unwrap_or(order + 1));
    }
    Ok(MiracleReport {
        s,
        a: term.x.clone(),
        jet_order: order,
        n_checked: n_max,
        min_valuation,
        expected,
        pass: min_valuation >= expected,
    })
}

/// Location of the summand's maximum along `k = alpha n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alpha {
    /// Bracket with `lo < alpha < hi`, or `lo = hi = alpha` when exact.
    pub lo: Rational,
    pub hi: Rational,
    pub exact: bool,
}

/// `floor(alpha n)`, flagged when rounding cannot be decided safely.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FloorAlpha {
    pub k: i64,
    pub ambiguous: bool,
}

impl Alpha {
    pub fn value(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn to_bigfloat(&self, digits: u32) -> BigFloat {
        BigFloat::from_rational(&self.value(), digits)
    }

    pub fn floor_times(&self, n: i64) -> FloorAlpha {
        let nq = int(n);
        if self.exact {
            return FloorAlpha { k: floor_int(&(&self.lo * &nq)), ambiguous: false };
        }
        let (lo, hi) = (floor_int(&(&self.lo * &nq)), floor_int(&(&self.hi * &nq)));
        let v = self.value() * &nq;
        let near = (&v - v.round()).abs() < rat(1, 1) / Rational::from(BigInt::from(10).pow(20));
        FloorAlpha { k: floor_int(&v), ambiguous: lo != hi || near }
    }
}

fn floor_int(q: &Rational) -> i64 {
    q.floor().to_integer().to_i64().expect("floor fits in i64")
}

/// `|x| prod (a + b alpha)^b / prod (u + v alpha)^v`; the k-ratio limit of
/// the summand along `k = alpha n`.
fn ratio_limit(term: &ProperTerm, alpha: &Rational) -> Rational {
    let mut g = term.x.abs();
    for (sign, fs) in [(1i64, &term.num), (-1, &term.den)] {
        for f in fs.iter() {
            let base = int(f.n_coeff) + int(f.k_coeff) * alpha;
            let e = sign * f.k_coeff;
            if e > 0 {
                g *= num_traits::pow(base, e as usize);
            } else if e < 0 {
                g /= num_traits::pow(base, (-e) as usize);
            }
        }
    }
    g
}

/// Root of the limiting log-ratio in `(0, 1)`, bracketed to `10^-40`, with
/// exact detection of small-denominator rational roots.
pub fn find_alpha(term: &ProperTerm) -> Result<Alpha> {
    let net: i64 = term.num.iter().map(|f| f.k_coeff).sum::<i64>() - term.den.iter().map(|f| f.k_coeff).sum::<i64>();
    if net != 0 {
        return Err(Error::InvalidArgument("summand k-ratio is unbalanced; no interior maximum".into()));
    }
    // the interval where every factorial argument grows linearly in n
    let (mut lo, mut hi) = (int(0), int(1));
    for f in term.num.iter().chain(&term.den) {
        if f.k_coeff == 0 {
            continue;
        }
        let root = rat(-f.n_coeff, f.k_coeff);
        if f.k_coeff > 0 && root > lo {
            lo = root;
        } else if f.k_coeff < 0 && root < hi {
            hi = root;
        }
    }
    if lo >= hi {
        return Err(Error::InvalidArgument("summand has no interior support".into()));
    }
    let eps = Rational::new(BigInt::one(), BigInt::from(10).pow(40));
    let width = &hi - &lo;
    let one = Rational::one();
    let (left, right) = (&lo + &width * &eps, &hi - &width * &eps);
    if ratio_limit(term, &left) <= one || ratio_limit(term, &right) >= one {
        return Err(Error::BoundaryMaximum);
    }
    let (mut a, mut b) = (left, right);
    while &b - &a > eps {
        let mid = (&a + &b) / int(2);
        match ratio_limit(term, &mid).cmp(&one) {
            std::cmp::Ordering::Greater => a = mid,
            std::cmp::Ordering::Less => b = mid,
            std::cmp::Ordering::Equal => return Ok(Alpha { lo: mid.clone(), hi: mid, exact: true }),
        }
    }
    if let Some(q) = small_rational_between(&a, &b, 10_000) {
        if ratio_limit(term, &q) == one {
            return Ok(Alpha { lo: q.clone(), hi: q, exact: true });
        }
    }
    Ok(Alpha { lo: a, hi: b, exact: false })
}

/// The continued-fraction convergent of the midpoint with the largest
/// denominator `<= max_den`, if it lies in `[a, b]`.
fn small_rational_between(a: &Rational, b: &Rational, max_den: u64) -> Option<Rational> {
    let mid = (a + b) / int(2);
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut x = mid;
    let mut best = None;
    for _ in 0..64 {
        let ai = x.floor().to_integer();
        let (p2, q2) = (&ai * &p1 + &p0, &ai * &q1 + &q0);
        if q2 > BigInt::from(max_den) {
            break;
        }
        let c = Rational::new(p2.clone(), q2.clone());
        if &c >= a && &c <= b {
            best = Some(c);
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = &x - Rational::from(ai);
        if frac.is_zero() {
            break;
        }
        x = frac.recip();
    }
    best
}

/// Parameters `(s, r, a)` of a generalized Franel Apéry problem.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpecWire")]
pub struct TheoremOneSpec {
    pub s: u32,
    pub r: u32,
    #[serde(with = "serde_rational")]
    pub a: Rational,
}

#[derive(Deserialize)]
struct SpecWire {
    s: u32,
    r: u32,
    #[serde(with = "serde_rational")]
    a: Rational,
}

impl TryFrom<SpecWire> for TheoremOneSpec {
    type Error = Error;
    fn try_from(w: SpecWire) -> Result<Self> {
        TheoremOneSpec::new(w.s, w.r, w.a)
    }
}

impl TheoremOneSpec {
    /// Requires `s >= 3`, `1 <= r <= s-1` and `a > 0`.
    pub fn new(s: u32, r: u32, a: Rational) -> Result<Self> {
        if s < 3 {
            return Err(Error::InvalidArgument(format!("s = {s} must be at least 3")));
        }
        if r < 1 || r >= s {
            return Err(Error::InvalidArgument(format!("r = {r} must satisfy 1 <= r <= {}", s - 1)));
        }
        Self::experimental(s, r, a)
    }

    /// Any `s >= 1`, `r >= 0`, `a > 0`, outside the proven range. The A-side
    /// recurrence is still checked by [`build_problem`].
    pub fn experimental(s: u32, r: u32, a: Rational) -> Result<Self> {
        if !a.is_positive() {
            return Err(Error::InvalidArgument("a must be positive".into()));
        }
        if s == 0 {
            return Err(Error::InvalidArgument("s must be positive".into()));
        }
        Ok(TheoremOneSpec { s, r, a })
    }

    pub fn term(&self) -> ProperTerm {
        ProperTerm::franel(self.s, self.a.clone())
    }

    pub fn alpha(&self) -> Result<Alpha> {
        find_alpha(&self.term())
    }
}

/// Value of `c_r(n, floor(alpha n))` together with the neighbouring columns
/// when the floor is numerically ambiguous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlowValue {
    pub k: i64,
    pub value: Rational,
    pub neighbours: Vec<(i64, Rational)>,
}

/// The direct, slowly converging limit `c_r(n, floor(alpha n))`.
pub fn slow_oracle(spec: &TheoremOneSpec, n: i64) -> Result<SlowValue> {
    if n < 1 {
        return Err(Error::InvalidArgument("slow oracle needs n >= 1".into()));
    }
    let term = spec.term();
    let fa = spec.alpha()?.floor_times(n);
    let r = spec.r as usize;
    let c = |k: i64| -> Result<Rational> { Ok(term.normalized_jet_harmonic(n, k, r)?.coeff(r)) };
    let neighbours = if fa.ambiguous {
        [fa.k - 1, fa.k + 1].into_iter().filter(|k| (0..=n).contains(k)).map(|k| Ok((k, c(k)?))).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(SlowValue { k: fa.k, value: c(fa.k)?, neighbours })
}

/// Recurrence for the untransformed row sums: telescoping first, then
/// guessing from 60 terms.
pub fn base_recurrence(term: &ProperTerm) -> Result<Recurrence> {
    match zeilberger(term, DEFAULT_MAX_ORDER) {
        Ok((rec, _)) => Ok(rec),
        Err(Error::OrderExceeded(_)) => {
            let seq = SequencePrefix::new((0..60).map(|n| term.row_sum(n)).collect::<Result<_>>()?);
            guess_recurrence(&seq, 4, 8)?.ok_or(Error::OrderExceeded(DEFAULT_MAX_ORDER))
        }
        Err(e) => Err(e),
    }
}

/// Apéry problem for `spec` using a known recurrence for the row sums.
pub fn build_problem_with(spec: &TheoremOneSpec, rec: &Recurrence) -> Result<AperyProblem> {
    let term = spec.term();
    let r = spec.r as usize;
    let l = rec.order();
    let report = valuation_check_at(&term, rec, BUILD_CHECK_ROWS, r)?;
    if report < r + 1 {
        return Err(Error::MiracleViolated { r, found: report });
    }
    let sums = term.row_sum_jets(l as i64, r)?;
    let init_a = sums[..l].iter().map(|j| j.coeff(r)).collect();
    let init_b = sums[..l].iter().map(|j| j.coeff(0)).collect();
    AperyProblem::new(rec.clone(), init_a, init_b, None)
}

/// Minimum valuation at jet order `r`, with no parity expectation attached.
fn valuation_check_at(term: &ProperTerm, rec: &Recurrence, n_max: i64, r: usize) -> Result<usize> {
    let sums = term.row_sum_jets(n_max + rec.order() as i64, r)?;
    let mut min_v = r + 1;
    for n in 0..=n_max {
        min_v = min_v.min(combine(rec, &sums, 0, n)?.valuation().unwrap_or(r + 1));
    }
    Ok(min_v)
}

/// Apéry problem whose ratio converges to `lim c_r(n, floor(alpha n))`.
pub fn build_problem(spec: &TheoremOneSpec) -> Result<AperyProblem> {
    build_problem_with(spec, &base_recurrence(&spec.term())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apery::rec_run;
    use crate::hyperterm::c2_closed_form;

    fn franel_rec(s: u32) -> (ProperTerm, Recurrence) {
        let t = ProperTerm::franel(s, int(1));
        let r = zeilberger(&t, 4).unwrap().0;
        (t, r)
    }

    #[test]
    fn rhs_jet_examples() {
        let (t3, r3) = franel_rec(3);
        let j = rhs_jet(&t3, &r3, 1, 4).unwrap();
        assert!(j.valuation().is_none_or(|v| v >= 4));
        let (t4, r4) = franel_rec(4);
        assert!(rhs_jet(&t4, &r4, 2, 5).unwrap().valuation().is_none_or(|v| v >= 4));
        assert!(rhs_jet(&t3, &r3, 3, 0).unwrap().is_zero());
        let wrong = Recurrence::from_i64s(&[&[-2], &[1]]).unwrap();
        assert_eq!(rhs_jet(&t3, &wrong, 1, 2), Err(Error::RecurrenceMismatch(1)));
    }

    #[test]
    fn valuation_reports() {
        let (t3, r3) = franel_rec(3);
        let rep = valuation_check(&t3, &r3, 40, 5).unwrap();
        assert!(rep.pass && rep.min_valuation >= 4 && rep.expected == 4);
        let t = ProperTerm::franel(3, int(2));
        let r = zeilberger(&t, 4).unwrap().0;
        let rep = valuation_check(&t, &r, 25, 4).unwrap();
        assert!(rep.pass && rep.min_valuation >= 3);
        assert!(valuation_check(&t3, &r3, 5, 3).is_err());
    }

    #[test]
    fn alpha_examples() {
        for s in 1..=4 {
            let a = find_alpha(&ProperTerm::franel(s, int(1))).unwrap();
            assert!(a.exact && a.lo == rat(1, 2));
        }
        let a = find_alpha(&ProperTerm::franel(2, int(4))).unwrap();
        assert!(a.exact && a.lo == rat(2, 3));
        let a = find_alpha(&ProperTerm::franel(1, rat(1, 2))).unwrap();
        assert!(a.exact && a.lo == rat(1, 3));
        // 2^(1/3) / (1 + 2^(1/3))
        let a = find_alpha(&ProperTerm::franel(3, int(2))).unwrap();
        assert!(!a.exact);
        assert!(a.to_bigfloat(35).to_decimal(30).starts_with("0.5575066659755578966718349893"));
        let scaled = ProperTerm::franel(3, int(2)).scaled(&int(-7));
        assert_eq!(find_alpha(&scaled).unwrap(), a);
        // the k!-only summand 1/k! has no interior maximum along k = alpha n
        let t = ProperTerm::new(
            crate::BiPolyQ::one(),
            vec![],
            vec![crate::hyperterm::Factorial::new(0, 1, 0)],
            int(1),
        )
        .unwrap();
        assert!(find_alpha(&t).is_err());
    }

    #[test]
    fn spec_ranges() {
        assert!(TheoremOneSpec::new(3, 2, int(1)).is_ok());
        assert!(TheoremOneSpec::new(3, 3, int(1)).is_err());
        assert!(TheoremOneSpec::new(4, 3, int(1)).is_ok());
        assert!(TheoremOneSpec::new(4, 0, int(1)).is_err());
        assert!(TheoremOneSpec::new(2, 1, int(1)).is_err());
        assert!(TheoremOneSpec::new(3, 1, int(-1)).is_err());
        let s: TheoremOneSpec = serde_json::from_str(r#"{"s": 3, "r": 2, "a": "1/2"}"#).unwrap();
        assert_eq!(s.a, rat(1, 2));
        assert!(serde_json::from_str::<TheoremOneSpec>(r#"{"s": 3, "r": 3, "a": "1"}"#).is_err());
    }

    #[test]
    fn build_franel_three() {
        let spec = TheoremOneSpec::new(3, 2, int(1)).unwrap();
        let p = build_problem(&spec).unwrap();
        assert_eq!(p.init_b, vec![int(1), int(2)]);
        assert_eq!(p.init_a, vec![int(0), int(12)]);
        let a = rec_run(&p.rec, &p.init_a, 3).unwrap();
        let b = rec_run(&p.rec, &p.init_b, 3).unwrap();
        assert_eq!(a.values[2], int(48));
        assert_eq!(&a.values[3] / &b.values[3], rat(2496, 9 * 56));
        let zero = TheoremOneSpec::experimental(3, 0, int(1)).unwrap();
        let p0 = build_problem(&zero).unwrap();
        assert_eq!(p0.init_a, p0.init_b);
    }

    #[test]
    fn miracle_violation_is_reported() {
        let spec = TheoremOneSpec::experimental(4, 4, int(1)).unwrap();
        assert!(matches!(build_problem(&spec), Err(Error::MiracleViolated { r: 4, found: 4 })));
    }

    #[test]
    fn slow_oracle_small_cases() {
        let spec = TheoremOneSpec::new(3, 2, int(1)).unwrap();
        let v = slow_oracle(&spec, 1).unwrap();
        assert_eq!(v.value, c2_closed_form(3, 1, v.k).unwrap());
        let odd = TheoremOneSpec::new(3, 1, int(1)).unwrap();
        assert!(slow_oracle(&odd, 40).unwrap().value.is_zero());
        let v = slow_oracle(&spec, 2000).unwrap();
        assert!((v.value.to_f64().unwrap() - 4.9348).abs() < 0.05);
    }
}
