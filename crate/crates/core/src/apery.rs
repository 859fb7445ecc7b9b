//! Running recurrences and measuring Apéry limits.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{int, ln_abs, ln_abs_int, primes_upto, serde_rational_vec};
use crate::exact::{BigFloat, Field};
use crate::guess::SequencePrefix;
use crate::telescope::Recurrence;
use crate::{PolyQ, Rational};

/// Iterator over `X(0), X(1), ...` keeping only the last `L` values.
pub struct RecIter<'a, T> {
    rec: &'a Recurrence,
    coeff: Box<dyn Fn(&Rational) -> T + 'a>,
    window: Vec<T>,
    rhs: Option<&'a [T]>,
    next: usize,
}

impl<'a, T: Field> RecIter<'a, T> {
    /// `coeff` maps the rational recurrence coefficients into `T`.
    pub fn new(rec: &'a Recurrence, init: &[T], coeff: impl Fn(&Rational) -> T + 'a) -> Result<Self> {
        if init.len() != rec.order() {
            return Err(Error::InvalidArgument(format!(
                "order {} recurrence needs {} initial values, got {}",
                rec.order(),
                rec.order(),
                init.len()
            )));
        }
        Ok(RecIter { rec, coeff: Box::new(coeff), window: init.to_vec(), rhs: None, next: 0 })
    }

    /// Drive the recurrence with `sum_i p_i(n) X(n+i) = rhs[n]`.
    pub fn with_rhs(mut self, rhs: &'a [T]) -> Self {
        self.rhs = Some(rhs);
        self
    }

    fn eval(&self, p: &PolyQ, n: i64) -> T {
        (self.coeff)(&p.eval(&int(n)))
    }
}

impl<T: Field> Iterator for RecIter<'_, T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Result<T>> {
        let l = self.rec.order();
        let idx = self.next;
        self.next += 1;
        if idx < l {
            return Some(Ok(self.window[idx].clone()));
        }
        let n = (idx - l) as i64;
        let lead = self.eval(self.rec.leading(), n);
        if lead.is_zero() {
            return Some(Err(Error::SingularRecurrence(n)));
        }
        let mut acc = match self.rhs {
            Some(c) => c.get(n as usize)?.clone(),
            None => T::zero(),
        };
        for (i, p) in self.rec.coeffs()[..l].iter().enumerate() {
            if !p.is_zero() {
                acc = acc - self.eval(p, n) * self.window[i].clone();
            }
        }
        let value = acc / lead;
        if l > 0 {
            self.window.remove(0);
            self.window.push(value.clone());
        }
        Some(Ok(value))
    }
}

/// Exact `X(0..=n_max)` from the first `L` values.
pub fn rec_run(rec: &Recurrence, init: &[Rational], n_max: usize) -> Result<SequencePrefix> {
    let values = RecIter::new(rec, init, Rational::clone)?.take(n_max + 1).collect::<Result<Vec<_>>>()?;
    Ok(SequencePrefix::new(values))
}

/// Exact solution of `sum_i p_i(n) X(n+i) = rhs(n)`, `X(0..=n_max)`.
pub fn rec_run_inhom(rec: &Recurrence, init: &[Rational], rhs: &SequencePrefix, n_max: usize) -> Result<SequencePrefix> {
    let l = rec.order();
    let required = (n_max + 1).saturating_sub(l);
    if rhs.len() < required {
        return Err(Error::NeedsMoreTerms { required, available: rhs.len() });
    }
    let values = RecIter::new(rec, init, Rational::clone)?
        .with_rhs(&rhs.values)
        .take(n_max + 1)
        .collect::<Result<Vec<_>>>()?;
    Ok(SequencePrefix::new(values))
}

/// `(sum_j q_j(n) S^j) (sum_i p_i(n) S^i)` with `S` the forward shift.
pub fn operator_compose(outer: &Recurrence, inner: &Recurrence) -> Recurrence {
    let mut out = vec![PolyQ::zero(); outer.order() + inner.order() + 1];
    for (j, q) in outer.coeffs().iter().enumerate() {
        for (i, p) in inner.coeffs().iter().enumerate() {
            out[i + j] = &out[i + j] + &(q * &p.shift_by(j as i64));
        }
    }
    Recurrence::new(out).expect("product of nonzero leading coefficients is nonzero")
}

/// Inhomogeneous driver: `C` solves `rec` from `init_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhsSpec {
    pub rec: Recurrence,
    #[serde(rename = "initC", with = "serde_rational_vec")]
    pub init_c: Vec<Rational>,
}

/// Two solutions of one recurrence whose ratio converges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemWire")]
pub struct AperyProblem {
    pub rec: Recurrence,
    #[serde(rename = "initA", with = "serde_rational_vec")]
    pub init_a: Vec<Rational>,
    #[serde(rename = "initB", with = "serde_rational_vec")]
    pub init_b: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<RhsSpec>,
}

#[derive(Deserialize)]
struct ProblemWire {
    rec: Recurrence,
    #[serde(rename = "initA", with = "serde_rational_vec")]
    init_a: Vec<Rational>,
    #[serde(rename = "initB", with = "serde_rational_vec")]
    init_b: Vec<Rational>,
    #[serde(default)]
    rhs: Option<RhsSpec>,
}

impl TryFrom<ProblemWire> for AperyProblem {
    type Error = Error;
    fn try_from(w: ProblemWire) -> Result<Self> {
        AperyProblem::new(w.rec, w.init_a, w.init_b, w.rhs)
    }
}

impl AperyProblem {
    pub fn new(rec: Recurrence, init_a: Vec<Rational>, init_b: Vec<Rational>, rhs: Option<RhsSpec>) -> Result<Self> {
        let l = rec.order();
        if init_a.len() != l || init_b.len() != l {
            return Err(Error::InvalidArgument(format!(
                "initial data must have length {l}, got {} and {}",
                init_a.len(),
                init_b.len()
            )));
        }
        if let Some(r) = &rhs {
            if r.init_c.len() != r.rec.order() {
                return Err(Error::InvalidArgument("initC length must equal the order of its recurrence".into()));
            }
        }
        Ok(AperyProblem { rec, init_a, init_b, rhs })
    }

    /// The classical ζ(3) problem: `A` from `(0, 6)`, `B` from `(1, 5)`.
    pub fn zeta3() -> Self {
        AperyProblem::new(crate::telescope::zeta3_recurrence(), vec![int(0), int(6)], vec![int(1), int(5)], None).unwrap()
    }

    /// `A(0..=n_max)`.
    pub fn run_a(&self, n_max: usize) -> Result<SequencePrefix> {
        match &self.rhs {
            None => rec_run(&self.rec, &self.init_a, n_max),
            Some(r) => {
                let c = rec_run(&r.rec, &r.init_c, n_max)?;
                rec_run_inhom(&self.rec, &self.init_a, &c, n_max)
            }
        }
    }

    /// `B(0..=n_max)`.
    pub fn run_b(&self, n_max: usize) -> Result<SequencePrefix> {
        rec_run(&self.rec, &self.init_b, n_max)
    }

    /// The exact ratios `A(n)/B(n)`, `None` where `B(n) = 0`.
    pub fn ratios(&self, n_max: usize) -> Result<Vec<Option<Rational>>> {
        let a = self.run_a(n_max)?;
        let b = self.run_b(n_max)?;
        Ok(a.values.iter().zip(&b.values).map(|(a, b)| (!b.is_zero()).then(|| a / b)).collect())
    }
}

/// How the ratio sequence approaches its limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    /// Geometric decay of the error with a consistent rate.
    Exponential,
    /// Differences shrink, but not geometrically.
    Slow,
    /// The ratios are constant over the measured window.
    Stationary,
    /// No stabilizing digits.
    NonConvergent,
    /// Too few terms to tell.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport {
    pub n_used: usize,
    pub limit: BigFloat,
    /// Estimated base `alpha` of the error decay `C alpha^(-n)`.
    pub alpha_estimate: Option<BigFloat>,
    pub delta_estimate: Option<BigFloat>,
    /// Digits on which the estimates at `N` and `N/2` agree.
    pub digits_stable: u32,
    pub convergence: Convergence,
    pub diagnostic: Option<String>,
}

/// Least-squares slope of `(x, y)` points.
fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = points
        .iter()
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + (x - mx) * (y - my), d + (x - mx) * (x - mx)));
    (den > 0.0).then(|| num / den)
}

/// `(n, ln|r(n+1) - r(n)|)` for consecutive defined ratios in `lo..hi`, or
/// `None` when every difference there vanishes.
fn log_differences(ratios: &[Option<Rational>], lo: usize, hi: usize) -> Option<Vec<(f64, f64)>> {
    let mut pts = Vec::new();
    let mut all_zero = true;
    for n in lo..hi.min(ratios.len().saturating_sub(1)) {
        if let (Some(a), Some(b)) = (&ratios[n], &ratios[n + 1]) {
            let d = b - a;
            if !d.is_zero() {
                all_zero = false;
                pts.push((n as f64, ln_abs(&d)));
            }
        }
    }
    (!all_zero).then_some(pts)
}

/// Ratio `A(N)/B(N)` at the given precision, with the decay rate estimated
/// from successive differences over the last quarter of indices.
pub fn limit_report(problem: &AperyProblem, n: usize, digits: u32) -> Result<LimitReport> {
    let ratios = problem.ratios(n)?;
    let mut report = LimitReport {
        n_used: n,
        limit: BigFloat::zero(digits),
        alpha_estimate: None,
        delta_estimate: None,
        digits_stable: 0,
        convergence: Convergence::Undetermined,
        diagnostic: None,
    };
    // three consecutive vanishing denominators at the end rule out a limit
    if n >= 2 && ratios[n - 2..=n].iter().all(Option::is_none) {
        report.convergence = Convergence::NonConvergent;
        report.diagnostic = Some("B(n) vanishes at three consecutive indices".into());
        return Ok(report);
    }
    let Some((last_n, last)) = ratios.iter().enumerate().rev().find_map(|(i, r)| r.as_ref().map(|r| (i, r))) else {
        report.diagnostic = Some("B(n) = 0 for every computed n".into());
        return Ok(report);
    };
    report.n_used = last_n;
    report.limit = BigFloat::from_rational(last, digits);
    if last_n < 8 {
        let plural = if last_n == 0 { "" } else { "s" };
        report.diagnostic = Some(format!("only {} term{plural}; too few to judge convergence", last_n + 1));
        return Ok(report);
    }
    if let Some(half) = ratios[..=last_n / 2].iter().rev().flatten().next() {
        let diff = last - half;
        report.digits_stable = if diff.is_zero() {
            digits
        } else {
            let scale = ln_abs(last).max(0.0);
            let agree = -(ln_abs(&diff) - scale) / std::f64::consts::LN_10;
            (agree.floor().max(0.0) as u32).min(digits)
        };
    }
    let q = last_n / 4;
    let late = log_differences(&ratios, last_n - q, last_n);
    let early = log_differences(&ratios, q, 2 * q);
    match (late, early) {
        (None, _) => {
            report.convergence = Convergence::Stationary;
            report.digits_stable = digits;
        }
        (Some(late), early) => {
            let s_late = slope(&late);
            let s_early = early.as_deref().and_then(slope);
            match s_late {
                None => report.diagnostic = Some("not enough nonzero differences".into()),
                Some(s) if s >= -1e-3 => {
                    report.convergence = Convergence::NonConvergent;
                    report.digits_stable = 0;
                    report.diagnostic = Some("successive differences do not shrink".into());
                }
                Some(s) => {
                    let alpha = (-s).exp();
                    report.alpha_estimate = Some(BigFloat::from_f64(alpha, 16));
                    let consistent = s_early.is_some_and(|e| (e - s).abs() <= 0.25 * s.abs());
                    report.convergence = if alpha > 1.05 && consistent {
                        Convergence::Exponential
                    } else {
                        Convergence::Slow
                    };
                }
            }
        }
    }
    Ok(report)
}

/// `n -> m * lcm(1..n)^e` for `n = 0..=n_max`.
pub fn lcm_clearing(m: u64, e: u32, n_max: usize) -> Vec<BigInt> {
    let primes = primes_upto(n_max as u64);
    let mut l = BigInt::one();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max as u64 {
        // lcm grows by p exactly when n is a power of the prime p
        if n >= 2 {
            if let Some(&p) = primes.iter().find(|&&p| n % p == 0) {
                let mut r = n;
                while r % p == 0 {
                    r /= p;
                }
                if r == 1 {
                    l *= p;
                }
            }
        }
        out.push(BigInt::from(m) * num_traits::pow(l.clone(), e as usize));
    }
    out
}

/// `delta_n = -1 - ln|a'/b' - limit| / ln b'` with `a' = A c`, `b' = B c`.
/// Entries are `None` where `b' = ±1` or the difference vanishes.
pub fn delta_estimate(
    a: &SequencePrefix,
    b: &SequencePrefix,
    limit: &BigFloat,
    clearing: &[BigInt],
) -> Result<Vec<Option<BigFloat>>> {
    let len = a.len().min(b.len()).min(clearing.len());
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        let c = Rational::from(clearing[n].clone());
        let (ac, bc) = (&a.values[n] * &c, &b.values[n] * &c);
        if !ac.is_integer() || !bc.is_integer() {
            return Err(Error::ClearingInsufficient(n));
        }
        let ln_b = ln_abs_int(bc.numer());
        if bc.is_zero() || ln_b <= 0.0 {
            out.push(None);
            continue;
        }
        let ratio = BigFloat::from_rational(&(ac / bc), limit.digits());
        let err = ratio.sub(limit);
        out.push((!err.is_zero()).then(|| BigFloat::from_f64(-1.0 - err.ln_abs_f64() / ln_b, 16)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;

    fn seq(vals: &[i64]) -> SequencePrefix {
        SequencePrefix::from_i64s(vals)
    }

    #[test]
    fn zeta3_runs() {
        let rec = crate::telescope::zeta3_recurrence();
        assert_eq!(rec_run(&rec, &[int(1), int(5)], 4).unwrap(), seq(&[1, 5, 73, 1445, 33001]));
        let a = rec_run(&rec, &[int(0), int(6)], 2).unwrap();
        assert_eq!(a.values, vec![int(0), int(6), rat(351, 4)]);
        let b = rec_run(&rec, &[int(1), int(5)], 200).unwrap();
        assert!(b.values.iter().all(|v| v.is_integer()));
    }

    #[test]
    fn simple_runs() {
        let r = Recurrence::from_i64s(&[&[-2], &[1]]).unwrap();
        assert_eq!(rec_run(&r, &[int(1)], 5).unwrap(), seq(&[1, 2, 4, 8, 16, 32]));
        let ones = seq(&[1; 10]);
        assert_eq!(rec_run_inhom(&r, &[int(0)], &ones, 4).unwrap(), seq(&[0, 1, 3, 7, 15]));
        let diff = Recurrence::from_i64s(&[&[-1], &[1]]).unwrap();
        let nat = seq(&[0, 1, 2, 3, 4]);
        assert_eq!(rec_run_inhom(&diff, &[int(0)], &nat, 4).unwrap(), seq(&[0, 0, 1, 3, 6]));
        let zeros = seq(&[0; 10]);
        assert_eq!(rec_run_inhom(&r, &[int(3)], &zeros, 6).unwrap(), rec_run(&r, &[int(3)], 6).unwrap());
        assert!(matches!(rec_run_inhom(&r, &[int(0)], &seq(&[1]), 4), Err(Error::NeedsMoreTerms { .. })));
    }

    #[test]
    fn singular_leading_coefficient() {
        // (n-2) X(n+1) = X(n)
        let r = Recurrence::from_i64s(&[&[-1], &[-2, 1]]).unwrap();
        assert_eq!(rec_run(&r, &[int(1)], 5), Err(Error::SingularRecurrence(2)));
    }

    #[test]
    fn composition() {
        let outer = Recurrence::from_i64s(&[&[-1], &[1]]).unwrap();
        let inner = Recurrence::from_i64s(&[&[-2], &[1]]).unwrap();
        let c = operator_compose(&outer, &inner);
        assert_eq!(c, Recurrence::from_i64s(&[&[2], &[-3], &[1]]).unwrap());
        let identity = Recurrence::from_i64s(&[&[1]]).unwrap();
        assert_eq!(operator_compose(&identity, &inner), inner);
        let x = rec_run_inhom(&inner, &[int(4)], &seq(&[1; 30]), 22).unwrap();
        for n in 0..=20 {
            assert!(c.apply(&x.values, n).unwrap().is_zero());
        }
    }

    #[test]
    fn zeta3_limit_report() {
        let rep = limit_report(&AperyProblem::zeta3(), 30, 60).unwrap();
        assert!(rep.limit.to_decimal(21).starts_with("1.2020569031595942854"));
        assert!(rep.digits_stable >= 20, "{}", rep.digits_stable);
        assert_eq!(rep.convergence, Convergence::Exponential);
        assert!(rep.alpha_estimate.unwrap().to_f64() > 1.0);
    }

    #[test]
    fn slow_tail_is_flagged() {
        // B = 1, A(n+1) - A(n) = 1/((n+1)(n+2)) so A(n) = 1 - 1/(n+1)
        let one = Recurrence::from_i64s(&[&[-1], &[1]]).unwrap();
        let c = SequencePrefix::new((0..200).map(|n| rat(1, (n + 1) * (n + 2))).collect());
        let a = rec_run_inhom(&one, &[int(0)], &c, 150).unwrap();
        let b = rec_run(&one, &[int(1)], 150).unwrap();
        let ratios: Vec<Option<Rational>> = a.values.iter().zip(&b.values).map(|(a, b)| Some(a / b)).collect();
        let late = log_differences(&ratios, 112, 150).unwrap();
        assert!((-slope(&late).unwrap()).exp() < 1.05);
    }

    #[test]
    fn delta_for_zeta3() {
        let p = AperyProblem::zeta3();
        let n = 60;
        let (a, b) = (p.run_a(n).unwrap(), p.run_b(n).unwrap());
        let limit = BigFloat::from_rational(&(&p.run_a(120).unwrap().values[120] / &p.run_b(120).unwrap().values[120]), 400);
        let clearing = lcm_clearing(2, 3, n);
        let d = delta_estimate(&a, &b, &limit, &clearing).unwrap();
        let last = d[n].as_ref().unwrap().to_f64();
        assert!(last > -0.5 && last < 0.3, "{last}");
        // the clearing must be sufficient
        assert_eq!(delta_estimate(&a, &b, &limit, &vec![BigInt::one(); n + 1]), Err(Error::ClearingInsufficient(2)));
        // a wrong limit pins delta near -1
        let wrong = BigFloat::from_rational(&rat(6, 5), 400);
        let d = delta_estimate(&a, &b, &wrong, &clearing).unwrap();
        assert!((d[n].as_ref().unwrap().to_f64() + 1.0).abs() < 0.05);
    }

    #[test]
    fn lcm_clearing_values() {
        let c = lcm_clearing(1, 1, 10);
        let expect = [1, 1, 2, 6, 12, 60, 60, 420, 840, 2520, 2520];
        assert_eq!(c, expect.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>());
    }

    #[test]
    fn problem_json() {
        let p = AperyProblem::zeta3();
        let s = serde_json::to_string(&p).unwrap();
        let back: AperyProblem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"rec": {"order": 1, "coeffs": [[-2],[1]], "rhs": "zero"}, "initA": [], "initB": [1]}"#;
        assert!(serde_json::from_str::<AperyProblem>(bad).is_err());
    }
}
