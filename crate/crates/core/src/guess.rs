//! Guessing P-recursive recurrences from sequence prefixes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::linalg::nullspace_fraction_free;
use crate::exact::rational::{int, serde_rational_vec};
use crate::telescope::Recurrence;
use crate::{PolyQ, Rational};

/// Number of trailing terms never used when solving.
pub const HOLDOUT: usize = 5;

/// Terms `values[0], values[1], ...` of a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SequencePrefix {
    #[serde(with = "serde_rational_vec")]
    pub values: Vec<Rational>,
}

impl SequencePrefix {
    pub fn new(values: Vec<Rational>) -> Self {
        SequencePrefix { values }
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        SequencePrefix { values: values.iter().map(|&v| int(v)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<Rational>> for SequencePrefix {
    fn from(values: Vec<Rational>) -> Self {
        SequencePrefix { values }
    }
}

/// Terms needed to search up to order `l` and degree `d`.
pub fn required_length(max_order: usize, max_degree: usize) -> usize {
    (max_order + 1) * (max_degree + 2) + max_order + HOLDOUT
}

/// `n -> sum_i p_i(n) seq[n+i]` for every `n` where all terms are available.
pub fn rec_residuals(rec: &Recurrence, seq: &SequencePrefix) -> SequencePrefix {
    let count = seq.len().saturating_sub(rec.order());
    SequencePrefix::new((0..count).map(|n| rec.apply(&seq.values, n as i64).unwrap()).collect())
}

/// Rows of the linear system for order `l`, degree `d` on the first `terms`
/// values, each scaled to integers.
fn system(values: &[Rational], l: usize, d: usize, terms: usize) -> Vec<Vec<BigInt>> {
    (0..terms - l)
        .map(|n| {
            let nq = int(n as i64);
            let mut row = Vec::with_capacity((l + 1) * (d + 1));
            for v in &values[n..=n + l] {
                let mut pw = Rational::one();
                for _ in 0..=d {
                    row.push(v * &pw);
                    pw *= &nq;
                }
            }
            let den = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter().map(|q| q.numer() * (&den / q.denom())).collect()
        })
        .collect()
}

fn to_recurrence(v: &[BigInt], l: usize, d: usize) -> Option<Recurrence> {
    let coeffs: Vec<PolyQ> = v.chunks(d + 1).map(|c| PolyQ::new(c.iter().map(|x| Rational::from(x.clone())).collect())).collect();
    debug_assert_eq!(coeffs.len(), l + 1);
    Recurrence::new(coeffs).ok().map(|r| r.normalized())
}

fn height(rec: &Recurrence) -> u64 {
    rec.coeffs().iter().flat_map(|p| p.coeffs()).map(|c| c.numer().abs().bits()).max().unwrap_or(0)
}

/// Lexicographically smallest `(order, degree)` recurrence that annihilates
/// every supplied term, solved without the last [`HOLDOUT`] terms.
pub fn guess_recurrence(seq: &SequencePrefix, max_order: usize, max_degree: usize) -> Result<Option<Recurrence>> {
    let required = required_length(max_order, max_degree);
    if seq.len() < required {
        return Err(Error::NeedsMoreTerms { required, available: seq.len() });
    }
    let solve_terms = seq.len() - HOLDOUT;
    for l in 1..=max_order {
        for d in 0..=max_degree {
            let rows = system(&seq.values, l, d, solve_terms);
            let basis = nullspace_fraction_free(&rows, (l + 1) * (d + 1));
            let best = basis
                .iter()
                .filter_map(|v| to_recurrence(v, l, d))
                .filter(|r| rec_residuals(r, seq).values.iter().all(Zero::is_zero))
                .min_by_key(|r| (r.leading().degree(), height(r)));
            if best.is_some() {
                return Ok(best);
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperterm::ProperTerm;
    use crate::telescope::zeilberger;

    #[test]
    fn geometric_and_factorial() {
        let pow2 = SequencePrefix::from_i64s(&(0..15).map(|n| 1i64 << n).collect::<Vec<_>>());
        let r = guess_recurrence(&pow2, 1, 1).unwrap().unwrap();
        assert_eq!(r, Recurrence::from_i64s(&[&[-2], &[1]]).unwrap());
        let fact = SequencePrefix::from_i64s(&(0..15).scan(1i64, |f, n| {
            let v = *f;
            *f *= n + 1;
            Some(v)
        }).collect::<Vec<_>>());
        let r = guess_recurrence(&fact, 1, 1).unwrap().unwrap();
        assert_eq!(r, Recurrence::from_i64s(&[&[-1, -1], &[1]]).unwrap());
    }

    #[test]
    fn franel_three_matches_zeilberger() {
        let t = ProperTerm::franel(3, int(1));
        let seq = SequencePrefix::new((0..30).map(|n| t.row_sum(n).unwrap()).collect());
        let guessed = guess_recurrence(&seq, 2, 3).unwrap().unwrap();
        let (z, _) = zeilberger(&t, 3).unwrap();
        assert_eq!(guessed, z);
    }

    #[test]
    fn residual_examples() {
        let rec = Recurrence::from_i64s(&[&[-2], &[1]]).unwrap();
        let r = rec_residuals(&rec, &SequencePrefix::from_i64s(&[1, 2, 4, 9]));
        assert_eq!(r, SequencePrefix::from_i64s(&[0, 0, 1]));
        let order3 = Recurrence::from_i64s(&[&[1], &[0], &[0], &[1]]).unwrap();
        assert!(rec_residuals(&order3, &SequencePrefix::from_i64s(&[1, 2])).is_empty());
    }

    #[test]
    fn short_input_reports_required_length() {
        let seq = SequencePrefix::from_i64s(&[1, 2, 4]);
        assert_eq!(
            guess_recurrence(&seq, 2, 2),
            Err(Error::NeedsMoreTerms { required: 19, available: 3 })
        );
    }

    #[test]
    fn json_shape() {
        let s: SequencePrefix = serde_json::from_str(r#"{"values": [1, "1/2", "3"]}"#).unwrap();
        assert_eq!(s.values[1], crate::exact::rational::rat(1, 2));
        let back: SequencePrefix = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
