//! Exact nullspace computation over a field, and fraction-free over an
//! integral domain with exact division.

use num_bigint::BigInt;

use super::poly::Poly;
use super::scalar::{Field, Ring};

/// Rings where a known-exact quotient can be computed.
pub trait ExactDiv: Ring {
    /// `self / d`, assuming `d` divides `self`.
    fn exact_quotient(&self, d: &Self) -> Self;

    /// A size measure used to prefer small pivots.
    fn size(&self) -> usize;
}

impl ExactDiv for BigInt {
    fn exact_quotient(&self, d: &Self) -> Self {
        self / d
    }

    fn size(&self) -> usize {
        self.bits() as usize
    }
}

impl<T: Field> ExactDiv for Poly<T> {
    fn exact_quotient(&self, d: &Self) -> Self {
        self.exact_div(d).expect("fraction-free elimination: inexact division")
    }

    fn size(&self) -> usize {
        self.degree().unwrap_or(0)
    }
}

/// Basis of the right nullspace of `rows` (each of length `ncols`), from the
/// reduced row echelon form. Pivots are taken as the first nonzero entry, so
/// this is meant for exact fields.
///
/// Each basis vector has a 1 in its free column and zeros in the other free
/// columns.
pub fn nullspace<T: Field>(rows: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv();
        for j in c..ncols {
            let v = m[r][j].clone() * inv.clone();
            m[r][j] = v;
        }
        for i in 0..m.len() {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in c..ncols {
                if m[r][j].is_zero() {
                    continue;
                }
                let v = m[i][j].clone() - f.clone() * m[r][j].clone();
                m[i][j] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![T::zero(); ncols];
            v[fc] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][fc].clone();
            }
            v
        })
        .collect()
}

/// Nullspace basis over an integral domain by fraction-free Gauss-Jordan
/// elimination. Every entry stays in the ring; each basis vector carries the
/// final pivot value in its free column.
pub fn nullspace_fraction_free<T: ExactDiv>(rows: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut prev = T::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| m[i][c].size()) else {
            continue;
        };
        m.swap(r, p);
        let piv = m[r][c].clone();
        for i in 0..m.len() {
            if i == r {
                continue;
            }
            let f = m[i][c].clone();
            for j in 0..ncols {
                let v = piv.clone() * m[i][j].clone() - f.clone() * m[r][j].clone();
                m[i][j] = if v.is_zero() { v } else { v.exact_quotient(&prev) };
            }
        }
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![T::zero(); ncols];
            v[fc] = prev.clone();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][fc].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::int;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn apply(rows: &[Vec<BigRational>], v: &[BigRational]) -> Vec<BigRational> {
        rows.iter()
            .map(|r| r.iter().zip(v).fold(BigRational::zero(), |a, (x, y)| a + x * y))
            .collect()
    }

    #[test]
    fn rank_deficient_system() {
        let rows = vec![
            vec![int(1), int(2), int(3)],
            vec![int(2), int(4), int(6)],
            vec![int(1), int(0), int(1)],
        ];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 1);
        assert!(apply(&rows, &ns[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn full_rank_has_trivial_nullspace() {
        let rows = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        assert!(nullspace(&rows, 2).is_empty());
    }

    #[test]
    fn fraction_free_matches_field_version() {
        let rows: Vec<Vec<BigInt>> = [[2, 4, 1, 3], [1, 2, 5, -1], [3, 6, 6, 2]]
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let ns = nullspace_fraction_free(&rows, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for r in &rows {
                let dot: BigInt = r.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(dot.is_zero());
            }
        }
    }
}
