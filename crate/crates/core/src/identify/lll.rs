//! Integral LLL reduction (delta = 3/4), exact throughout.
//!
//! Gram-Schmidt data is kept as integers: `d[i]` is the Gram determinant of
//! the first `i` vectors and `lam[k][j] = d[j+1] * mu[k][j]`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct State {
    b: Vec<Vec<BigInt>>,
    // d[0] = 1, d[i+1] belongs to b[i]
    d: Vec<BigInt>,
    lam: Vec<Vec<BigInt>>,
}

impl State {
    fn gram_schmidt_row(&mut self, k: usize) {
        for j in 0..=k {
            let mut u = dot(&self.b[k], &self.b[j]);
            for i in 0..j {
                u = (&self.d[i + 1] * u - &self.lam[k][i] * &self.lam[j][i]) / &self.d[i];
            }
            if j < k {
                self.lam[k][j] = u;
            } else {
                self.d[k + 1] = u;
            }
        }
    }

    fn reduce(&mut self, k: usize, l: usize) {
        let dl = &self.d[l + 1];
        if (&self.lam[k][l] << 1u32).abs() <= *dl {
            return;
        }
        // nearest integer to lam / d
        let q = ((&self.lam[k][l] << 1u32) + dl).div_floor(&(dl << 1u32));
        let (lo, hi) = self.b.split_at_mut(k);
        for (x, y) in hi[0].iter_mut().zip(&lo[l]) {
            *x -= &q * y;
        }
        self.lam[k][l] -= &q * dl;
        for i in 0..l {
            let t = &q * &self.lam[l][i];
            self.lam[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize, kmax: usize) {
        self.b.swap(k, k - 1);
        for j in 0..k - 1 {
            let t = std::mem::take(&mut self.lam[k][j]);
            self.lam[k][j] = std::mem::replace(&mut self.lam[k - 1][j], t);
        }
        let lam = self.lam[k][k - 1].clone();
        let big_b = (&self.d[k - 1] * &self.d[k + 1] + &lam * &lam) / &self.d[k];
        for i in k + 1..=kmax {
            let t = self.lam[i][k].clone();
            self.lam[i][k] = (&self.d[k + 1] * &self.lam[i][k - 1] - &lam * &t) / &self.d[k];
            self.lam[i][k - 1] = (&big_b * t + &lam * &self.lam[i][k]) / &self.d[k + 1];
        }
        self.d[k] = big_b;
    }
}

/// LLL-reduce linearly independent integer row vectors.
pub fn lll_reduce(basis: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let n = basis.len();
    if n < 2 {
        return basis;
    }
    let mut s = State {
        d: vec![BigInt::zero(); n + 1],
        lam: vec![vec![BigInt::zero(); n]; n],
        b: basis,
    };
    s.d[0] = BigInt::from(1);
    s.d[1] = dot(&s.b[0], &s.b[0]);
    let (mut k, mut kmax) = (1usize, 0usize);
    while k < n {
        if k > kmax {
            kmax = k;
            s.gram_schmidt_row(k);
            assert!(!s.d[k + 1].is_zero(), "lll_reduce: vectors are linearly dependent");
        }
        s.reduce(k, k - 1);
        let lhs = &s.d[k + 1] * &s.d[k - 1] * 4;
        let rhs = &s.d[k] * &s.d[k] * 3 - &s.lam[k][k - 1] * &s.lam[k][k - 1] * 4;
        if lhs < rhs {
            s.swap(k, kmax);
            k = (k - 1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                s.reduce(k, l);
            }
            k += 1;
        }
    }
    s.b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn textbook_example() {
        // reduced basis has the short vectors (0,1,0), (1,0,1), (-1,0,2)
        let out = lll_reduce(vec![v(&[1, 1, 1]), v(&[-1, 0, 2]), v(&[3, 5, 6])]);
        assert_eq!(out, vec![v(&[0, 1, 0]), v(&[1, 0, 1]), v(&[-1, 0, 2])]);
    }

    #[test]
    fn finds_small_relation() {
        // 1 * 3 + 2 * (-3/2) = 0 scaled by 1000
        let out = lll_reduce(vec![v(&[1, 0, 3000]), v(&[0, 1, -1500])]);
        assert_eq!(out[0], v(&[1, 2, 0]));
    }
}
