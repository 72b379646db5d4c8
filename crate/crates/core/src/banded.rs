//! Band matrix storage and LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: each column holds `kl` extra
//! slots above the upper band so that row interchanges have room for fill.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ld,
            data: vec![0.0; ld * n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn lower(&self) -> usize {
        self.kl
    }

    #[inline]
    pub fn upper(&self) -> usize {
        self.ku
    }

    /// Whether `(i, j)` lies inside the declared band.
    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i <= j + self.kl && j <= i + self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j + self.kl && j <= i + self.ku + self.kl);
        j * self.ld + self.kl + self.ku + i - j
    }

    /// Entry `(i, j)`; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Panics if `(i, j)` is outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += value;
    }

    /// Column range `(lo, hi)` (inclusive) of row `i` inside the band.
    #[inline]
    pub fn row_span(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.kl), (i + self.ku).min(self.n - 1))
    }

    /// Replaces row `i` by the unit row `e_i`.
    pub fn set_identity_row(&mut self, i: usize) {
        let (lo, hi) = self.row_span(i);
        for j in lo..=hi {
            self.set(i, j, if i == j { 1.0 } else { 0.0 });
        }
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let (lo, hi) = self.row_span(i);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Builds `I - scale * self`, keeping the band.
    pub fn shifted_identity(&self, scale: f64) -> BandMatrix {
        let mut m = BandMatrix::zeros(self.n, self.kl, self.ku);
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                let delta = if i == j { 1.0 } else { 0.0 };
                m.set(i, j, delta - scale * self.get(i, j));
            }
        }
        m
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Factorizes in place; consumes the matrix.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        // fill slots above the upper band start at zero
        for j in 0..n {
            for s in 0..kl {
                let k = j * self.ld + s;
                self.data[k] = 0.0;
            }
        }
        let mut pivots = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in j + 1..=j + km {
                let v = self.data[self.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[j] = p;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix(j));
            }
            ju = ju.max((p + ku).min(n - 1));
            if p != j {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(j, j)];
            for i in j + 1..=j + km {
                let k = self.idx(i, j);
                self.data[k] /= pivot;
            }
            for c in j + 1..=ju {
                let u = self.data[self.idx(j, c)];
                if u == 0.0 {
                    continue;
                }
                for i in j + 1..=j + km {
                    let l = self.data[self.idx(i, j)];
                    let k = self.idx(i, c);
                    self.data[k] -= l * u;
                }
            }
        }
        Ok(BandLu {
            factors: self,
            pivots,
        })
    }
}

/// Pivoted LU factors of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandLu {
    factors: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let f = &self.factors;
        let n = f.n;
        assert_eq!(b.len(), n);
        let kl = f.kl;
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                for i in j + 1..=(j + kl).min(n - 1) {
                    b[i] -= f.data[f.idx(i, j)] * bj;
                }
            }
        }
        let reach = f.kl + f.ku;
        for j in (0..n).rev() {
            b[j] /= f.data[f.idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(reach)..j {
                    b[i] -= f.data[f.idx(i, j)] * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn random_band(n: usize, kl: usize, ku: usize, seed: &[f64]) -> BandMatrix {
        let mut m = BandMatrix::zeros(n, kl, ku);
        let mut k = 0;
        for i in 0..n {
            let (lo, hi) = m.row_span(i);
            for j in lo..=hi {
                m.set(i, j, seed[k % seed.len()] + if i == j { 0.1 } else { 0.0 });
                k += 1;
            }
        }
        m
    }

    #[test]
    fn tridiagonal_solve() {
        let n = 6;
        let mut m = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i > 0 {
                m.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let b = m.mul_vec(&x_true);
        let x = m.clone().factor().unwrap().solve(&b);
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn pivoting_needed() {
        // zero on the leading diagonal forces a row swap
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.set(0, 0, 0.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 0.0);
        m.set(1, 2, 2.0);
        m.set(2, 1, 3.0);
        m.set(2, 2, 1.0);
        let x_true = [1.0, -2.0, 0.5];
        let b = m.mul_vec(&x_true);
        let x = m.factor().unwrap().solve(&b);
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-13, "{a} vs {e}");
        }
    }

    #[test]
    fn singular_detected() {
        let m = BandMatrix::zeros(4, 1, 1);
        assert!(matches!(m.factor(), Err(Error::SingularMatrix(0))));
    }

    #[test]
    fn identity_rows_and_shift() {
        let mut m = random_band(7, 2, 2, &[0.3, -1.2, 0.7, 2.0, -0.4]);
        m.set_identity_row(3);
        assert_eq!(m.get(3, 3), 1.0);
        assert_eq!(m.get(3, 2), 0.0);
        let s = m.shifted_identity(0.5);
        assert_eq!(s.get(3, 3), 0.5);
        assert_eq!(s.get(1, 0), -0.5 * m.get(1, 0));
    }

    proptest! {
        #[test]
        fn matches_dense_solve(
            seed in prop::collection::vec(-1.0..1.0f64, 11..40),
            rhs in prop::collection::vec(-5.0..5.0f64, 30),
            kl in 1usize..6, ku in 1usize..6,
        ) {
            let n = 30;
            let m = random_band(n, kl, ku, &seed);
            let dense = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
            let b = DVector::from_column_slice(&rhs);
            if let Some(reference) = dense.clone().lu().solve(&b) {
                let cond_guard = reference.amax();
                prop_assume!(cond_guard < 1e6);
                if let Ok(lu) = m.factor() {
                    let x = lu.solve(&rhs);
                    for i in 0..n {
                        prop_assert!((x[i] - reference[i]).abs() <= 1e-8 * (1.0 + cond_guard));
                    }
                }
            }
        }
    }
}
