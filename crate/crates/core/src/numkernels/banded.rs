//! General banded matrices stored by diagonals, with an in-band LU
//! factorization (partial pivoting) reused across many right-hand sides.

use crate::error::{Error, Result};

/// Square banded matrix. Row `i` stores columns `i - lower ..= i + upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = lower + upper + 1;
        BandedMatrix {
            n,
            lower,
            upper,
            data: vec![0.0; n * width],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), 0, 0);
        m.data.copy_from_slice(diag);
        m
    }

    /// Symmetric Toeplitz matrix from a centered stencil `[c0, c1, .., ck]`
    /// (entry `(i, i±j)` is `cj`); entries falling outside the matrix are
    /// dropped, which amounts to zero extension at both ends.
    pub fn symmetric_toeplitz(n: usize, stencil: &[f64]) -> Self {
        let half = stencil.len().saturating_sub(1);
        let mut m = Self::zeros(n, half, half);
        for i in 0..n {
            for (j, &c) in stencil.iter().enumerate() {
                if j == 0 {
                    m.set(i, i, c);
                    continue;
                }
                if i >= j {
                    m.set(i, i - j, c);
                }
                if i + j < n {
                    m.set(i, i + j, c);
                }
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn lower(&self) -> usize {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> usize {
        self.upper
    }

    #[inline]
    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.lower >= i && j <= i + self.upper
    }

    /// Entry `(i, j)`; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[i * self.width() + j + self.lower - i]
        } else {
            0.0
        }
    }

    /// Sets entry `(i, j)`. Panics when `(i, j)` lies outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.lower - i] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.lower - i] += v;
    }

    /// Column range of row `i` inside the band.
    #[inline]
    fn row_cols(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.lower)..=(i + self.upper).min(self.n - 1)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let w = self.width();
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * w..(i + 1) * w];
            let mut s = 0.0;
            for j in self.row_cols(i) {
                s += row[j + self.lower - i] * x[j];
            }
            *yi = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Exact banded product `self * rhs`; bandwidths add.
    pub fn product(&self, rhs: &BandedMatrix) -> BandedMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = BandedMatrix::zeros(n, self.lower + rhs.lower, self.upper + rhs.upper);
        for i in 0..n {
            for k in self.row_cols(i) {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in rhs.row_cols(k) {
                    out.add_at(i, j, a * rhs.get(k, j));
                }
            }
        }
        out
    }

    /// `self + scale * other`, widening the band as needed.
    pub fn add_scaled(&self, other: &BandedMatrix, scale: f64) -> BandedMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = BandedMatrix::zeros(
            self.n,
            self.lower.max(other.lower),
            self.upper.max(other.upper),
        );
        for i in 0..self.n {
            for j in self.row_cols(i) {
                out.add_at(i, j, self.get(i, j));
            }
            for j in other.row_cols(i) {
                out.add_at(i, j, scale * other.get(i, j));
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> BandedMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add_identity(&mut self, s: f64) {
        for i in 0..self.n {
            self.add_at(i, i, s);
        }
    }

    /// Multiplies row `i` by `d[i]` (left product with a diagonal matrix).
    pub fn scale_rows(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.n);
        let w = self.width();
        for (i, &di) in d.iter().enumerate() {
            self.data[i * w..(i + 1) * w]
                .iter_mut()
                .for_each(|v| *v *= di);
        }
    }

    /// Multiplies column `j` by `d[j]` (right product with a diagonal matrix).
    pub fn scale_cols(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.n);
        for i in 0..self.n {
            for j in self.row_cols(i) {
                let v = self.get(i, j) * d[j];
                self.set(i, j, v);
            }
        }
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row_cols(i).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in self.row_cols(i) {
                d[i * n + j] = self.get(i, j);
            }
        }
        d
    }

    /// In-band LU factorization with partial pivoting. Row interchanges
    /// are confined to the `lower` rows below the pivot, so fill-in stays
    /// within `lower + upper` superdiagonals.
    pub fn factor(&self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.lower;
        let ku = self.upper;
        let w = 2 * kl + ku + 1;
        let mut a = vec![0.0; n * w];
        for i in 0..n {
            for j in self.row_cols(i) {
                a[i * w + j + kl - i] = self.get(i, j);
            }
        }
        let idx = |i: usize, j: usize| i * w + j + kl - i;
        let mut pivots = vec![0usize; n];
        for c in 0..n {
            let last_row = (c + kl).min(n - 1);
            let mut p = c;
            let mut best = a[idx(c, c)].abs();
            for r in c + 1..=last_row {
                let v = a[idx(r, c)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { row: c });
            }
            pivots[c] = p;
            let last_col = (c + ku + kl).min(n - 1);
            if p != c {
                for j in c..=last_col {
                    a.swap(idx(c, j), idx(p, j));
                }
            }
            let d = a[idx(c, c)];
            for r in c + 1..=last_row {
                let l = a[idx(r, c)] / d;
                a[idx(r, c)] = l;
                if l != 0.0 {
                    for j in c + 1..=last_col {
                        a[idx(r, j)] -= l * a[idx(c, j)];
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            lower: kl,
            width: w,
            reach: kl + ku,
            data: a,
            pivots: Some(pivots),
        })
    }

    /// LU without row exchanges; the factors keep the original band.
    ///
    /// Meant for matrices that are a positive diagonal scaling of a
    /// symmetric definite one, where elimination needs no pivoting.
    pub fn factor_no_pivot(&self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.lower;
        let ku = self.upper;
        let w = kl + ku + 1;
        let mut a = vec![0.0; n * w];
        for i in 0..n {
            for j in self.row_cols(i) {
                a[i * w + j + kl - i] = self.get(i, j);
            }
        }
        let idx = |i: usize, j: usize| i * w + j + kl - i;
        let scale = self.norm_inf();
        for c in 0..n {
            let d = a[idx(c, c)];
            if !(d.abs() > 1e-14 * scale) || !d.is_finite() {
                return Err(Error::Singular { row: c });
            }
            let last_row = (c + kl).min(n - 1);
            let last_col = (c + ku).min(n - 1);
            for r in c + 1..=last_row {
                let l = a[idx(r, c)] / d;
                a[idx(r, c)] = l;
                if l != 0.0 {
                    for j in c + 1..=last_col {
                        a[idx(r, j)] -= l * a[idx(c, j)];
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            lower: kl,
            width: w,
            reach: ku,
            data: a,
            pivots: None,
        })
    }
}

/// LU factors of a [`BandedMatrix`]. Read-only; solves may run
/// concurrently across right-hand sides.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    lower: usize,
    width: usize,
    reach: usize,
    data: Vec<f64>,
    pivots: Option<Vec<usize>>,
}

impl BandedLu {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.lower - i
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kl = self.lower;
        let reach = self.reach;
        for c in 0..n {
            if let Some(piv) = &self.pivots {
                let p = piv[c];
                if p != c {
                    b.swap(c, p);
                }
            }
            let bc = b[c];
            if bc != 0.0 {
                for r in c + 1..=(c + kl).min(n - 1) {
                    b[r] -= self.data[self.idx(r, c)] * bc;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                s -= self.data[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solves `A X = B` for a row-major `n x ncols` block, in place. The
    /// inner loops run along rows, so many right sides are cheap.
    pub fn solve_rows_in_place(&self, b: &mut [f64], ncols: usize) {
        assert_eq!(b.len(), self.n * ncols);
        let n = self.n;
        let kl = self.lower;
        let reach = self.reach;
        let row = |k: usize| k * ncols..(k + 1) * ncols;
        for c in 0..n {
            if let Some(piv) = &self.pivots {
                let p = piv[c];
                if p != c {
                    let (lo, hi) = b.split_at_mut(p * ncols);
                    lo[row(c)].swap_with_slice(&mut hi[..ncols]);
                }
            }
            let (head, tail) = b.split_at_mut((c + 1) * ncols);
            let bc = &head[c * ncols..];
            for r in c + 1..=(c + kl).min(n - 1) {
                let l = self.data[self.idx(r, c)];
                if l != 0.0 {
                    let off = (r - c - 1) * ncols;
                    for (x, y) in tail[off..off + ncols].iter_mut().zip(bc) {
                        *x -= l * y;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = b.split_at_mut((i + 1) * ncols);
            let bi = &mut head[i * ncols..];
            for j in i + 1..=(i + reach).min(n - 1) {
                let u = self.data[self.idx(i, j)];
                if u != 0.0 {
                    let off = (j - i - 1) * ncols;
                    for (x, y) in bi.iter_mut().zip(&tail[off..off + ncols]) {
                        *x -= u * y;
                    }
                }
            }
            let d = 1.0 / self.data[self.idx(i, i)];
            for x in bi.iter_mut() {
                *x *= d;
            }
        }
    }

    /// Solves for every column of a column-major `n x ncols` block.
    pub fn solve_columns(&self, rhs: &mut [f64], ncols: usize) {
        assert_eq!(rhs.len(), self.n * ncols);
        for col in rhs.chunks_exact_mut(self.n) {
            self.solve_in_place(col);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_block_solve_matches_single_solves() {
        let n = 30;
        let mut a = BandedMatrix::zeros(n, 3, 2);
        for i in 0..n {
            for j in i.saturating_sub(3)..=(i + 2).min(n - 1) {
                a.set(
                    i,
                    j,
                    ((i * 7 + j * 3) % 11) as f64 - 5.0 + if i == j { 0.5 } else { 0.0 },
                );
            }
        }
        let ncols = 4;
        let block: Vec<f64> = (0..n * ncols).map(|k| (k as f64 * 0.37).sin()).collect();
        let singles: Vec<Vec<f64>> = (0..ncols)
            .map(|c| (0..n).map(|r| block[r * ncols + c]).collect())
            .collect();
        for lu in [a.factor().unwrap(), a.factor_no_pivot().unwrap()] {
            let mut b = block.clone();
            lu.solve_rows_in_place(&mut b, ncols);
            for (c, rhs) in singles.iter().enumerate() {
                let x = lu.solve(rhs);
                for r in 0..n {
                    assert!((b[r * ncols + c] - x[r]).abs() < 1e-9 * (1.0 + x[r].abs()));
                }
            }
        }
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let lu = BandedMatrix::identity(7).factor().unwrap();
        let b = vec![1.0, -2.0, 3.5, 0.0, 4.0, 9.0, -1.0];
        assert_eq!(lu.solve(&b), b);
    }

    #[test]
    fn poisson_tridiagonal() {
        let n = 50;
        let a = BandedMatrix::symmetric_toeplitz(n, &[2.0, -1.0]);
        let ones = vec![1.0; n];
        let rhs = a.apply(&ones);
        let x = a.factor().unwrap().solve(&rhs);
        for v in x {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = BandedMatrix::zeros(4, 1, 1);
        assert_eq!(a.factor().unwrap_err(), Error::Singular { row: 0 });
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs a row swap.
        let mut a = BandedMatrix::zeros(2, 1, 1);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        let x = a.factor().unwrap().solve(&[2.0, 3.0]);
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn product_with_identity() {
        let a = BandedMatrix::symmetric_toeplitz(9, &[4.0, 1.0, 0.5]);
        let p = a.product(&BandedMatrix::identity(9));
        for i in 0..9 {
            for j in 0..9 {
                assert_eq!(p.get(i, j), a.get(i, j));
            }
        }
    }

    #[test]
    fn diagonal_product_is_entrywise() {
        let d1 = BandedMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let d2 = BandedMatrix::from_diagonal(&[4.0, 5.0, 6.0]);
        let p = d1.product(&d2);
        assert_eq!((p.lower(), p.upper()), (0, 0));
        assert_eq!([p.get(0, 0), p.get(1, 1), p.get(2, 2)], [4.0, 10.0, 18.0]);
    }

    #[test]
    fn band_growth_is_additive() {
        let a = BandedMatrix::zeros(10, 2, 1);
        let b = BandedMatrix::zeros(10, 1, 3);
        let p = a.product(&b);
        assert_eq!((p.lower(), p.upper()), (3, 4));
    }

    #[test]
    fn multiple_rhs_columns() {
        let a = BandedMatrix::symmetric_toeplitz(6, &[3.0, -1.0]);
        let lu = a.factor().unwrap();
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x2 = vec![-1.0, 0.0, 1.0, 0.0, -1.0, 0.0];
        let mut block: Vec<f64> = a.apply(&x1).into_iter().chain(a.apply(&x2)).collect();
        lu.solve_columns(&mut block, 2);
        for (got, want) in block.iter().zip(x1.iter().chain(&x2)) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn no_pivot_matches_pivoted_on_definite_matrix() {
        let n = 40;
        let mut a = BandedMatrix::symmetric_toeplitz(n, &[3.0, -1.2, 0.3]);
        let d: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
        a.scale_rows(&d);
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let x1 = a.factor().unwrap().solve(&rhs);
        let x2 = a.factor_no_pivot().unwrap().solve(&rhs);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-12);
        }
        assert_eq!(
            BandedMatrix::zeros(3, 1, 1).factor_no_pivot().unwrap_err(),
            Error::Singular { row: 0 }
        );
    }
}
