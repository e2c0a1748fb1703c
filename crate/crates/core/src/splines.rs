//! Odd-degree interpolating splines (cubic, quintic, septic) in B-spline
//! form, and the alternate-node spline filter that damps the highest
//! wavenumbers of a grid function.
//!
//! A spline of degree `p = 2k + 1` through `n` points has `n + p - 1`
//! B-spline coefficients when every data site is a knot. The `p - 1`
//! extra conditions are either natural (`S^(d) = 0` for `d = k+1 ..= 2k`
//! at both ends) or not-a-knot (the `k` sites next to each end are dropped
//! from the knot vector). Either way the collocation matrix is banded.

use crate::error::{Error, Result};
use crate::numkernels::{BandedLu, BandedMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum EndCondition {
    #[default]
    Natural,
    NotAKnot,
}

fn check_degree(degree: usize) -> Result<()> {
    match degree {
        3 | 5 | 7 => Ok(()),
        _ => Err(Error::InvalidArgument(format!(
            "spline degree must be 3, 5 or 7, got {degree}"
        ))),
    }
}

/// Knot span `s` with `t[s] <= x < t[s+1]`, clamped to the valid range.
fn find_span(t: &[f64], p: usize, n_basis: usize, x: f64) -> usize {
    if x >= t[n_basis] {
        return n_basis - 1;
    }
    if x <= t[p] {
        return p;
    }
    let (mut lo, mut hi) = (p, n_basis);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x < t[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Values and derivatives up to `nd` of the `p + 1` B-splines that are
/// nonzero on span `s`: `out[d][j]` is the `d`-th derivative of
/// `N_{s-p+j}` at `x`.
fn basis_derivs(t: &[f64], p: usize, s: usize, x: f64, nd: usize) -> Vec<Vec<f64>> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - t[s + 1 - j];
        right[j] = t[s + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let nd = nd.min(p);
    let mut ders = vec![vec![0.0; p + 1]; nd + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nd {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if rk >= 0 {
                let rk = rk as usize;
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize {
                k - 1
            } else {
                p - r
            };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=nd {
        for v in ders[k].iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Collocation system for a fixed set of sites, degree and end condition.
/// Factored once; each fit is one banded solve.
#[derive(Debug, Clone)]
pub struct SplineSystem {
    degree: usize,
    end: EndCondition,
    xs: Vec<f64>,
    knots: Vec<f64>,
    lu: BandedLu,
}

impl SplineSystem {
    pub fn new(xs: &[f64], degree: usize, end: EndCondition) -> Result<Self> {
        check_degree(degree)?;
        let p = degree;
        let k = (p - 1) / 2;
        let n = xs.len();
        let min_points = match end {
            EndCondition::Natural => (k + 1).max(2),
            EndCondition::NotAKnot => p + 1,
        };
        if n < min_points {
            return Err(Error::InvalidArgument(format!(
                "{n} points are too few for a degree-{p} spline"
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "spline sites must be strictly increasing".into(),
            ));
        }

        let mut knots = vec![xs[0]; p + 1];
        match end {
            EndCondition::Natural => knots.extend_from_slice(&xs[1..n - 1]),
            EndCondition::NotAKnot => knots.extend_from_slice(&xs[1 + k..n - 1 - k]),
        }
        knots.extend(std::iter::repeat_n(xs[n - 1], p + 1));
        let n_basis = knots.len() - p - 1;

        // Rows as (first column, entries).
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(n_basis);
        let end_rows = |x: f64, rows: &mut Vec<(usize, Vec<f64>)>| {
            let s = find_span(&knots, p, n_basis, x);
            let ders = basis_derivs(&knots, p, s, x, p - 1);
            for d in k + 1..=2 * k {
                rows.push((s - p, ders[d].clone()));
            }
        };
        if end == EndCondition::Natural {
            end_rows(xs[0], &mut rows);
        }
        for &x in xs {
            let s = find_span(&knots, p, n_basis, x);
            let ders = basis_derivs(&knots, p, s, x, 0);
            rows.push((s - p, ders[0].clone()));
        }
        if end == EndCondition::Natural {
            end_rows(xs[n - 1], &mut rows);
        }
        debug_assert_eq!(rows.len(), n_basis);

        let (mut lower, mut upper) = (0usize, 0usize);
        for (i, (c0, vals)) in rows.iter().enumerate() {
            for (j, &v) in vals.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let col = c0 + j;
                if col < i {
                    lower = lower.max(i - col);
                } else {
                    upper = upper.max(col - i);
                }
            }
        }
        let mut mat = BandedMatrix::zeros(n_basis, lower, upper);
        for (i, (c0, vals)) in rows.iter().enumerate() {
            for (j, &v) in vals.iter().enumerate() {
                if v != 0.0 {
                    mat.set(i, c0 + j, v);
                }
            }
        }
        let lu = mat.factor()?;
        Ok(SplineSystem {
            degree,
            end,
            xs: xs.to_vec(),
            knots,
            lu,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn sites(&self) -> &[f64] {
        &self.xs
    }

    /// B-spline coefficients interpolating `ys` at the sites.
    pub fn coefficients(&self, ys: &[f64]) -> Vec<f64> {
        assert_eq!(ys.len(), self.xs.len());
        let k = (self.degree - 1) / 2;
        let mut rhs = match self.end {
            EndCondition::Natural => {
                let mut r = vec![0.0; ys.len() + 2 * k];
                r[k..k + ys.len()].copy_from_slice(ys);
                r
            }
            EndCondition::NotAKnot => ys.to_vec(),
        };
        self.lu.solve_in_place(&mut rhs);
        rhs
    }

    pub fn fit(&self, ys: &[f64]) -> Result<SplineFit> {
        if ys.len() != self.xs.len() {
            return Err(Error::InvalidArgument("xs/ys length mismatch".into()));
        }
        Ok(SplineFit {
            degree: self.degree,
            knots: self.knots.clone(),
            coeffs: self.coefficients(ys),
            x_min: self.xs[0],
            x_max: *self.xs.last().unwrap(),
        })
    }

    /// Precomputes the evaluation weights at `targets` so that repeated
    /// resampling is a solve plus short dot products.
    pub fn resampler(self, targets: &[f64]) -> SplineResampler {
        let p = self.degree;
        let n_basis = self.knots.len() - p - 1;
        let stencils = targets
            .iter()
            .map(|&x| {
                let s = find_span(&self.knots, p, n_basis, x);
                (s - p, basis_derivs(&self.knots, p, s, x, 0).swap_remove(0))
            })
            .collect();
        SplineResampler {
            system: self,
            stencils,
        }
    }
}

/// Interpolating spline in B-spline form.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFit {
    pub degree: usize,
    knots: Vec<f64>,
    coeffs: Vec<f64>,
    x_min: f64,
    x_max: f64,
}

impl SplineFit {
    pub fn domain(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_derivative(x, 0)
    }

    /// `d`-th derivative at `x`, with `x` clamped into the domain.
    pub fn eval_derivative(&self, x: f64, d: usize) -> f64 {
        let p = self.degree;
        if d > p {
            return 0.0;
        }
        let x = x.clamp(self.x_min, self.x_max);
        let n_basis = self.coeffs.len();
        let s = find_span(&self.knots, p, n_basis, x);
        let ders = basis_derivs(&self.knots, p, s, x, d);
        ders[d]
            .iter()
            .zip(&self.coeffs[s - p..=s])
            .map(|(b, c)| b * c)
            .sum()
    }

    /// One-sided derivative from the span starting at `x` (right) or
    /// ending at `x` (left); used to measure jumps at knots.
    pub fn eval_derivative_sided(&self, x: f64, d: usize, from_right: bool) -> f64 {
        let p = self.degree;
        let n_basis = self.coeffs.len();
        let mut s = find_span(&self.knots, p, n_basis, x);
        if !from_right {
            while s > p && self.knots[s] >= x {
                s -= 1;
            }
        }
        let ders = basis_derivs(&self.knots, p, s, x, d.min(p));
        if d > p {
            return 0.0;
        }
        ders[d]
            .iter()
            .zip(&self.coeffs[s - p..=s])
            .map(|(b, c)| b * c)
            .sum()
    }
}

/// Natural spline of the given degree through `(xs, ys)`.
pub fn fit_spline(xs: &[f64], ys: &[f64], degree: usize) -> Result<SplineFit> {
    fit_spline_with(xs, ys, degree, EndCondition::Natural)
}

pub fn fit_spline_with(
    xs: &[f64],
    ys: &[f64],
    degree: usize,
    end: EndCondition,
) -> Result<SplineFit> {
    check_degree(degree)?;
    if xs.len() < degree + 1 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} points for a degree-{degree} spline",
            degree + 1
        )));
    }
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("xs/ys length mismatch".into()));
    }
    SplineSystem::new(xs, degree, end)?.fit(ys)
}

/// Fixed linear map from values at the spline sites to values at a set of
/// target points.
#[derive(Debug, Clone)]
pub struct SplineResampler {
    system: SplineSystem,
    stencils: Vec<(usize, Vec<f64>)>,
}

impl SplineResampler {
    pub fn n_sites(&self) -> usize {
        self.system.xs.len()
    }

    pub fn n_targets(&self) -> usize {
        self.stencils.len()
    }

    pub fn apply_into(&self, ys: &[f64], out: &mut [f64]) {
        let c = self.system.coefficients(ys);
        for ((c0, w), o) in self.stencils.iter().zip(out.iter_mut()) {
            *o = w.iter().zip(&c[*c0..]).map(|(a, b)| a * b).sum();
        }
    }

    /// Resamples every column of a row-major `n_sites x ncols` block into
    /// `out` (`n_targets x ncols`). `work` is scratch space.
    pub fn apply_rows_into(&self, ys: &[f64], ncols: usize, work: &mut Vec<f64>, out: &mut [f64]) {
        let n = self.system.xs.len();
        assert_eq!(ys.len(), n * ncols);
        assert_eq!(out.len(), self.stencils.len() * ncols);
        let k = (self.system.degree - 1) / 2;
        work.clear();
        match self.system.end {
            EndCondition::Natural => {
                work.resize((n + 2 * k) * ncols, 0.0);
                work[k * ncols..(k + n) * ncols].copy_from_slice(ys);
            }
            EndCondition::NotAKnot => work.extend_from_slice(ys),
        }
        self.system.lu.solve_rows_in_place(work, ncols);
        for ((c0, w), o) in self.stencils.iter().zip(out.chunks_exact_mut(ncols)) {
            o.fill(0.0);
            for (j, wj) in w.iter().enumerate() {
                let src = &work[(c0 + j) * ncols..(c0 + j + 1) * ncols];
                for (x, y) in o.iter_mut().zip(src) {
                    *x += wj * y;
                }
            }
        }
    }

    pub fn apply(&self, ys: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.stencils.len()];
        self.apply_into(ys, &mut out);
        out
    }
}

/// Alternate-node spline filter for grid functions of a fixed odd length.
///
/// Nodes `0, 2, 4, ..` are kept; every odd node is overwritten by the
/// spline through the kept nodes. The endpoints are always kept.
#[derive(Debug, Clone)]
pub struct SplineFilter {
    len: usize,
    resampler: SplineResampler,
    kept: Vec<f64>,
    replaced: Vec<f64>,
    work: Vec<f64>,
}

impl SplineFilter {
    pub fn new(len: usize, degree: usize) -> Result<Self> {
        Self::with_end_condition(len, degree, EndCondition::Natural)
    }

    pub fn with_end_condition(len: usize, degree: usize, end: EndCondition) -> Result<Self> {
        check_degree(degree)?;
        if len.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "spline filtration needs an odd number of nodes, got {len}"
            )));
        }
        if len < 7 {
            return Err(Error::InvalidArgument(format!(
                "spline filtration needs at least 7 nodes, got {len}"
            )));
        }
        let sites: Vec<f64> = (0..len).step_by(2).map(|i| i as f64).collect();
        let targets: Vec<f64> = (1..len).step_by(2).map(|i| i as f64).collect();
        let resampler = SplineSystem::new(&sites, degree, end)?.resampler(&targets);
        Ok(SplineFilter {
            len,
            kept: vec![0.0; sites.len()],
            replaced: vec![0.0; targets.len()],
            work: Vec::new(),
            resampler,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Filters `values` in place. Scratch buffers make this `&mut self`;
    /// clone the filter to run columns concurrently.
    pub fn apply_in_place(&mut self, values: &mut [f64]) {
        assert_eq!(values.len(), self.len);
        for (k, v) in self.kept.iter_mut().zip(values.iter().step_by(2)) {
            *k = *v;
        }
        self.resampler.apply_into(&self.kept, &mut self.replaced);
        for (v, r) in values.iter_mut().skip(1).step_by(2).zip(&self.replaced) {
            *v = *r;
        }
    }

    /// Filters every column of a row-major `len x ncols` grid along its
    /// rows.
    pub fn apply_columns(&mut self, values: &mut [f64], ncols: usize) {
        assert_eq!(values.len(), self.len * ncols);
        let n_kept = self.kept.len();
        let mut kept = vec![0.0; n_kept * ncols];
        for (i, dst) in kept.chunks_exact_mut(ncols).enumerate() {
            dst.copy_from_slice(&values[2 * i * ncols..(2 * i + 1) * ncols]);
        }
        let mut replaced = vec![0.0; (n_kept - 1) * ncols];
        self.resampler
            .apply_rows_into(&kept, ncols, &mut self.work, &mut replaced);
        for (i, src) in replaced.chunks_exact(ncols).enumerate() {
            values[(2 * i + 1) * ncols..(2 * i + 2) * ncols].copy_from_slice(src);
        }
    }

    /// Filters a strided sub-sequence `values[offset + i*stride]`.
    pub fn apply_strided(&mut self, values: &mut [f64], offset: usize, stride: usize) {
        for (i, k) in self.kept.iter_mut().enumerate() {
            *k = values[offset + 2 * i * stride];
        }
        self.resampler.apply_into(&self.kept, &mut self.replaced);
        for (i, r) in self.replaced.iter().enumerate() {
            values[offset + (2 * i + 1) * stride] = *r;
        }
    }
}

/// Returns a filtered copy of `values`: odd-index entries are replaced by
/// the natural spline of the given degree through the even-index entries.
pub fn spline_filter(values: &[f64], degree: usize) -> Result<Vec<f64>> {
    let mut filter = SplineFilter::new(values.len(), degree)?;
    let mut out = values.to_vec();
    filter.apply_in_place(&mut out);
    Ok(out)
}
