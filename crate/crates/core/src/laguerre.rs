//! Orthonormal Laguerre functions `l_m(ηt) = √η·exp(-ηt/2)·L_m(ηt)`,
//! forward/inverse transforms, and the running sums that turn time
//! derivatives into recurrences over the term index.

use crate::error::{Error, Result};
use crate::wavelet::SourceWavelet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaguerreParams {
    /// Transform parameter, 1/s.
    pub eta: f64,
    /// Number of series terms.
    pub n_terms: usize,
}

impl LaguerreParams {
    pub fn new(eta: f64, n_terms: usize) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::Domain(format!("eta must be positive, got {eta}")));
        }
        if n_terms == 0 {
            return Err(Error::Domain("n_terms must be at least 1".into()));
        }
        Ok(LaguerreParams { eta, n_terms })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreSeries {
    pub params: LaguerreParams,
    pub coeffs: Vec<f64>,
}

impl LaguerreSeries {
    pub fn new(params: LaguerreParams, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != params.n_terms {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for {} terms",
                coeffs.len(),
                params.n_terms
            )));
        }
        Ok(LaguerreSeries { params, coeffs })
    }

    pub fn zeros(params: LaguerreParams) -> Self {
        LaguerreSeries {
            params,
            coeffs: vec![0.0; params.n_terms],
        }
    }

    /// `Σ c_m²`, which equals `∫ g² dt` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(inverse_transform(self, &[t])?[0])
    }
}

const RESCALE: f64 = 1e150;

/// Writes `l_0(ηt) ..= l_{m_max}(ηt)` into `out` (length `m_max + 1`).
///
/// The three-term recurrence runs on the bare polynomials with a tracked
/// exponent; the `exp(-ηt/2)` weight is folded in per term so neither the
/// weight (`ηt` in the thousands) nor `L_m` leaves floating-point range.
pub fn laguerre_functions_into(eta: f64, t: f64, out: &mut [f64]) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be non-negative, got {t}")));
    }
    if out.is_empty() {
        return Ok(());
    }
    let x = eta * t;
    let sqrt_eta = eta.sqrt();
    let half_x = 0.5 * x;
    let mut log_scale = 0.0f64;
    let mut weight = sqrt_eta * (-half_x).exp();

    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = weight;
    for m in 0..out.len() - 1 {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 - x) * cur - mf * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
            weight = sqrt_eta * (log_scale - half_x).exp();
        }
        out[m + 1] = cur * weight;
    }
    Ok(())
}

pub fn laguerre_functions(eta: f64, t: f64, m_max: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; m_max + 1];
    laguerre_functions_into(eta, t, &mut out)?;
    Ok(out)
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("sample times must increase".into()));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs()) {
            return Err(Error::InvalidArgument(
                "samples must be uniformly spaced".into(),
            ));
        }
    }
    if times[0] < 0.0 {
        return Err(Error::Domain("sample times must be non-negative".into()));
    }
    Ok(dt)
}

/// Least-squares Laguerre expansion of a uniformly sampled record.
///
/// The record is taken to vanish past its last sample. Over `[0, ∞)` the
/// basis is orthonormal, so the normal matrix is the identity and the
/// least-squares coefficients reduce to inner products
/// `c_m = ∫ g(t) l_m(ηt) dt`, evaluated with the trapezoidal rule on the
/// samples. Cost is `O(N·P)` for `N` terms and `P` samples.
pub fn forward_transform(
    times: &[f64],
    values: &[f64],
    params: LaguerreParams,
) -> Result<LaguerreSeries> {
    if times.len() != values.len() {
        return Err(Error::InvalidArgument(
            "times/values length mismatch".into(),
        ));
    }
    let dt = check_uniform(times)?;
    let n = params.n_terms;
    let mut coeffs = vec![0.0; n];
    let mut basis = vec![0.0; n];
    let peak = values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let last = times.len() - 1;
    for (k, (&t, &g)) in times.iter().zip(values).enumerate() {
        // Samples far below the record's resolution contribute nothing.
        if g == 0.0 || g.abs() < 1e-300 * peak.max(1e-300) {
            continue;
        }
        let w = if k == 0 || k == last { 0.5 * dt } else { dt };
        laguerre_functions_into(params.eta, t, &mut basis)?;
        let wg = w * g;
        for (c, &l) in coeffs.iter_mut().zip(&basis) {
            *c += wg * l;
        }
    }
    Ok(LaguerreSeries { params, coeffs })
}

/// Discrete least squares on the samples alone: minimizes
/// `Σ_k (g_k - Σ_m c_m l_m(η t_k))²` through the normal equations,
/// factored by Cholesky with a `1e-14·trace/N` diagonal shift.
///
/// Forms the `N x N` normal matrix, so it is meant for modest term counts
/// and records that cover the support of every basis function.
pub fn forward_transform_lsq(
    times: &[f64],
    values: &[f64],
    params: LaguerreParams,
) -> Result<LaguerreSeries> {
    if times.len() != values.len() {
        return Err(Error::InvalidArgument(
            "times/values length mismatch".into(),
        ));
    }
    let n = params.n_terms;
    if times.len() < n {
        return Err(Error::SingularNormalEquations);
    }
    let mut gram = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut basis = vec![0.0; n];
    for (&t, &g) in times.iter().zip(values) {
        laguerre_functions_into(params.eta, t, &mut basis)?;
        for i in 0..n {
            rhs[i] += basis[i] * g;
            let bi = basis[i];
            for j in 0..=i {
                gram[i * n + j] += bi * basis[j];
            }
        }
    }
    let trace: f64 = (0..n).map(|i| gram[i * n + i]).sum();
    let max_diag = (0..n).map(|i| gram[i * n + i]).fold(0.0, f64::max);
    let jitter = 1e-14 * trace / n as f64;
    for i in 0..n {
        gram[i * n + i] += jitter;
    }
    // Cholesky, lower triangle in place.
    for j in 0..n {
        let mut d = gram[j * n + j];
        for k in 0..j {
            d -= gram[j * n + k] * gram[j * n + k];
        }
        if !(d > 1e-12 * max_diag) {
            return Err(Error::SingularNormalEquations);
        }
        let d = d.sqrt();
        gram[j * n + j] = d;
        for i in j + 1..n {
            let mut s = gram[i * n + j];
            for k in 0..j {
                s -= gram[i * n + k] * gram[j * n + k];
            }
            gram[i * n + j] = s / d;
        }
    }
    let mut y = rhs;
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= gram[i * n + k] * y[k];
        }
        y[i] = s / gram[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= gram[k * n + i] * y[k];
        }
        y[i] = s / gram[i * n + i];
    }
    Ok(LaguerreSeries { params, coeffs: y })
}

/// `g(t) = Σ_m c_m l_m(ηt)` at each requested time.
pub fn inverse_transform(series: &LaguerreSeries, times: &[f64]) -> Result<Vec<f64>> {
    let n = series.coeffs.len();
    let mut basis = vec![0.0; n];
    times
        .iter()
        .map(|&t| {
            laguerre_functions_into(series.params.eta, t, &mut basis)?;
            Ok(series.coeffs.iter().zip(&basis).map(|(c, l)| c * l).sum())
        })
        .collect()
}

/// Running sums over lower-index coefficients:
/// `Φ1(m) = √η·g(0) + η Σ_{j<m} g_j` and `Φ2(m) = η² Σ_{j<m} (m - j) g_j`.
///
/// `Φ2` is kept as two partial sums `S1 = Σ g_j`, `S2 = Σ j·g_j`, so that
/// `Φ2 = η² (m·S1 - S2)` and each update is O(1). Updates must arrive in
/// increasing `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiAccumulator {
    eta: f64,
    phi1: f64,
    s1: f64,
    s2: f64,
    m: usize,
}

impl PhiAccumulator {
    /// Accumulator at `m = 0` for a signal with initial value `g0`.
    pub fn new(eta: f64, g0: f64) -> Self {
        PhiAccumulator {
            eta,
            phi1: eta.sqrt() * g0,
            s1: 0.0,
            s2: 0.0,
            m: 0,
        }
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.eta * self.eta * (self.m as f64 * self.s1 - self.s2)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Folds in `g_{m}` and advances to `m + 1`.
    pub fn push(&mut self, g_prev: f64) {
        self.phi1 += self.eta * g_prev;
        self.s1 += g_prev;
        self.s2 += self.m as f64 * g_prev;
        self.m += 1;
    }
}

/// Relative mean-square error `‖g - Pg‖² / ‖g‖²` of the `n_terms`
/// projection of `wavelet` (sampled every `dt` over its support).
pub fn projection_error(wavelet: &SourceWavelet, params: LaguerreParams, dt: f64) -> Result<f64> {
    let half = wavelet.half_support();
    let t_start = (wavelet.t0 - half).max(0.0);
    let t_end = wavelet.t0 + half;
    let k0 = (t_start / dt).floor() as usize;
    let k1 = (t_end / dt).ceil() as usize;
    let times: Vec<f64> = (k0..=k1).map(|k| k as f64 * dt).collect();
    let values: Vec<f64> = times.iter().map(|&t| wavelet.eval(t)).collect();
    let series = forward_transform(&times, &values, params)?;
    let approx = inverse_transform(&series, &times)?;
    let num: f64 = values
        .iter()
        .zip(&approx)
        .map(|(g, a)| (g - a).powi(2))
        .sum();
    let den: f64 = values.iter().map(|g| g * g).sum();
    Ok(num / den)
}

/// `projection_error` of `wavelet` moved to arrive at `t0 = t_max`,
/// sampled at 100 points per period.
pub fn arrival_projection_error(
    wavelet: &SourceWavelet,
    t_max: f64,
    params: LaguerreParams,
) -> Result<f64> {
    if !(t_max > 0.0) {
        return Err(Error::Domain("t_max must be positive".into()));
    }
    projection_error(&wavelet.shifted(t_max), params, 1.0 / (100.0 * wavelet.f0))
}

/// Picks the smallest `η` on a geometric sweep for which the wavelet moved
/// to `t0 = t_max` is represented by `n_terms` functions with relative
/// mean-square error below `tol`.
pub fn select_eta_with(
    wavelet: &SourceWavelet,
    t_max: f64,
    n_terms: usize,
    tol: f64,
    candidates: &[f64],
) -> Result<f64> {
    let mut best = (f64::NAN, f64::INFINITY);
    for &eta in candidates {
        let err = arrival_projection_error(wavelet, t_max, LaguerreParams::new(eta, n_terms)?)?;
        if err < best.1 {
            best = (eta, err);
        }
        if err < tol {
            return Ok(eta);
        }
    }
    Err(Error::NoEtaCandidate {
        best_eta: best.0,
        best_error: best.1,
    })
}

/// Geometric candidates `lo·r^k` up to `hi`.
pub fn eta_candidates(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut eta = lo;
    while eta <= hi * (1.0 + 1e-12) {
        out.push(eta);
        eta *= ratio;
    }
    out
}

/// `select_eta_with` on the default sweep `10 · 2^(k/8)` up to `10⁵` and
/// the target error `1e-10`.
pub fn select_eta(wavelet: &SourceWavelet, t_max: f64, n_terms: usize) -> Result<f64> {
    select_eta_with(
        wavelet,
        t_max,
        n_terms,
        1e-10,
        &eta_candidates(10.0, 1e5, 2f64.powf(0.125)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l0_at_origin_is_sqrt_eta() {
        assert_eq!(laguerre_functions(4.0, 0.0, 0).unwrap(), vec![2.0]);
        for v in laguerre_functions(600.0, 0.0, 2).unwrap() {
            assert!((v - 600f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(laguerre_functions(1.0, -1.0, 3).is_err());
        assert!(laguerre_functions(0.0, 1.0, 3).is_err());
        assert!(LaguerreParams::new(-1.0, 3).is_err());
        assert!(LaguerreParams::new(1.0, 0).is_err());
    }

    #[test]
    fn no_overflow_for_large_arguments() {
        let l = laguerre_functions(600.0, 6.0, 4000).unwrap();
        assert!(l.iter().all(|v| v.is_finite()));
        // l_m is bounded by √η for every m and t.
        assert!(l.iter().all(|v| v.abs() <= 600f64.sqrt() + 1e-9));
        assert!(l[3999].abs() > 0.0);
    }

    #[test]
    fn matches_closed_form_low_orders() {
        let eta = 3.0;
        let t = 0.7;
        let x = eta * t;
        let l = laguerre_functions(eta, t, 3).unwrap();
        let w = eta.sqrt() * (-x / 2.0).exp();
        let exact = [
            1.0,
            1.0 - x,
            1.0 - 2.0 * x + x * x / 2.0,
            1.0 - 3.0 * x + 1.5 * x * x - x * x * x / 6.0,
        ];
        for (a, b) in l.iter().zip(exact) {
            assert!((a - w * b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_signal_has_zero_coefficients() {
        let p = LaguerreParams::new(10.0, 8).unwrap();
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 0.05).collect();
        let s = forward_transform(&times, &vec![0.0; 100], p).unwrap();
        assert!(s.coeffs.iter().all(|&c| c == 0.0));
        let back = inverse_transform(&LaguerreSeries::zeros(p), &[0.0, 1.0]).unwrap();
        assert_eq!(back, vec![0.0, 0.0]);
    }

    #[test]
    fn single_coefficient_at_origin() {
        let p = LaguerreParams::new(9.0, 4).unwrap();
        let s = LaguerreSeries::new(p, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((s.eval(0.0).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn lsq_rejects_underdetermined() {
        let p = LaguerreParams::new(1.0, 10).unwrap();
        let r = forward_transform_lsq(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0], p);
        assert_eq!(r.unwrap_err(), Error::SingularNormalEquations);
    }

    #[test]
    fn phi1_initial_value() {
        assert_eq!(PhiAccumulator::new(4.0, 0.0).phi1(), 0.0);
        assert_eq!(PhiAccumulator::new(4.0, 1.0).phi1(), 2.0);
    }

    #[test]
    fn phi_small_cases() {
        let mut acc = PhiAccumulator::new(1.0, 0.0);
        assert_eq!(acc.phi2(), 0.0);
        for g in [1.0, 2.0, 3.0] {
            acc.push(g);
        }
        assert_eq!(acc.phi1(), 6.0);

        let mut acc = PhiAccumulator::new(1.0, 0.0);
        acc.push(1.0);
        acc.push(1.0);
        assert_eq!(acc.phi2(), 3.0);

        let a = 1.7;
        let mut acc = PhiAccumulator::new(2.0, 0.0);
        acc.push(a);
        assert_eq!(acc.phi2(), 4.0 * a);
    }
}
