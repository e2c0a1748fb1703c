use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gaussian-windowed sine pulse
/// `f(t) = exp(-(2π f0 (t - t0))² / δ²) · sin(2π f0 (t - t0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceWavelet {
    /// Center time, seconds.
    pub t0: f64,
    /// Envelope width parameter (dimensionless).
    pub delta: f64,
    /// Carrier frequency, Hz.
    pub f0: f64,
}

impl Default for SourceWavelet {
    fn default() -> Self {
        SourceWavelet {
            t0: 0.2,
            delta: 4.0,
            f0: 30.0,
        }
    }
}

impl SourceWavelet {
    pub fn new(t0: f64, delta: f64, f0: f64) -> Self {
        SourceWavelet { t0, delta, f0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let phase = 2.0 * PI * self.f0 * (t - self.t0);
        (-(phase * phase) / (self.delta * self.delta)).exp() * phase.sin()
    }

    pub fn shifted(&self, t0: f64) -> Self {
        SourceWavelet { t0, ..*self }
    }

    /// Half-width of the interval outside which the envelope is below
    /// `1e-40`.
    pub fn half_support(&self) -> f64 {
        // exp(-p²/δ²) < 1e-40  <=>  p > δ·sqrt(40 ln 10)
        self.delta * (40.0 * std::f64::consts::LN_10).sqrt() / (2.0 * PI * self.f0)
    }

    /// Uniform samples `(t_k, f(t_k))` on `[0, t_end]`.
    pub fn sample(&self, dt: f64, t_end: f64) -> (Vec<f64>, Vec<f64>) {
        let n = (t_end / dt).round() as usize + 1;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let values = times.iter().map(|&t| self.eval(t)).collect();
        (times, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_center() {
        let w = SourceWavelet::default();
        assert_eq!(w.eval(0.2), 0.0);
    }

    #[test]
    fn quarter_period_value() {
        let w = SourceWavelet::default();
        let expected = (-(PI / 2.0).powi(2) / 16.0).exp();
        assert!((w.eval(0.2 + 1.0 / 120.0) - expected).abs() < 1e-12);
        assert!((expected - 0.857).abs() < 1e-3);
    }

    #[test]
    fn vanishes_at_origin() {
        let w = SourceWavelet::default();
        let (_, v) = w.sample(1e-4, 0.5);
        let peak = v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(w.eval(0.0).abs() < 1e-8 * peak);
    }
}
