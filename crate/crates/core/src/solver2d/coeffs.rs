use crate::numkernels::BandedMatrix;
use serde::{Deserialize, Serialize};

/// Partial-fraction coefficients of the square-root approximation
/// `√(1 - q) ≈ 1 - Σ_s β_s q / (1 - γ_s q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PadeCoefficients {
    pub gamma: [f64; 3],
    pub beta: [f64; 3],
}

impl Default for PadeCoefficients {
    /// Wide-angle set, accurate up to about 89 degrees.
    fn default() -> Self {
        PadeCoefficients {
            gamma: [0.972926132, 0.744418059, 0.150843924],
            beta: [0.004210420, 0.081312882, 0.414236605],
        }
    }
}

impl PadeCoefficients {
    pub fn ratio(&self, s: usize) -> f64 {
        self.beta[s] / self.gamma[s]
    }

    pub fn ratio_sum(&self) -> f64 {
        (0..3).map(|s| self.ratio(s)).sum()
    }

    /// `1 - Σ_s β_s q / (1 - γ_s q)`, the approximation of `√(1 - q)`.
    pub fn sqrt_approx(&self, q: f64) -> f64 {
        1.0 - (0..3)
            .map(|s| self.beta[s] * q / (1.0 - self.gamma[s] * q))
            .sum::<f64>()
    }
}

/// Symmetric second-derivative stencil
/// `(a0 f_i + Σ_j a_j (f_{i-j} + f_{i+j})) / h²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrpStencil {
    pub a0: f64,
    pub a: Vec<f64>,
}

impl Default for DrpStencil {
    /// Dispersion-optimized 13-point stencil.
    fn default() -> Self {
        DrpStencil {
            a0: -3.12513824,
            a: vec![
                1.84108651,
                -0.35706478,
                0.10185626,
                -0.02924772,
                0.00696837,
                -0.00102952,
            ],
        }
    }
}

impl DrpStencil {
    /// Plain central second difference.
    pub fn second_order() -> Self {
        DrpStencil {
            a0: -2.0,
            a: vec![1.0],
        }
    }

    pub fn half_width(&self) -> usize {
        self.a.len()
    }

    /// `a0 + 2 Σ a_j`; zero for an exact constant annihilator.
    pub fn constant_residual(&self) -> f64 {
        self.a0 + 2.0 * self.a.iter().sum::<f64>()
    }

    /// `Σ j² a_j`; one for an exact second derivative of quadratics.
    pub fn quadratic_moment(&self) -> f64 {
        self.a
            .iter()
            .enumerate()
            .map(|(j, a)| ((j + 1) * (j + 1)) as f64 * a)
            .sum()
    }

    /// `h²` times the Fourier symbol at `θ = k h`:
    /// `a0 + 2 Σ a_j cos(jθ)` (exact value `-θ²`).
    pub fn symbol(&self, theta: f64) -> f64 {
        self.a0
            + 2.0
                * self
                    .a
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a * ((j + 1) as f64 * theta).cos())
                    .sum::<f64>()
    }

    /// The operator on `n` points with zero values outside.
    pub fn matrix(&self, n: usize, h: f64) -> BandedMatrix {
        let mut stencil = Vec::with_capacity(self.a.len() + 1);
        stencil.push(self.a0);
        stencil.extend_from_slice(&self.a);
        BandedMatrix::symmetric_toeplitz(n, &stencil).scaled(1.0 / (h * h))
    }

    /// Applies the stencil to `row` with zero extension.
    pub fn apply(&self, row: &[f64], h: f64) -> Vec<f64> {
        let n = row.len();
        let inv = 1.0 / (h * h);
        (0..n)
            .map(|i| {
                let mut s = self.a0 * row[i];
                for (j, a) in self.a.iter().enumerate() {
                    let d = j + 1;
                    let left = if i >= d { row[i - d] } else { 0.0 };
                    let right = if i + d < n { row[i + d] } else { 0.0 };
                    s += a * (left + right);
                }
                s * inv
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_coefficients_in_unit_interval() {
        let p = PadeCoefficients::default();
        for s in 0..3 {
            assert!(p.gamma[s] > 0.0 && p.gamma[s] < 1.0);
            assert!(p.beta[s] > 0.0 && p.beta[s] < 1.0);
        }
        // Near-vertical propagation is reproduced.
        for q in [0.0, 0.1, 0.3] {
            assert!((p.sqrt_approx(q) - (1.0 - q).sqrt()).abs() < 1e-3);
        }
    }

    #[test]
    fn drp_invariants() {
        let d = DrpStencil::default();
        assert!(d.constant_residual().abs() < 1e-7);
        assert!((d.quadratic_moment() - 1.0).abs() < 3e-3);
        assert!((d.symbol(0.5) + 0.25).abs() < 0.01 * 0.25);
        // Optimized stencils overshoot the Taylor value at the band edge.
        assert!((d.symbol(std::f64::consts::PI) + 7.80).abs() < 0.05);
    }

    #[test]
    fn apply_matches_matrix() {
        let d = DrpStencil::default();
        let row: Vec<f64> = (0..30)
            .map(|i| ((i as f64) * 0.37).sin() + 0.1 * i as f64)
            .collect();
        let a = d.apply(&row, 2.0);
        let b = d.matrix(30, 2.0).apply(&row);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
