//! Von Neumann analysis of the 1D schemes in the term direction.
//!
//! A Fourier mode `v̄^m_j = ṽ^m·e^{ijθ}` turns a scheme into a recurrence
//! on `(ṽ^m, Φ̃^m)`. For consistent Φ1 the state matrix is
//!
//! ```text
//! [ -ηA/D   -A/D ]      D = cE/h + ηA/2,  E = e^{iθ} - 1,
//! [   η       1  ]      A(θ) = Σ_j w_j e^{ijθ}
//! ```
//!
//! with characteristic polynomial `λ² - tr·λ + det`. Its determinant
//! vanishes, so the nonzero root is `G = (E - βA)/(E + βA)`, `β = ηh/(2c)`.
//! With an inconsistent Φ1 rebuilt from `v̄^{m-1}`, the state is `ṽ` alone
//! and `G = A(d - β)/(E + βA)` where `d` is the stencil symbol times `h`.

use crate::error::{Error, Result};
use crate::schemes1d::{CentralDifference, Method, SchemeSpec, Stabilizer};
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

const UNIT_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Stable,
    NeutrallyStable,
    Unstable,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Stable => "stable",
            Classification::NeutrallyStable => "neutrally_stable",
            Classification::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub scheme: SchemeSpec,
    pub beta: f64,
    /// `(θ, |G(θ)|)`.
    pub samples: Vec<(f64, f64)>,
    pub max_abs_g: f64,
    pub min_abs_g: f64,
    pub classification: Classification,
}

impl StabilityReport {
    /// CSV with columns `theta,abs_g`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,abs_g")?;
        for (t, g) in &self.samples {
            writeln!(w, "{t:.17e},{g:.17e}")?;
        }
        Ok(())
    }
}

/// `A(θ) = Σ_j w_j e^{ijθ}` of a multistep weight set.
pub fn scheme_symbol(spec: &SchemeSpec, theta: f64) -> Result<Complex64> {
    let Method::Multistep(kind) = spec.method else {
        return Err(Error::InvalidArgument(format!(
            "{} has no single-mode symbol",
            spec.name()
        )));
    };
    let w = kind.weights();
    Ok(w.weights()
        .iter()
        .zip(w.offsets())
        .map(|(c, j)| Complex64::from_polar(*c, j as f64 * theta))
        .sum())
}

/// `h` times the symbol of the central first-derivative stencil.
pub fn difference_symbol(stencil: CentralDifference, theta: f64) -> Complex64 {
    let s: f64 = stencil
        .half_weights()
        .iter()
        .enumerate()
        .map(|(k, w)| 2.0 * w * ((k + 1) as f64 * theta).sin())
        .sum();
    Complex64::new(0.0, s)
}

/// Characteristic polynomial of the per-term recurrence, coefficients in
/// increasing degree.
pub fn characteristic_polynomial(
    spec: &SchemeSpec,
    beta: f64,
    theta: f64,
) -> Result<Vec<Complex64>> {
    if !beta.is_finite() || beta == 0.0 {
        return Err(Error::Domain(format!(
            "beta must be finite and nonzero, got {beta}"
        )));
    }
    let a = scheme_symbol(spec, theta)?;
    let e = Complex64::from_polar(1.0, theta) - 1.0;
    match spec.stabilizer {
        Stabilizer::None => {
            // State matrix scaled by h/c (η -> 2β) and multiplied through by
            // D = E + βA so that a vanishing D shows up as a vanishing
            // leading coefficient.
            let d = e + beta * a;
            let m00 = -2.0 * beta * a;
            let m01 = -a;
            let m10 = 2.0 * beta * d;
            let m11 = d;
            let tr = m00 + m11;
            let det_scaled = m00 * m11 - m01 * m10;
            let det = if d.norm() > 0.0 {
                det_scaled / d
            } else {
                det_scaled
            };
            Ok(vec![det, -tr, d])
        }
        Stabilizer::Inconsistent { stencil } => {
            let d = difference_symbol(stencil, theta);
            Ok(vec![-a * (d - beta), e + beta * a])
        }
        Stabilizer::SplineFilter { .. } => Err(Error::InvalidArgument(
            "spline filtration couples θ with π - θ; no single-mode factor".into(),
        )),
    }
}

/// Roots of `Σ c_k λ^k` from the eigenvalues of the companion matrix.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1] == Complex64::new(0.0, 0.0) {
        deg -= 1;
    }
    if deg == 0 {
        return Err(Error::DegeneratePolynomial);
    }
    let n = deg - 1;
    let lead = coeffs[n];
    let scale = coeffs[..=n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    if lead.norm() <= 1e-14 * scale {
        return Err(Error::DegeneratePolynomial);
    }
    match n {
        0 => Ok(Vec::new()),
        1 => Ok(vec![-coeffs[0] / lead]),
        _ => {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            for i in 1..n {
                m[(i, i - 1)] = Complex64::new(1.0, 0.0);
            }
            for i in 0..n {
                m[(i, n - 1)] = -coeffs[i] / lead;
            }
            Schur::new(m)
                .eigenvalues()
                .map(|v| v.iter().copied().collect())
                .ok_or(Error::DegeneratePolynomial)
        }
    }
}

/// Root of largest modulus of the characteristic polynomial.
pub fn amplification_factor(spec: &SchemeSpec, beta: f64, theta: f64) -> Result<Complex64> {
    let roots = polynomial_roots(&characteristic_polynomial(spec, beta, theta)?)?;
    roots
        .into_iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or(Error::DegeneratePolynomial)
}

/// Samples `θ_k = 2πk/n` and classifies the scheme by `max |G|`.
pub fn classify(spec: &SchemeSpec, beta: f64, n_samples: usize) -> Result<StabilityReport> {
    if n_samples < 64 {
        return Err(Error::InvalidArgument(format!(
            "need at least 64 samples, got {n_samples}"
        )));
    }
    let samples = (0..n_samples)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n_samples as f64;
            // A pole of G on the sample grid is an unbounded mode.
            match amplification_factor(spec, beta, theta) {
                Ok(g) => Ok((theta, g.norm())),
                Err(Error::DegeneratePolynomial) => Ok((theta, f64::INFINITY)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_g = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let min_abs_g = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let classification = if max_abs_g > 1.0 + UNIT_BAND {
        Classification::Unstable
    } else if min_abs_g >= 1.0 - UNIT_BAND {
        Classification::NeutrallyStable
    } else {
        Classification::Stable
    };
    Ok(StabilityReport {
        scheme: *spec,
        beta,
        samples,
        max_abs_g,
        min_abs_g,
        classification,
    })
}

/// `β = ηh/(2c)`.
pub fn beta(eta: f64, h: f64, c: f64) -> f64 {
    eta * h / (2.0 * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes1d::MultistepKind;

    fn closed_form_forward(beta: f64, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let a = (beta + 1.0 - c).powi(2) + s * s;
        let b = (beta - 1.0 + c).powi(2) + s * s;
        (a, b)
    }

    #[test]
    fn forward_at_zero_is_minus_one() {
        for beta in [0.1, 1.0, 7.0] {
            let g = amplification_factor(&SchemeSpec::forward1(), beta, 0.0).unwrap();
            assert!((g - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn forward_matches_closed_form() {
        for beta in [0.05, 0.5, 3.0] {
            for k in 1..200 {
                let theta = 2.0 * PI * k as f64 / 200.0;
                let (a, b) = closed_form_forward(beta, theta);
                let g = amplification_factor(&SchemeSpec::forward1(), beta, theta).unwrap();
                assert!((g.norm_sqr() - a / b).abs() < 1e-12 * (a / b));
            }
        }
    }

    #[test]
    fn companion_roots_of_known_cubic() {
        // (λ-1)(λ-2)(λ+3) = λ³ - 7λ + 6
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut r: Vec<f64> = polynomial_roots(&[c(6.0), c(-7.0), c(0.0), c(1.0)])
            .unwrap()
            .iter()
            .map(|z| z.re)
            .collect();
        r.sort_by(f64::total_cmp);
        for (x, y) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn pole_of_forward_scheme_is_degenerate() {
        // E + β = 0 at θ = π, β = 2.
        assert_eq!(
            amplification_factor(&SchemeSpec::forward1(), 2.0, PI),
            Err(Error::DegeneratePolynomial)
        );
    }

    #[test]
    fn pole_on_the_sample_grid_classifies_unstable() {
        let r = classify(&SchemeSpec::forward1(), 2.0, 256).unwrap();
        assert_eq!(r.classification, Classification::Unstable);
        assert!(r.max_abs_g.is_infinite());
    }

    #[test]
    fn degenerate_polynomial_rejected() {
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(polynomial_roots(&[z, z]), Err(Error::DegeneratePolynomial));
    }

    #[test]
    fn adams_conclusions() {
        let am = |k| SchemeSpec::multistep(k);
        for beta in [0.1, 0.5, 2.0] {
            let r3 = classify(&am(MultistepKind::Am3), beta, 256).unwrap();
            let r4 = classify(&am(MultistepKind::Am4), beta, 256).unwrap();
            assert_eq!(r3.classification, Classification::Unstable);
            assert_eq!(r4.classification, Classification::Unstable);
            let r3n = classify(&am(MultistepKind::Am3), -beta, 256).unwrap();
            let r4n = classify(&am(MultistepKind::Am4), -beta, 256).unwrap();
            assert_ne!(r3n.classification, Classification::Unstable);
            assert_ne!(r4n.classification, Classification::Unstable);
            for k in [MultistepKind::Am5, MultistepKind::Am6] {
                assert_eq!(
                    classify(&am(k), beta, 256).unwrap().classification,
                    Classification::Unstable
                );
                assert_eq!(
                    classify(&am(k), -beta, 256).unwrap().classification,
                    Classification::Unstable
                );
            }
        }
    }

    #[test]
    fn inconsistent_stencils() {
        let d4 = SchemeSpec::am5_d4();
        let d6 = d4.with_stabilizer(Stabilizer::Inconsistent {
            stencil: CentralDifference::Sixth,
        });
        for beta in [0.1, 0.25, 0.375, 0.5, 0.75] {
            let r4 = classify(&d4, beta, 512).unwrap();
            let r6 = classify(&d6, beta, 512).unwrap();
            assert_ne!(r4.classification, Classification::Unstable, "beta {beta}");
            assert_eq!(r6.classification, Classification::Unstable, "beta {beta}");
        }
    }

    #[test]
    fn unsupported_methods_error() {
        assert!(amplification_factor(&SchemeSpec::rk4(), 0.5, 1.0).is_err());
        assert!(amplification_factor(&SchemeSpec::am5_i5(), 0.5, 1.0).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = classify(&SchemeSpec::crank_nicolson(), 1.0, 64).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("theta,abs_g\n"));
        assert_eq!(s.lines().count(), 65);
    }
}
