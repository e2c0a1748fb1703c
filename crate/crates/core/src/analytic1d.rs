//! Exact Laguerre coefficients of the constant-velocity 1D problem.
//!
//! Expanding `v̄^m(x)` in `l_j(κx)` with `κ = η/c` makes the spatial
//! coefficients a shifted sequence, `V^m_j = V^{m-j}_0`, with
//! `V^m_0 = κ^{-1/2}(f̄^m − f̄^{m-1})`. Each `v̄^m(x)` is then a linear
//! convolution of `V_0` with `l_j(κx)`.

use crate::error::{Error, Result};
use crate::laguerre::{laguerre_functions, laguerre_functions_into, LaguerreSeries};
use crate::numkernels::FixedConvolver;
use crate::schemes1d::{Mesh1D, Solution1D};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactSolverConfig {
    pub eta: f64,
    pub c: f64,
    pub kappa: f64,
}

impl ExactSolverConfig {
    pub fn new(eta: f64, c: f64) -> Result<Self> {
        if !(eta > 0.0) || !(c > 0.0) {
            return Err(Error::Domain(format!(
                "eta and c must be positive, got eta = {eta}, c = {c}"
            )));
        }
        Ok(ExactSolverConfig {
            eta,
            c,
            kappa: eta / c,
        })
    }

    fn validate(&self) -> Result<()> {
        let want = self.eta / self.c;
        if !((self.kappa - want).abs() <= 1e-12 * want) {
            return Err(Error::InvalidArgument(format!(
                "convolution form requires kappa = eta/c = {want}, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// `V^m_0 = κ^{-1/2}(f̄^m − f̄^{m-1})`, `f̄^{-1} = 0`.
pub fn boundary_spatial_coefficients(fbar: &LaguerreSeries, kappa: f64) -> Vec<f64> {
    let s = kappa.sqrt().recip();
    let mut prev = 0.0;
    fbar.coeffs
        .iter()
        .map(|&f| {
            let d = s * (f - prev);
            prev = f;
            d
        })
        .collect()
}

/// Evaluates `v̄^m(x)` for all `m` at many points with one cached transform.
#[derive(Debug, Clone)]
pub struct ExactSolver {
    cfg: ExactSolverConfig,
    n_terms: usize,
    eta_t: f64,
    convolver: FixedConvolver,
    basis: Vec<f64>,
}

impl ExactSolver {
    pub fn new(fbar: &LaguerreSeries, cfg: ExactSolverConfig) -> Result<Self> {
        cfg.validate()?;
        if (fbar.params.eta - cfg.eta).abs() > 1e-12 * cfg.eta {
            return Err(Error::InvalidArgument(
                "boundary series and solver use different eta".into(),
            ));
        }
        let n = fbar.params.n_terms;
        let v0 = boundary_spatial_coefficients(fbar, cfg.kappa);
        Ok(ExactSolver {
            cfg,
            n_terms: n,
            eta_t: cfg.eta,
            convolver: FixedConvolver::new(&v0, n),
            basis: vec![0.0; n],
        })
    }

    /// Writes `v̄^m(x)`, `m = 0..n_terms`, into `out`.
    pub fn coefficients_into(&mut self, x: f64, out: &mut [f64]) -> Result<()> {
        if x < 0.0 {
            return Err(Error::Domain(format!("x must be non-negative, got {x}")));
        }
        laguerre_functions_into(self.cfg.kappa, x, &mut self.basis)?;
        self.convolver.convolve_into(&self.basis, out);
        Ok(())
    }

    pub fn coefficients(&mut self, x: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_terms];
        self.coefficients_into(x, &mut out)?;
        Ok(out)
    }

    /// `u(x, t)` at each `x`.
    pub fn field(&mut self, xs: &[f64], t: f64) -> Result<Vec<f64>> {
        let lt = laguerre_functions(self.eta_t, t, self.n_terms - 1)?;
        let mut coeffs = vec![0.0; self.n_terms];
        xs.iter()
            .map(|&x| {
                self.coefficients_into(x, &mut coeffs)?;
                Ok(coeffs.iter().zip(&lt).map(|(a, b)| a * b).sum())
            })
            .collect()
    }

    /// Exact coefficients at every node of `mesh`.
    pub fn solve(&mut self, mesh: Mesh1D) -> Result<Solution1D> {
        let params = crate::laguerre::LaguerreParams::new(self.cfg.eta, self.n_terms)?;
        let mut sol = Solution1D::zeros(mesh, params);
        let n = mesh.n_nodes;
        let mut coeffs = vec![0.0; self.n_terms];
        for j in 0..n {
            self.coefficients_into(mesh.x(j), &mut coeffs)?;
            for (m, c) in coeffs.iter().enumerate() {
                sol.coeffs[m * n + j] = *c;
            }
        }
        sol.max_abs = sol.coeffs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        Ok(sol)
    }
}

/// `v̄^m(x)` for `m = 0..n_terms`.
pub fn exact_coefficients(
    fbar: &LaguerreSeries,
    cfg: ExactSolverConfig,
    x: f64,
) -> Result<Vec<f64>> {
    ExactSolver::new(fbar, cfg)?.coefficients(x)
}

/// `u(x, t)` at each `x`.
pub fn exact_field(
    fbar: &LaguerreSeries,
    cfg: ExactSolverConfig,
    xs: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    ExactSolver::new(fbar, cfg)?.field(xs, t)
}

/// Exact coefficients on every node of `mesh`.
pub fn exact_solution(
    fbar: &LaguerreSeries,
    cfg: ExactSolverConfig,
    mesh: Mesh1D,
) -> Result<Solution1D> {
    ExactSolver::new(fbar, cfg)?.solve(mesh)
}
