//! Marching solvers for the per-term 1D equation
//! `(η/2)·v̄^m + c·∂x v̄^m + Φ1(v̄^m) = 0`, `v̄^m(0) = f̄^m`.

mod spec;

pub use spec::{
    CentralDifference, Method, MultistepKind, SchemeSpec, Stabilizer, StepWeights, AB5, AM3, AM4,
    AM5, AM6, BACKWARD1, FORWARD1, TRAPEZOID,
};

use crate::error::{Error, Result};
use crate::laguerre::{inverse_transform, LaguerreParams, LaguerreSeries};
use crate::splines::{EndCondition, SplineFilter, SplineResampler, SplineSystem};
use serde::{Deserialize, Serialize};

/// Uniform mesh `x_j = x0 + j·h`, `j = 0..n_nodes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    pub x0: f64,
    pub h: f64,
    pub n_nodes: usize,
}

impl Mesh1D {
    pub fn new(x0: f64, h: f64, n_nodes: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!(
                "mesh step must be positive, got {h}"
            )));
        }
        if n_nodes < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 nodes, got {n_nodes}"
            )));
        }
        Ok(Mesh1D { x0, h, n_nodes })
    }

    /// `[0, length]` split into `n_intervals` steps (`n_intervals + 1` nodes).
    pub fn with_intervals(length: f64, n_intervals: usize) -> Result<Self> {
        if n_intervals == 0 {
            return Err(Error::Domain("need at least one interval".into()));
        }
        Self::new(0.0, length / n_intervals as f64, n_intervals + 1)
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|j| self.x(j)).collect()
    }

    pub fn length(&self) -> f64 {
        self.h * (self.n_nodes - 1) as f64
    }
}

/// How the first nodes of a multistep march are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Startup {
    /// Crank–Nicolson on a refined sub-grid.
    CrankNicolson,
    /// Richardson-extrapolated Crank–Nicolson on a refined sub-grid.
    RichardsonCn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub startup: Startup,
    /// Sub-grid refinement of the startup march.
    pub startup_refinement: usize,
    /// Alarm when `max_j |v̄^m_j|` exceeds this multiple of `‖f̄‖₂`.
    pub alarm_factor: f64,
    pub filter_end: EndCondition,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            startup: Startup::CrankNicolson,
            startup_refinement: 8,
            alarm_factor: 1e6,
            filter_end: EndCondition::Natural,
        }
    }
}

/// Laguerre coefficients `v̄^m_j` on a mesh, stored term-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution1D {
    pub mesh: Mesh1D,
    pub params: LaguerreParams,
    /// `coeffs[m * n_nodes + j]`.
    pub coeffs: Vec<f64>,
    /// Φ1 grid after the last term was folded in.
    pub phi1: Vec<f64>,
    /// Largest `|v̄^m_j|` seen during the march.
    pub max_abs: f64,
}

impl Solution1D {
    pub fn zeros(mesh: Mesh1D, params: LaguerreParams) -> Self {
        Solution1D {
            mesh,
            params,
            coeffs: vec![0.0; mesh.n_nodes * params.n_terms],
            phi1: vec![0.0; mesh.n_nodes],
            max_abs: 0.0,
        }
    }

    pub fn row(&self, m: usize) -> &[f64] {
        let n = self.mesh.n_nodes;
        &self.coeffs[m * n..(m + 1) * n]
    }

    pub fn row_mut(&mut self, m: usize) -> &mut [f64] {
        let n = self.mesh.n_nodes;
        &mut self.coeffs[m * n..(m + 1) * n]
    }

    /// Coefficient series at node `j`.
    pub fn series_at(&self, j: usize) -> LaguerreSeries {
        let n = self.mesh.n_nodes;
        let coeffs = (0..self.params.n_terms)
            .map(|m| self.coeffs[m * n + j])
            .collect();
        LaguerreSeries {
            params: self.params,
            coeffs,
        }
    }

    /// `u(x_j, t)` at every node.
    pub fn field_at(&self, t: f64) -> Result<Vec<f64>> {
        let l = crate::laguerre::laguerre_functions(self.params.eta, t, self.params.n_terms - 1)?;
        let n = self.mesh.n_nodes;
        let mut u = vec![0.0; n];
        for (m, lm) in l.iter().enumerate() {
            for (uj, v) in u.iter_mut().zip(self.row(m)) {
                *uj += lm * v;
            }
        }
        Ok(u)
    }

    /// Time trace `u(x_j, t)` for the given times.
    pub fn trace(&self, j: usize, times: &[f64]) -> Result<Vec<f64>> {
        inverse_transform(&self.series_at(j), times)
    }
}

/// `K(x_j) = Σ_m (v̄^m_j)²`, the time-domain energy `∫ u² dt` at each node.
pub fn energy_profile(sol: &Solution1D) -> Vec<f64> {
    let mut k = vec![0.0; sol.mesh.n_nodes];
    for m in 0..sol.params.n_terms {
        for (kj, v) in k.iter_mut().zip(sol.row(m)) {
            *kj += v * v;
        }
    }
    k
}

/// `‖a − b‖₂ / ‖a‖₂`.
pub fn relative_l2(exact: &[f64], approx: &[f64]) -> Result<f64> {
    if exact.len() != approx.len() {
        return Err(Error::InvalidArgument("length mismatch".into()));
    }
    let num: f64 = exact
        .iter()
        .zip(approx)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den: f64 = exact.iter().map(|a| a * a).sum();
    if den == 0.0 {
        return Err(Error::Domain("reference field is identically zero".into()));
    }
    Ok((num / den).sqrt())
}

/// Relative L2 error of `sol` against `exact` over the mesh at time `t_eval`.
pub fn l2_error(sol: &Solution1D, exact: &Solution1D, t_eval: f64) -> Result<f64> {
    if sol.mesh != exact.mesh {
        return Err(Error::InvalidArgument(
            "solutions live on different meshes".into(),
        ));
    }
    relative_l2(&exact.field_at(t_eval)?, &sol.field_at(t_eval)?)
}

pub fn solve_1d(
    spec: SchemeSpec,
    mesh: Mesh1D,
    boundary: &LaguerreSeries,
    c: f64,
) -> Result<Solution1D> {
    solve_1d_with(spec, mesh, boundary, c, &SolveOptions::default())
}

pub fn solve_1d_with(
    spec: SchemeSpec,
    mesh: Mesh1D,
    boundary: &LaguerreSeries,
    c: f64,
    opts: &SolveOptions,
) -> Result<Solution1D> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("velocity must be positive, got {c}")));
    }
    let params = boundary.params;
    let n = mesh.n_nodes;
    let eta = params.eta;
    let threshold = opts.alarm_factor * boundary.energy().sqrt();

    let mut sol = Solution1D::zeros(mesh, params);
    let mut phi = vec![0.0; n];
    let mut phi_used = vec![0.0; n];
    let mut v = vec![0.0; n];

    let mut filter = match spec.stabilizer {
        Stabilizer::SplineFilter { degree } => Some(SplineFilter::with_end_condition(
            n,
            degree,
            opts.filter_end,
        )?),
        _ => None,
    };

    let mut kernel = Kernel::new(spec, mesh, c, eta, opts)?;

    for m in 0..params.n_terms {
        if let Some(f) = filter.as_mut() {
            f.apply_in_place(&mut phi);
        }
        let phi_march: &[f64] = match spec.stabilizer {
            Stabilizer::Inconsistent { stencil } => {
                let prev = if m > 0 { Some(sol.row(m - 1)) } else { None };
                inconsistent_phi(stencil, prev, &phi, eta, c, mesh.h, &mut phi_used);
                &phi_used
            }
            _ => &phi,
        };

        v[0] = boundary.coeffs[m];
        kernel.march(&mut v, phi_march);

        let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !peak.is_finite() || (threshold > 0.0 && peak > threshold) {
            return Err(Error::Unstable {
                term: m,
                magnitude: peak,
                threshold,
            });
        }
        sol.max_abs = sol.max_abs.max(peak);
        sol.row_mut(m).copy_from_slice(&v);
        for (p, x) in phi.iter_mut().zip(&v) {
            *p += eta * x;
        }
        kernel.advance_startup();
    }
    sol.phi1 = phi;
    Ok(sol)
}

/// Φ1 rebuilt from `v̄^{m-1}` as `(η/2)·v̄^{m-1} − c·D v̄^{m-1}` where the
/// stencil reaches; the exact accumulator elsewhere.
fn inconsistent_phi(
    stencil: CentralDifference,
    prev: Option<&[f64]>,
    acc: &[f64],
    eta: f64,
    c: f64,
    h: f64,
    out: &mut [f64],
) {
    out.copy_from_slice(acc);
    let Some(prev) = prev else { return };
    let r = stencil.reach();
    let w = stencil.half_weights();
    let n = prev.len();
    if n <= 2 * r {
        return;
    }
    for i in r..n - r {
        let d: f64 = w
            .iter()
            .enumerate()
            .map(|(k, wk)| wk * (prev[i + k + 1] - prev[i - k - 1]))
            .sum::<f64>()
            / h;
        out[i] = 0.5 * eta * prev[i] - c * d;
    }
}

/// One step of a linear multistep march:
/// `c(v_{i+1} − v_i)/h = −Σ_j w_j·((η/2)·v_{i+j} + Φ_{i+j})`.
fn multistep_march(
    weights: &[f64],
    first_offset: i32,
    c_over_h: f64,
    half_eta: f64,
    v: &mut [f64],
    phi: &[f64],
    start: usize,
) {
    let implicit = first_offset + weights.len() as i32 > 1;
    let (explicit_w, w_next) = if implicit {
        (&weights[..weights.len() - 1], *weights.last().unwrap())
    } else {
        (weights, 0.0)
    };
    let denom = c_over_h + w_next * half_eta;
    for i in start..v.len() - 1 {
        let mut rhs = c_over_h * v[i];
        for (k, w) in explicit_w.iter().enumerate() {
            let idx = (i as i64 + first_offset as i64 + k as i64) as usize;
            rhs -= w * (half_eta * v[idx] + phi[idx]);
        }
        rhs -= w_next * phi[i + 1];
        v[i + 1] = rhs / denom;
    }
}

fn cn_march(c_over_h: f64, half_eta: f64, v: &mut [f64], phi: &[f64]) {
    multistep_march(&[0.5, 0.5], 0, c_over_h, half_eta, v, phi, 0);
}

/// Crank–Nicolson on `h` and `h/2` combined into a fourth-order result.
#[derive(Debug, Clone)]
struct Richardson {
    c_over_h: f64,
    half_eta: f64,
    midpoints: SplineResampler,
    coarse: Vec<f64>,
    fine: Vec<f64>,
    phi_fine: Vec<f64>,
    phi_mid: Vec<f64>,
}

impl Richardson {
    fn new(n: usize, h: f64, c: f64, eta: f64) -> Result<Self> {
        let xs: Vec<f64> = (0..n).map(|j| j as f64).collect();
        let mids: Vec<f64> = (0..n - 1).map(|j| j as f64 + 0.5).collect();
        let midpoints = SplineSystem::new(&xs, 3, EndCondition::NotAKnot)?.resampler(&mids);
        Ok(Richardson {
            c_over_h: c / h,
            half_eta: 0.5 * eta,
            midpoints,
            coarse: vec![0.0; n],
            fine: vec![0.0; 2 * n - 1],
            phi_fine: vec![0.0; 2 * n - 1],
            phi_mid: vec![0.0; n - 1],
        })
    }

    /// `v[0]` holds the boundary value; fills the rest.
    fn march(&mut self, v: &mut [f64], phi: &[f64]) {
        self.midpoints.apply_into(phi, &mut self.phi_mid);
        for (j, p) in phi.iter().enumerate() {
            self.phi_fine[2 * j] = *p;
        }
        for (j, p) in self.phi_mid.iter().enumerate() {
            self.phi_fine[2 * j + 1] = *p;
        }
        self.coarse[0] = v[0];
        cn_march(self.c_over_h, self.half_eta, &mut self.coarse, phi);
        self.fine[0] = v[0];
        cn_march(
            2.0 * self.c_over_h,
            self.half_eta,
            &mut self.fine,
            &self.phi_fine,
        );
        for j in 1..v.len() {
            v[j] = (4.0 * self.fine[2 * j] - self.coarse[j]) / 3.0;
        }
    }
}

/// Produces the first nodes of a multistep march on a refined sub-grid with
/// its own Φ1 history.
#[derive(Debug, Clone)]
struct StartupGrid {
    nodes: usize,
    refine: usize,
    c_over_h: f64,
    half_eta: f64,
    eta: f64,
    v: Vec<f64>,
    phi: Vec<f64>,
    richardson: Option<Richardson>,
}

impl StartupGrid {
    fn new(nodes: usize, h: f64, c: f64, eta: f64, opts: &SolveOptions) -> Result<Self> {
        let refine = opts.startup_refinement.max(1);
        let len = nodes * refine + 1;
        let hf = h / refine as f64;
        let richardson = match opts.startup {
            Startup::CrankNicolson => None,
            Startup::RichardsonCn => Some(Richardson::new(len, hf, c, eta)?),
        };
        Ok(StartupGrid {
            nodes,
            refine,
            c_over_h: c / hf,
            half_eta: 0.5 * eta,
            eta,
            v: vec![0.0; len],
            phi: vec![0.0; len],
            richardson,
        })
    }

    fn fill(&mut self, v: &mut [f64]) {
        self.v[0] = v[0];
        match self.richardson.as_mut() {
            Some(r) => r.march(&mut self.v, &self.phi),
            None => cn_march(self.c_over_h, self.half_eta, &mut self.v, &self.phi),
        }
        for k in 1..=self.nodes {
            v[k] = self.v[k * self.refine];
        }
    }

    fn advance(&mut self) {
        for (p, x) in self.phi.iter_mut().zip(&self.v) {
            *p += self.eta * x;
        }
    }
}

enum Kernel {
    Multistep {
        weights: Vec<f64>,
        first_offset: i32,
        c_over_h: f64,
        half_eta: f64,
        startup: Option<StartupGrid>,
    },
    Rk4 {
        h: f64,
        c: f64,
        half_eta: f64,
        midpoints: SplineResampler,
        phi_mid: Vec<f64>,
    },
    Richardson(Richardson),
}

impl Kernel {
    fn new(spec: SchemeSpec, mesh: Mesh1D, c: f64, eta: f64, opts: &SolveOptions) -> Result<Self> {
        let n = mesh.n_nodes;
        let h = mesh.h;
        Ok(match spec.method {
            Method::Multistep(kind) => {
                let w = kind.weights();
                let history = w.history();
                let startup = if history > 0 {
                    let nodes = history.max(4);
                    if n < 2 * nodes {
                        return Err(Error::Domain(format!(
                            "{} needs at least {} nodes, got {n}",
                            spec.name(),
                            2 * nodes
                        )));
                    }
                    Some(StartupGrid::new(nodes, h, c, eta, opts)?)
                } else {
                    None
                };
                Kernel::Multistep {
                    weights: w.weights(),
                    first_offset: w.first_offset,
                    c_over_h: c / h,
                    half_eta: 0.5 * eta,
                    startup,
                }
            }
            Method::Rk4 => {
                let xs: Vec<f64> = (0..n).map(|j| j as f64).collect();
                let mids: Vec<f64> = (0..n - 1).map(|j| j as f64 + 0.5).collect();
                let degree = if n >= 6 { 5 } else { 3 };
                let midpoints =
                    SplineSystem::new(&xs, degree, EndCondition::Natural)?.resampler(&mids);
                Kernel::Rk4 {
                    h,
                    c,
                    half_eta: 0.5 * eta,
                    midpoints,
                    phi_mid: vec![0.0; n - 1],
                }
            }
            Method::RichardsonCn => Kernel::Richardson(Richardson::new(n, h, c, eta)?),
        })
    }

    /// `v[0]` holds the boundary value; fills the rest.
    fn march(&mut self, v: &mut [f64], phi: &[f64]) {
        match self {
            Kernel::Multistep {
                weights,
                first_offset,
                c_over_h,
                half_eta,
                startup,
            } => {
                let start = match startup.as_mut() {
                    Some(s) => {
                        s.fill(v);
                        s.nodes
                    }
                    None => 0,
                };
                multistep_march(weights, *first_offset, *c_over_h, *half_eta, v, phi, start);
            }
            Kernel::Rk4 {
                h,
                c,
                half_eta,
                midpoints,
                phi_mid,
            } => {
                midpoints.apply_into(phi, phi_mid);
                let k = *half_eta / *c;
                let f = |y: f64, p: f64| -k * y - p / *c;
                let h = *h;
                for i in 0..v.len() - 1 {
                    let y = v[i];
                    let k1 = f(y, phi[i]);
                    let k2 = f(y + 0.5 * h * k1, phi_mid[i]);
                    let k3 = f(y + 0.5 * h * k2, phi_mid[i]);
                    let k4 = f(y + h * k3, phi[i + 1]);
                    v[i + 1] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
            }
            Kernel::Richardson(r) => r.march(v, phi),
        }
    }

    fn advance_startup(&mut self) {
        if let Kernel::Multistep {
            startup: Some(s), ..
        } = self
        {
            s.advance();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic1d::{exact_solution, ExactSolverConfig};
    use crate::laguerre::forward_transform;
    use crate::wavelet::SourceWavelet;

    /// Short version of the standard setup: 1.5 km, 600 terms.
    fn setup() -> (LaguerreSeries, f64) {
        let params = LaguerreParams::new(600.0, 600).unwrap();
        let (t, g) = SourceWavelet::default().sample(1e-4, 1.0);
        (forward_transform(&t, &g, params).unwrap(), 3000.0)
    }

    fn error_at(spec: SchemeSpec, n_intervals: usize) -> f64 {
        let (fbar, c) = setup();
        let mesh = Mesh1D::with_intervals(1500.0, n_intervals).unwrap();
        let sol = solve_1d(spec, mesh, &fbar, c).unwrap();
        let exact = exact_solution(&fbar, ExactSolverConfig::new(600.0, c).unwrap(), mesh).unwrap();
        l2_error(&sol, &exact, 0.6).unwrap()
    }

    #[test]
    fn zero_boundary_gives_zero_solution() {
        let params = LaguerreParams::new(600.0, 50).unwrap();
        let fbar = LaguerreSeries::zeros(params);
        let mesh = Mesh1D::with_intervals(1000.0, 100).unwrap();
        for spec in [
            SchemeSpec::am5_i5(),
            SchemeSpec::am6_i7(),
            SchemeSpec::am5_d4(),
            SchemeSpec::rk4(),
            SchemeSpec::richardson_cn(),
            SchemeSpec::crank_nicolson(),
        ] {
            let sol = solve_1d(spec, mesh, &fbar, 3000.0).unwrap();
            assert!(sol.coeffs.iter().all(|&v| v == 0.0), "{spec}");
            assert!(energy_profile(&sol).iter().all(|&k| k == 0.0));
        }
    }

    #[test]
    fn boundary_node_holds_the_data() {
        let (fbar, c) = setup();
        let mesh = Mesh1D::with_intervals(1500.0, 200).unwrap();
        let sol = solve_1d(SchemeSpec::am5_i5(), mesh, &fbar, c).unwrap();
        for m in 0..fbar.params.n_terms {
            assert_eq!(sol.row(m)[0], fbar.coeffs[m]);
        }
    }

    #[test]
    fn mesh_validation() {
        assert!(Mesh1D::new(0.0, 0.0, 10).is_err());
        assert!(Mesh1D::new(0.0, 1.0, 1).is_err());
        let m = Mesh1D::with_intervals(7500.0, 2000).unwrap();
        assert_eq!(m.n_nodes, 2001);
        assert!((m.h - 3.75).abs() < 1e-12);
        assert!((m.length() - 7500.0).abs() < 1e-9);
    }

    #[test]
    fn filtration_needs_odd_node_count() {
        let (fbar, c) = setup();
        let mesh = Mesh1D::new(0.0, 5.0, 300).unwrap();
        assert!(solve_1d(SchemeSpec::am5_i5(), mesh, &fbar, c).is_err());
    }

    #[test]
    fn rejects_bad_velocity() {
        let (fbar, _) = setup();
        let mesh = Mesh1D::with_intervals(1500.0, 200).unwrap();
        assert!(solve_1d(SchemeSpec::crank_nicolson(), mesh, &fbar, 0.0).is_err());
    }

    #[test]
    fn crank_nicolson_is_second_order() {
        let e1 = error_at(SchemeSpec::crank_nicolson(), 1600);
        let e2 = error_at(SchemeSpec::crank_nicolson(), 3200);
        let p = (e1 / e2).log2();
        assert!((p - 2.0).abs() < 0.3, "order {p} ({e1:e}, {e2:e})");
    }

    #[test]
    fn stabilized_adams_converges_fast() {
        let e1 = error_at(SchemeSpec::am5_i5(), 400);
        let e2 = error_at(SchemeSpec::am5_i5(), 800);
        let p = (e1 / e2).log2();
        assert!(p > 4.3, "order {p} ({e1:e}, {e2:e})");
    }

    #[test]
    fn unfiltered_am5_trips_alarm() {
        let (fbar, c) = setup();
        let mesh = Mesh1D::with_intervals(1500.0, 400).unwrap();
        let spec = SchemeSpec::multistep(MultistepKind::Am5);
        assert!(matches!(
            solve_1d(spec, mesh, &fbar, c),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn relative_l2_guards() {
        assert_eq!(relative_l2(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(relative_l2(&[0.0, 0.0], &[1.0, 2.0]).is_err());
        assert!(relative_l2(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn inconsistent_phi_matches_stencil() {
        let prev: Vec<f64> = (0..9).map(|i| (i as f64).powi(3)).collect();
        let acc = vec![7.0; 9];
        let mut out = vec![0.0; 9];
        inconsistent_phi(
            CentralDifference::Fourth,
            Some(&prev),
            &acc,
            2.0,
            1.0,
            1.0,
            &mut out,
        );
        // D4 is exact for cubics: d/dx x³ = 3x².
        for i in 2..7 {
            let x = i as f64;
            assert!((out[i] - (x.powi(3) - 3.0 * x * x)).abs() < 1e-10);
        }
        assert_eq!([out[0], out[1], out[7], out[8]], [7.0; 4]);
    }
}
