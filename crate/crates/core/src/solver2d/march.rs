use super::coeffs::{DrpStencil, PadeCoefficients};
use super::model::VelocityModel2D;
use super::operators::{reduced_rhs, ReducedSystem, RowOperators};
use crate::error::{Error, Result};
use crate::laguerre::{forward_transform, laguerre_functions, LaguerreParams, LaguerreSeries};
use crate::schemes1d::{AB5, AM5};
use crate::splines::SplineFilter;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method2D {
    /// Implicit fifth-order Adams–Moulton through the reduced system.
    AdamsMoulton,
    /// Fifth-order Adams–Bashforth prediction, Adams–Moulton correction.
    PredictorCorrector,
}

impl Method2D {
    pub fn name(&self) -> &'static str {
        match self {
            Method2D::AdamsMoulton => "AM5-I5",
            Method2D::PredictorCorrector => "PC5-I5",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AM" | "AM5" | "AM5-I5" => Some(Method2D::AdamsMoulton),
            "PC" | "PC5" | "PC5-I5" => Some(Method2D::PredictorCorrector),
            _ => None,
        }
    }

    /// Empirical largest stable `h_z/h_x`.
    pub fn ratio_limit(&self) -> f64 {
        match self {
            Method2D::AdamsMoulton => 0.4,
            Method2D::PredictorCorrector => 0.3,
        }
    }
}

/// One-step scheme for the first depth rows, run on a refined sub-grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Starter2D {
    BackwardEuler,
    CrankNicolson,
}

impl Starter2D {
    fn weight(&self) -> f64 {
        match self {
            Starter2D::BackwardEuler => 1.0,
            Starter2D::CrankNicolson => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solver2DConfig {
    pub method: Method2D,
    pub starter: Starter2D,
    pub startup_refinement: usize,
    /// Spline degree of the depth filtration; `None` disables it.
    pub filter_degree: Option<usize>,
    /// Also filter the `Φ1(ψ̄_s)` sums. Without it, odd-even depth modes
    /// survive in `Φ1(ψ̄_s) ≈ -(β_s/γ_s)Φ1(ū)` at high lateral wavenumbers.
    pub filter_phi1_psi: bool,
    pub alarm_factor: f64,
    pub pade: PadeCoefficients,
    pub drp: DrpStencil,
}

impl Default for Solver2DConfig {
    fn default() -> Self {
        Solver2DConfig {
            method: Method2D::PredictorCorrector,
            starter: Starter2D::CrankNicolson,
            startup_refinement: 8,
            filter_degree: Some(5),
            filter_phi1_psi: true,
            alarm_factor: 1e6,
            pade: PadeCoefficients::default(),
            drp: DrpStencil::default(),
        }
    }
}

/// Laguerre coefficients of the surface data, `coeffs[m * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData2D {
    pub params: LaguerreParams,
    pub nx: usize,
    pub coeffs: Vec<f64>,
}

impl BoundaryData2D {
    pub fn zeros(params: LaguerreParams, nx: usize) -> Self {
        BoundaryData2D {
            params,
            nx,
            coeffs: vec![0.0; params.n_terms * nx],
        }
    }

    /// A single series placed at surface node `i`.
    pub fn point_source(nx: usize, i: usize, series: &LaguerreSeries) -> Result<Self> {
        if i >= nx {
            return Err(Error::InvalidArgument(format!(
                "source node {i} outside 0..{nx}"
            )));
        }
        let mut b = Self::zeros(series.params, nx);
        for (m, c) in series.coeffs.iter().enumerate() {
            b.coeffs[m * nx + i] = *c;
        }
        Ok(b)
    }

    /// The series spread over the surface with a Gaussian taper
    /// `exp(-(i - center)²/(2σ²))`, `σ` in grid cells. A single-node source
    /// (`σ = 0`) excites the spurious slow modes of the real rational
    /// square-root approximation strongly; a taper of a few cells keeps
    /// the wavefield dominated by the physical front.
    pub fn gaussian_source(
        nx: usize,
        center: usize,
        sigma: f64,
        series: &LaguerreSeries,
    ) -> Result<Self> {
        if sigma == 0.0 {
            return Self::point_source(nx, center, series);
        }
        if !(sigma > 0.0) || center >= nx {
            return Err(Error::InvalidArgument(format!(
                "bad source taper: center {center} of {nx}, sigma {sigma}"
            )));
        }
        let taper: Vec<f64> = (0..nx)
            .map(|i| {
                let d = (i as f64 - center as f64) / sigma;
                (-0.5 * d * d).exp()
            })
            .collect();
        let mut b = Self::zeros(series.params, nx);
        for (row, c) in b.coeffs.chunks_exact_mut(nx).zip(&series.coeffs) {
            for (v, w) in row.iter_mut().zip(&taper) {
                *v = c * w;
            }
        }
        Ok(b)
    }

    /// Transforms surface traces sampled every `dt` from `t = 0`,
    /// `traces[it * nx + i]`.
    pub fn from_traces(
        traces: &[f64],
        nt: usize,
        nx: usize,
        dt: f64,
        params: LaguerreParams,
    ) -> Result<Self> {
        if traces.len() != nt * nx {
            return Err(Error::InvalidArgument(format!(
                "{} samples for {nt} x {nx} traces",
                traces.len()
            )));
        }
        let times: Vec<f64> = (0..nt).map(|k| k as f64 * dt).collect();
        let mut b = Self::zeros(params, nx);
        let mut column = vec![0.0; nt];
        for i in 0..nx {
            for (it, v) in column.iter_mut().enumerate() {
                *v = traces[it * nx + i];
            }
            if column.iter().all(|v| *v == 0.0) {
                continue;
            }
            let s = forward_transform(&times, &column, params)?;
            for (m, c) in s.coeffs.iter().enumerate() {
                b.coeffs[m * nx + i] = *c;
            }
        }
        Ok(b)
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.coeffs[m * self.nx..(m + 1) * self.nx]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Fields of the current term and the running sums over earlier terms,
/// all stored depth-row-major (`[k * nx + i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct WavefieldState2D {
    pub nx: usize,
    pub nz: usize,
    /// Index of the term being computed.
    pub m: usize,
    pub u: Vec<f64>,
    pub psi: [Vec<f64>; 3],
    /// `Φ1(ū)`, filtered in place.
    pub phi1_u: Vec<f64>,
    /// `Φ1(ψ̄_s)`, filtered unless disabled in the config.
    pub phi1_psi: [Vec<f64>; 3],
    /// `Φ2(ψ̄_s)`, filtered in place.
    pub phi2_psi: [Vec<f64>; 3],
    /// `η̃Θ + Φ1(Θ)` per completed row, `Θ = -Ū + Σ Ψ̄_s`.
    pub theta_rhs: Vec<f64>,
}

impl WavefieldState2D {
    pub fn new(nx: usize, nz: usize) -> Self {
        let g = || vec![0.0; nx * nz];
        WavefieldState2D {
            nx,
            nz,
            m: 0,
            u: g(),
            psi: [g(), g(), g()],
            phi1_u: g(),
            phi1_psi: [g(), g(), g()],
            phi2_psi: [g(), g(), g()],
            theta_rhs: g(),
        }
    }

    fn range(&self, k: usize) -> std::ops::Range<usize> {
        k * self.nx..(k + 1) * self.nx
    }

    pub fn u_row(&self, k: usize) -> &[f64] {
        &self.u[self.range(k)]
    }

    /// `Φ1(Θ)` at row `k`.
    pub fn phi1_theta_row(&self, k: usize) -> Vec<f64> {
        let r = self.range(k);
        (0..self.nx)
            .map(|i| {
                let j = r.start + i;
                -self.phi1_u[j] + self.phi1_psi[0][j] + self.phi1_psi[1][j] + self.phi1_psi[2][j]
            })
            .collect()
    }

    /// Recomputes `theta_rhs` at row `k` from the stored fields.
    pub fn update_theta_row(&mut self, k: usize, eta_t: f64) {
        let r = self.range(k);
        for j in r {
            let theta = -self.u[j] + self.psi[0][j] + self.psi[1][j] + self.psi[2][j];
            let phi =
                -self.phi1_u[j] + self.phi1_psi[0][j] + self.phi1_psi[1][j] + self.phi1_psi[2][j];
            self.theta_rhs[j] = eta_t * theta + phi;
        }
    }

    /// Folds the finished term into the running sums and moves to `m + 1`.
    pub fn advance(&mut self, eta: f64) {
        for (p, v) in self.phi1_u.iter_mut().zip(&self.u) {
            *p += eta * v;
        }
        for s in 0..3 {
            for ((p1, p2), v) in self.phi1_psi[s]
                .iter_mut()
                .zip(self.phi2_psi[s].iter_mut())
                .zip(&self.psi[s])
            {
                *p1 += eta * v;
                *p2 += eta * *p1;
            }
        }
        self.m += 1;
    }
}

/// Spline filtration along depth of `Φ1(ū)` and each `Φ2(ψ̄_s)`, column by
/// column, and of each `Φ1(ψ̄_s)` when `with_phi1_psi` is set.
pub fn filter_phi_fields(
    state: &mut WavefieldState2D,
    filter: &mut SplineFilter,
    with_phi1_psi: bool,
) -> Result<()> {
    if filter.len() != state.nz {
        return Err(Error::InvalidArgument(format!(
            "filter built for {} rows, state has {}",
            filter.len(),
            state.nz
        )));
    }
    let nx = state.nx;
    filter.apply_columns(&mut state.phi1_u, nx);
    for s in 0..3 {
        filter.apply_columns(&mut state.phi2_psi[s], nx);
        if with_phi1_psi {
            filter.apply_columns(&mut state.phi1_psi[s], nx);
        }
    }
    Ok(())
}

/// Distinct velocity rows and their operators.
#[derive(Debug, Clone, Default)]
struct OperatorPool {
    ops: Vec<RowOperators>,
    lookup: HashMap<Vec<u64>, usize>,
}

impl OperatorPool {
    fn index(
        &mut self,
        c: &[f64],
        hx: f64,
        eta_t: f64,
        pade: &PadeCoefficients,
        drp: &DrpStencil,
    ) -> Result<usize> {
        let key: Vec<u64> = c.iter().map(|v| v.to_bits()).collect();
        if let Some(&i) = self.lookup.get(&key) {
            return Ok(i);
        }
        self.ops.push(RowOperators::new(c, hx, eta_t, pade, drp)?);
        let i = self.ops.len() - 1;
        self.lookup.insert(key, i);
        Ok(i)
    }
}

/// First rows of each term from a one-step scheme on depth step
/// `h_z / refine`, with its own history of earlier terms.
#[derive(Debug, Clone)]
struct StartupGrid {
    refine: usize,
    hf: f64,
    weight: f64,
    state: WavefieldState2D,
    /// Pool index per fine row.
    rows: Vec<usize>,
    reduced: HashMap<usize, ReducedSystem>,
}

const START_ROWS: usize = 4;

/// Depth-marching solver for one velocity model.
#[derive(Debug, Clone)]
pub struct Solver2D {
    model: VelocityModel2D,
    cfg: Solver2DConfig,
    eta: f64,
    eta_t: f64,
    pool: OperatorPool,
    rows: Vec<usize>,
    reduced: HashMap<usize, ReducedSystem>,
    startup: StartupGrid,
    filter: Option<SplineFilter>,
}

/// Result of a full run.
#[derive(Debug, Clone, PartialEq)]
pub struct Run2DOutput {
    /// `(t, u(x, z, t))` on the model grid, `[k * nx + i]`.
    pub snapshots: Vec<(f64, Vec<f64>)>,
    /// `max_{m, i} |Ū^m_{ik}|` per depth row.
    pub max_abs_by_depth: Vec<f64>,
    pub max_abs: f64,
    pub terms: usize,
}

impl Solver2D {
    pub fn new(model: VelocityModel2D, eta: f64, cfg: Solver2DConfig) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::Domain(format!("eta must be positive, got {eta}")));
        }
        let (nx, nz) = (model.nx, model.nz);
        let n_drp = cfg.drp.half_width();
        if nx <= 2 * n_drp {
            return Err(Error::Domain(format!(
                "need more than {} lateral nodes, got {nx}",
                2 * n_drp
            )));
        }
        if nz < START_ROWS + 2 {
            return Err(Error::Domain(format!(
                "need at least {} depth rows, got {nz}",
                START_ROWS + 2
            )));
        }
        let ratio = model.hz / model.hx;
        if ratio >= cfg.method.ratio_limit() {
            log::warn!(
                "h_z/h_x = {ratio:.3} is at or above the empirical limit {} for {}",
                cfg.method.ratio_limit(),
                cfg.method.name()
            );
        }
        let eta_t = 0.5 * eta;
        let mut pool = OperatorPool::default();
        let mut rows = Vec::with_capacity(nz);
        for k in 0..nz {
            rows.push(pool.index(model.row(k), model.hx, eta_t, &cfg.pade, &cfg.drp)?);
        }

        let mut reduced = HashMap::new();
        if cfg.method == Method2D::AdamsMoulton {
            let a = AM5.implicit_weight();
            for &p in &rows[1..] {
                if let std::collections::hash_map::Entry::Vacant(e) = reduced.entry(p) {
                    e.insert(ReducedSystem::new(
                        &pool.ops[p],
                        &cfg.pade,
                        eta_t,
                        a,
                        model.hz,
                    )?);
                }
            }
        }

        let refine = cfg.startup_refinement.max(1);
        let fine_rows = START_ROWS * refine + 1;
        let hf = model.hz / refine as f64;
        let mut srows = Vec::with_capacity(fine_rows);
        let mut cbuf = vec![0.0; nx];
        for j in 0..fine_rows {
            let k0 = j / refine;
            let frac = (j % refine) as f64 / refine as f64;
            let k1 = (k0 + 1).min(nz - 1);
            for (i, c) in cbuf.iter_mut().enumerate() {
                *c = if frac == 0.0 {
                    model.at(i, k0)
                } else {
                    (1.0 - frac) * model.at(i, k0) + frac * model.at(i, k1)
                };
            }
            srows.push(pool.index(&cbuf, model.hx, eta_t, &cfg.pade, &cfg.drp)?);
        }
        let weight = cfg.starter.weight();
        let mut sreduced = HashMap::new();
        for &p in &srows[1..] {
            if let std::collections::hash_map::Entry::Vacant(e) = sreduced.entry(p) {
                e.insert(ReducedSystem::new(
                    &pool.ops[p],
                    &cfg.pade,
                    eta_t,
                    weight,
                    hf,
                )?);
            }
        }
        let startup = StartupGrid {
            refine,
            hf,
            weight,
            state: WavefieldState2D::new(nx, fine_rows),
            rows: srows,
            reduced: sreduced,
        };

        let filter = match cfg.filter_degree {
            Some(d) => Some(SplineFilter::new(nz, d)?),
            None => None,
        };

        Ok(Solver2D {
            model,
            cfg,
            eta,
            eta_t,
            pool,
            rows,
            reduced,
            startup,
            filter,
        })
    }

    pub fn model(&self) -> &VelocityModel2D {
        &self.model
    }

    pub fn config(&self) -> &Solver2DConfig {
        &self.cfg
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Operators of depth row `k`.
    pub fn row_operators(&self, k: usize) -> &RowOperators {
        &self.pool.ops[self.rows[k]]
    }

    /// Number of distinct velocity rows (and operator sets) in use.
    pub fn distinct_rows(&self) -> usize {
        self.pool.ops.len()
    }

    pub fn new_state(&self) -> WavefieldState2D {
        WavefieldState2D::new(self.model.nx, self.model.nz)
    }

    fn f_psi(&self, state: &WavefieldState2D, k: usize) -> [Vec<f64>; 3] {
        let r = state.range(k);
        let s = 1.0 / (self.eta_t * self.eta_t);
        std::array::from_fn(|q| state.phi2_psi[q][r.clone()].iter().map(|v| v * s).collect())
    }

    /// `(c/h_z) U_k + Σ_{i=-3}^{0} α_i R_{k+i}/720 + α_1 Φ1(Θ)_{k+1}/720`
    /// with `c` from row `k + 1`.
    fn f_u(&self, state: &WavefieldState2D, k: usize) -> Vec<f64> {
        let nx = state.nx;
        let c = &self.pool.ops[self.rows[k + 1]].c;
        let w = AM5.weights();
        let hz = self.model.hz;
        let phi_next = state.phi1_theta_row(k + 1);
        let mut f: Vec<f64> = (0..nx).map(|i| c[i] / hz * state.u[k * nx + i]).collect();
        for (q, wq) in w[..4].iter().enumerate() {
            let kk = k + q - 3;
            for (i, fi) in f.iter_mut().enumerate() {
                *fi += wq * state.theta_rhs[kk * nx + i];
            }
        }
        for (fi, p) in f.iter_mut().zip(&phi_next) {
            *fi += w[4] * p;
        }
        f
    }

    fn finish_row(&self, state: &mut WavefieldState2D, k: usize) {
        state.update_theta_row(k, self.eta_t);
    }

    /// Adams–Moulton step from row `k` to `k + 1` through the reduced
    /// system, then `Ψ` from `M_s Ψ_s = (-β_s c² L_x U + Φ2)/η̃²`.
    pub fn am_downward_step(&self, state: &mut WavefieldState2D, k: usize) -> Result<()> {
        if k < 3 || k + 1 >= state.nz {
            return Err(Error::InvalidArgument(format!(
                "AM step needs 3 <= k < nz - 1, got {k}"
            )));
        }
        let p = self.rows[k + 1];
        let ops = &self.pool.ops[p];
        let system = match self.reduced.get(&p) {
            Some(s) => s,
            None => {
                return Err(Error::InvalidArgument(
                    "solver was built without the reduced systems".into(),
                ))
            }
        };
        let f_u = self.f_u(state, k);
        let f_psi = self.f_psi(state, k + 1);
        let nx = state.nx;
        let mut u = vec![0.0; nx];
        reduced_rhs(
            ops,
            self.eta_t,
            system.weight,
            &f_u,
            [&f_psi[0], &f_psi[1], &f_psi[2]],
            &mut u,
        );
        system.lu.solve_in_place(&mut u);
        let lap_u = ops.lap.apply(&u);
        let r = state.range(k + 1);
        for s in 0..3 {
            ops.psi_from_lap(
                &self.cfg.pade,
                s,
                &lap_u,
                &f_psi[s],
                &mut state.psi[s][r.clone()],
            );
        }
        state.u[r].copy_from_slice(&u);
        self.finish_row(state, k + 1);
        Ok(())
    }

    /// Predictor–corrector step from row `k` to `k + 1`.
    pub fn pc_downward_step(&self, state: &mut WavefieldState2D, k: usize) -> Result<()> {
        self.pc_downward_step_with(state, k, 1)
    }

    /// Predictor–corrector step with `corrections` rounds of "Ψ from Ū,
    /// then Ū from Ψ" after the first correction. The iteration converges
    /// to the Adams–Moulton step.
    pub fn pc_downward_step_with(
        &self,
        state: &mut WavefieldState2D,
        k: usize,
        corrections: usize,
    ) -> Result<()> {
        if k < 4 || k + 1 >= state.nz {
            return Err(Error::InvalidArgument(format!(
                "PC step needs 4 <= k < nz - 1, got {k}"
            )));
        }
        let nx = state.nx;
        let ops = &self.pool.ops[self.rows[k + 1]];
        let pade = &self.cfg.pade;
        let hz = self.model.hz;
        let a = AM5.implicit_weight();
        let ae = a * self.eta_t;

        // Predictor.
        let wb = AB5.weights();
        let mut u_pred: Vec<f64> = (0..nx).map(|i| state.u[k * nx + i]).collect();
        for (q, wq) in wb.iter().enumerate() {
            let kk = k + q - 4;
            for (i, up) in u_pred.iter_mut().enumerate() {
                *up += wq * hz / ops.c[i] * state.theta_rhs[kk * nx + i];
            }
        }
        let f_psi = self.f_psi(state, k + 1);
        let mut psi: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; nx]);
        for s in 0..3 {
            ops.psi_from_u(pade, s, &u_pred, &f_psi[s], &mut psi[s]);
        }

        // Corrector with the predicted Ψ, then final Ψ and Ū.
        let f_u = self.f_u(state, k);
        let correct = |psi: &[Vec<f64>; 3], out: &mut [f64]| {
            for i in 0..nx {
                let sum = psi[0][i] + psi[1][i] + psi[2][i];
                out[i] = (f_u[i] + ae * sum) / (ops.c[i] / hz + ae);
            }
        };
        let mut u = vec![0.0; nx];
        correct(&psi, &mut u);
        for _ in 0..corrections {
            for s in 0..3 {
                ops.psi_from_u(pade, s, &u, &f_psi[s], &mut psi[s]);
            }
            correct(&psi, &mut u);
        }

        let r = state.range(k + 1);
        state.u[r.clone()].copy_from_slice(&u);
        for s in 0..3 {
            state.psi[s][r.clone()].copy_from_slice(&psi[s]);
        }
        self.finish_row(state, k + 1);
        Ok(())
    }

    /// Sets row 0 from the boundary data for the current term.
    fn surface_row(&self, state: &mut WavefieldState2D, row: &[f64], pool_idx: usize) {
        let ops = &self.pool.ops[pool_idx];
        let f_psi = self.f_psi(state, 0);
        let nx = state.nx;
        state.u[..nx].copy_from_slice(row);
        for s in 0..3 {
            ops.psi_from_u(&self.cfg.pade, s, row, &f_psi[s], &mut state.psi[s][..nx]);
        }
        state.update_theta_row(0, self.eta_t);
    }

    /// Rows `1..=4` of the current term from the refined one-step march.
    /// Row 0 of `state` must already hold the surface data.
    pub fn startup_rows(&mut self, state: &mut WavefieldState2D) -> Result<()> {
        let nx = state.nx;
        let eta_t = self.eta_t;
        let pade = self.cfg.pade;
        let surface: Vec<f64> = state.u[..nx].to_vec();
        let fine = &mut self.startup.state;
        let first = self.startup.rows[0];
        {
            let ops = &self.pool.ops[first];
            let s2 = 1.0 / (eta_t * eta_t);
            fine.u[..nx].copy_from_slice(&surface);
            for s in 0..3 {
                let f: Vec<f64> = fine.phi2_psi[s][..nx].iter().map(|v| v * s2).collect();
                ops.psi_from_u(&pade, s, &surface, &f, &mut fine.psi[s][..nx]);
            }
            fine.update_theta_row(0, eta_t);
        }
        let w = self.startup.weight;
        let hf = self.startup.hf;
        let mut f_u = vec![0.0; nx];
        let mut u = vec![0.0; nx];
        for j in 0..fine.nz - 1 {
            let p = self.startup.rows[j + 1];
            let ops = &self.pool.ops[p];
            let system = &self.startup.reduced[&p];
            let phi_next = fine.phi1_theta_row(j + 1);
            for i in 0..nx {
                f_u[i] = ops.c[i] / hf * fine.u[j * nx + i]
                    + (1.0 - w) * fine.theta_rhs[j * nx + i]
                    + w * phi_next[i];
            }
            let s2 = 1.0 / (eta_t * eta_t);
            let r = fine.range(j + 1);
            let f_psi: [Vec<f64>; 3] = std::array::from_fn(|q| {
                fine.phi2_psi[q][r.clone()].iter().map(|v| v * s2).collect()
            });
            reduced_rhs(
                ops,
                eta_t,
                w,
                &f_u,
                [&f_psi[0], &f_psi[1], &f_psi[2]],
                &mut u,
            );
            system.lu.solve_in_place(&mut u);
            let lap_u = ops.lap.apply(&u);
            for s in 0..3 {
                ops.psi_from_lap(&pade, s, &lap_u, &f_psi[s], &mut fine.psi[s][r.clone()]);
            }
            fine.u[r].copy_from_slice(&u);
            fine.update_theta_row(j + 1, eta_t);
        }
        let refine = self.startup.refine;
        for k in 1..=START_ROWS {
            let src = fine.range(k * refine);
            let dst = state.range(k);
            state.u[dst.clone()].copy_from_slice(&fine.u[src.clone()]);
            for s in 0..3 {
                state.psi[s][dst.clone()].copy_from_slice(&fine.psi[s][src.clone()]);
            }
            state.update_theta_row(k, eta_t);
        }
        Ok(())
    }

    /// Computes all rows of term `state.m` (filtration included), without
    /// folding it into the running sums.
    pub fn solve_term(&mut self, state: &mut WavefieldState2D, surface: &[f64]) -> Result<()> {
        if let Some(f) = self.filter.as_mut() {
            filter_phi_fields(state, f, self.cfg.filter_phi1_psi)?;
        }
        let p0 = self.rows[0];
        self.surface_row(state, surface, p0);
        self.startup_rows(state)?;
        for k in START_ROWS..state.nz - 1 {
            match self.cfg.method {
                Method2D::AdamsMoulton => self.am_downward_step(state, k)?,
                Method2D::PredictorCorrector => self.pc_downward_step(state, k)?,
            }
        }
        Ok(())
    }

    /// Folds the finished term into both the main and the startup sums.
    pub fn advance(&mut self, state: &mut WavefieldState2D) {
        state.advance(self.eta);
        self.startup.state.advance(self.eta);
    }

    /// Runs every term of `boundary` and returns snapshots at `times`.
    pub fn run(&mut self, boundary: &BoundaryData2D, times: &[f64]) -> Result<Run2DOutput> {
        self.run_with(boundary, times, |_, _| {})
    }

    /// As [`Solver2D::run`], calling `observe(m, state)` after each term.
    pub fn run_with<F>(
        &mut self,
        boundary: &BoundaryData2D,
        times: &[f64],
        mut observe: F,
    ) -> Result<Run2DOutput>
    where
        F: FnMut(usize, &WavefieldState2D),
    {
        let (nx, nz) = (self.model.nx, self.model.nz);
        if boundary.nx != nx {
            return Err(Error::InvalidArgument(format!(
                "boundary has {} traces, model has {nx} columns",
                boundary.nx
            )));
        }
        if (boundary.params.eta - self.eta).abs() > 1e-12 * self.eta {
            return Err(Error::InvalidArgument(
                "boundary series and solver use different eta".into(),
            ));
        }
        let n_terms = boundary.params.n_terms;
        let basis: Vec<Vec<f64>> = times
            .iter()
            .map(|&t| laguerre_functions(self.eta, t, n_terms - 1))
            .collect::<Result<_>>()?;
        let mut snaps: Vec<Vec<f64>> = vec![vec![0.0; nx * nz]; times.len()];
        let mut max_by_depth = vec![0.0f64; nz];
        let threshold = self.cfg.alarm_factor * boundary.norm();
        let mut state = self.new_state();
        // Fresh history for the startup grid as well.
        self.startup.state = WavefieldState2D::new(nx, self.startup.state.nz);
        let mut peak_all = 0.0f64;
        for m in 0..n_terms {
            self.solve_term(&mut state, boundary.row(m))?;
            let peak = state.u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if !peak.is_finite() || (threshold > 0.0 && peak > threshold) {
                return Err(Error::Unstable {
                    term: m,
                    magnitude: peak,
                    threshold,
                });
            }
            peak_all = peak_all.max(peak);
            for k in 0..nz {
                let row = &state.u[k * nx..(k + 1) * nx];
                let rmax = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                max_by_depth[k] = max_by_depth[k].max(rmax);
            }
            for (snap, l) in snaps.iter_mut().zip(&basis) {
                let lm = l[m];
                for (sv, u) in snap.iter_mut().zip(&state.u) {
                    *sv += lm * u;
                }
            }
            observe(m, &state);
            self.advance(&mut state);
        }
        Ok(Run2DOutput {
            snapshots: times.iter().copied().zip(snaps).collect(),
            max_abs_by_depth: max_by_depth,
            max_abs: peak_all,
            terms: n_terms,
        })
    }
}
