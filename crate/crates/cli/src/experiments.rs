//! One function per subcommand. Each writes its files into `out` and
//! returns the numbers it wrote, so tests can check them without parsing.

use crate::config::*;
use crate::output::{create_csv, num};
use crate::{CliError, Result};
use owwe::analytic1d::{exact_solution, ExactSolverConfig};
use owwe::gridio::{Grid2D, Seismogram};
use owwe::laguerre::{arrival_projection_error, eta_candidates, forward_transform};
use owwe::schemes1d::{energy_profile, relative_l2, solve_1d, Mesh1D, SchemeSpec};
use owwe::solver2d::{
    flat_reflector_section, migrate, BoundaryData2D, MigrationConfig, MigrationImage, Run2DOutput,
    Solver2D, VelocityModel2D, ZeroOffsetSection,
};
use owwe::stability::{classify, Classification};
use owwe::{LaguerreParams, LaguerreSeries, SourceWavelet};
use std::fs;
use std::path::Path;

pub const STABILITY_EXPECTATIONS: &str = include_str!("../fixtures/stability_expectations.csv");

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Stability(Vec<StabilityRow>),
    Table1(Table1Outcome),
    Impulse2d(Run2DOutput),
    Migrate(MigrationImage),
    EtaSelect { eta: f64, sweep: Vec<(f64, f64)> },
}

/// Runs `cfg`, writing `config.json` and the experiment's files into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    fs::write(
        out.join("config.json"),
        serde_json::to_string_pretty(cfg)? + "\n",
    )?;
    let hash = cfg.hash();
    match cfg {
        ExperimentConfig::Stability(c) => cmd_stability(c, out, &hash).map(Outcome::Stability),
        ExperimentConfig::Table1(c) => cmd_table1(c, out, &hash).map(Outcome::Table1),
        ExperimentConfig::Impulse2d(c) => cmd_impulse2d(c, out, &hash).map(Outcome::Impulse2d),
        ExperimentConfig::Migrate(c) => cmd_migrate(c, out, &hash).map(Outcome::Migrate),
        ExperimentConfig::EtaSelect(c) => {
            cmd_eta_select(c, out, &hash).map(|(eta, sweep)| Outcome::EtaSelect { eta, sweep })
        }
    }
}

fn parse_class(s: &str) -> Option<Classification> {
    match s {
        "stable" => Some(Classification::Stable),
        "neutrally_stable" => Some(Classification::NeutrallyStable),
        "unstable" => Some(Classification::Unstable),
        _ => None,
    }
}

/// Expected class for `(scheme, beta)` from the bundled table.
pub fn expected_class(scheme: &SchemeSpec, beta: f64) -> Option<Classification> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(STABILITY_EXPECTATIONS.as_bytes());
    r.records().flatten().find_map(|rec| {
        let s = SchemeSpec::parse(rec.get(0)?)?;
        let b: f64 = rec.get(1)?.trim().parse().ok()?;
        (s == *scheme && (b - beta).abs() <= 1e-12 * b.abs().max(1.0))
            .then(|| parse_class(rec.get(2)?.trim()))
            .flatten()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub scheme: String,
    pub beta: f64,
    pub max_abs_g: f64,
    pub min_abs_g: f64,
    pub class: Classification,
    pub expected: Option<Classification>,
}

impl StabilityRow {
    pub fn mismatch(&self) -> bool {
        self.expected.is_some_and(|e| e != self.class)
    }
}

/// `|G(θ)|` curves per scheme and β, and `classification.csv`. Fails with
/// [`CliError::Mismatch`] after writing everything if any class disagrees
/// with the expectations table.
pub fn cmd_stability(cfg: &StabilityConfig, out: &Path, hash: &str) -> Result<Vec<StabilityRow>> {
    let mut rows = Vec::new();
    for spec in cfg.specs()? {
        for &beta in &cfg.betas {
            let report = classify(&spec, beta, cfg.n_samples)?;
            let name = format!("gain_{}_beta{}.csv", spec.name(), beta);
            let mut w = create_csv(&out.join(name), hash, &["theta", "abs_g"])?;
            for (t, g) in &report.samples {
                w.write_record([num(*t), num(*g)])?;
            }
            w.flush()?;
            rows.push(StabilityRow {
                scheme: spec.name(),
                beta,
                max_abs_g: report.max_abs_g,
                min_abs_g: report.min_abs_g,
                class: report.classification,
                expected: cfg
                    .check_expectations
                    .then(|| expected_class(&spec, beta))
                    .flatten(),
            });
        }
    }
    let mut w = create_csv(
        &out.join("classification.csv"),
        hash,
        &[
            "scheme",
            "beta",
            "max_abs_g",
            "min_abs_g",
            "classification",
            "expected",
            "match",
        ],
    )?;
    for r in &rows {
        w.write_record([
            r.scheme.clone(),
            num(r.beta),
            num(r.max_abs_g),
            num(r.min_abs_g),
            r.class.as_str().to_string(),
            r.expected.map(|e| e.as_str()).unwrap_or("").to_string(),
            match r.expected {
                None => "",
                Some(_) if r.mismatch() => "no",
                Some(_) => "yes",
            }
            .to_string(),
        ])?;
    }
    w.flush()?;
    let bad = rows.iter().filter(|r| r.mismatch()).count();
    if bad > 0 {
        return Err(CliError::Mismatch(bad));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Outcome {
    pub meshes: Vec<usize>,
    pub schemes: Vec<String>,
    /// `errors[mesh][scheme]`; `None` where the march alarmed.
    pub errors: Vec<Vec<Option<f64>>>,
}

impl Table1Outcome {
    pub fn error(&self, scheme: &str, nx: usize) -> Option<f64> {
        let i = self.meshes.iter().position(|m| *m == nx)?;
        let j = self.schemes.iter().position(|s| s == scheme)?;
        self.errors[i][j]
    }

    /// Empirical order `log(e1/e2) / log(n2/n1)`.
    pub fn order(&self, scheme: &str, n1: usize, n2: usize) -> Option<f64> {
        let (e1, e2) = (self.error(scheme, n1)?, self.error(scheme, n2)?);
        Some((e1 / e2).ln() / (n2 as f64 / n1 as f64).ln())
    }
}

/// Laguerre series of `wavelet` sampled on `[0, end]`.
pub fn wavelet_series(
    wavelet: &SourceWavelet,
    amplitude: f64,
    dt: f64,
    end: f64,
    params: LaguerreParams,
) -> Result<LaguerreSeries> {
    let (t, v) = wavelet.sample(dt, end);
    let v: Vec<f64> = v.iter().map(|x| amplitude * x).collect();
    Ok(forward_transform(&t, &v, params)?)
}

/// Relative L2 error of every scheme on every mesh at `t_eval` against the
/// exact solution, `table1.csv`, `orders.csv` and the energy profiles.
pub fn cmd_table1(cfg: &Table1Config, out: &Path, hash: &str) -> Result<Table1Outcome> {
    let specs = cfg.specs()?;
    let params = LaguerreParams::new(cfg.eta, cfg.n_terms)?;
    let fbar = wavelet_series(&cfg.wavelet, 1.0, cfg.sample_dt, cfg.record_end, params)?;
    let exact_cfg = ExactSolverConfig::new(cfg.eta, cfg.velocity)?;
    let names: Vec<String> = specs.iter().map(|s| s.name()).collect();
    let mut errors = Vec::new();
    for &nx in &cfg.meshes {
        let mesh = Mesh1D::with_intervals(cfg.length, nx)?;
        let exact = exact_solution(&fbar, exact_cfg, mesh)?;
        let reference = exact.field_at(cfg.t_eval)?;
        let want_energy = cfg.energy_mesh == Some(nx);
        let mut profiles = vec![("exact".to_string(), energy_profile(&exact))];
        let mut row = Vec::new();
        for spec in &specs {
            match solve_1d(*spec, mesh, &fbar, cfg.velocity) {
                Ok(sol) => {
                    let e = relative_l2(&reference, &sol.field_at(cfg.t_eval)?)?;
                    log::info!("N_x {nx} {}: {e:.3e}", spec.name());
                    row.push(Some(e));
                    if want_energy {
                        profiles.push((spec.name(), energy_profile(&sol)));
                    }
                }
                Err(owwe::Error::Unstable { term, .. }) => {
                    log::warn!("N_x {nx} {}: alarm at term {term}", spec.name());
                    row.push(None);
                }
                Err(e) => return Err(e.into()),
            }
        }
        errors.push(row);
        if want_energy {
            let mut header = vec!["x"];
            header.extend(profiles.iter().map(|p| p.0.as_str()));
            let mut w = create_csv(&out.join(format!("energy_nx{nx}.csv")), hash, &header)?;
            for j in 0..mesh.n_nodes {
                let mut rec = vec![num(mesh.x(j))];
                rec.extend(profiles.iter().map(|p| num(p.1[j])));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    let outcome = Table1Outcome {
        meshes: cfg.meshes.clone(),
        schemes: names,
        errors,
    };
    let mut header = vec!["n_x"];
    header.extend(outcome.schemes.iter().map(|s| s.as_str()));
    let mut w = create_csv(&out.join("table1.csv"), hash, &header)?;
    for (nx, row) in outcome.meshes.iter().zip(&outcome.errors) {
        let mut rec = vec![nx.to_string()];
        rec.extend(
            row.iter()
                .map(|e| e.map(num).unwrap_or_else(|| "alarm".into())),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    let mut w = create_csv(
        &out.join("orders.csv"),
        hash,
        &["scheme", "n_x_coarse", "n_x_fine", "order"],
    )?;
    for s in &outcome.schemes {
        for (i, &n1) in outcome.meshes.iter().enumerate() {
            for &n2 in &outcome.meshes[i + 1..] {
                if let Some(p) = outcome.order(s, n1, n2) {
                    w.write_record([s.clone(), n1.to_string(), n2.to_string(), num(p)])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(outcome)
}

/// Homogeneous impulse response: snapshot grids at the requested times and
/// `max_amplitude.csv` (per-row maximum over all terms).
pub fn cmd_impulse2d(cfg: &Impulse2dConfig, out: &Path, hash: &str) -> Result<Run2DOutput> {
    let (nx, nz, hz) = (cfg.nx(), cfg.nz(), cfg.hz());
    let model = VelocityModel2D::constant(nx, nz, cfg.hx, hz, cfg.velocity)?;
    let params = LaguerreParams::new(cfg.eta, cfg.n_terms)?;
    let series = wavelet_series(
        &cfg.wavelet,
        cfg.amplitude,
        cfg.sample_dt,
        cfg.record_end,
        params,
    )?;
    let boundary = BoundaryData2D::gaussian_source(nx, nx / 2, cfg.source_sigma, &series)?;
    let mut solver = Solver2D::new(model, cfg.eta, cfg.solver.solver_config()?)?;
    let run = solver.run(&boundary, &cfg.snapshot_times)?;
    for (t, field) in &run.snapshots {
        let grid = Grid2D::new(nx, nz, cfg.hx, hz, "amplitude", field.clone())?;
        grid.write(&out.join(format!("snapshot_t{t:.3}.f32")))?;
    }
    let mut w = create_csv(
        &out.join("max_amplitude.csv"),
        hash,
        &["depth_m", "max_abs"],
    )?;
    for (k, v) in run.max_abs_by_depth.iter().enumerate() {
        w.write_record([num(k as f64 * hz), num(*v)])?;
    }
    w.flush()?;
    Ok(run)
}

fn load_section(spec: &SectionSpec) -> Result<(ZeroOffsetSection, f64)> {
    Ok(match spec {
        SectionSpec::File { path } => {
            let s = Seismogram::read(path)?;
            (ZeroOffsetSection::new(s.nt, s.nx, s.dt, s.data)?, s.hx)
        }
        SectionSpec::FlatReflector {
            nx,
            hx,
            nt,
            dt,
            depth,
            velocity,
            wavelet,
        } => (
            flat_reflector_section(*nx, *nt, *dt, *depth, *velocity, wavelet)?,
            *hx,
        ),
    })
}

/// Synthetic or file velocity model of true velocities.
pub fn build_model(cfg: &MigrateConfig, nx: usize, hx: f64) -> Result<VelocityModel2D> {
    let hz = cfg.hz;
    let nz = {
        let n = (cfg.max_depth / hz).round() as usize + 1;
        n + 1 - n % 2
    };
    Ok(match &cfg.model {
        ModelSpec::File { path } => {
            let g = Grid2D::read(path)?;
            if g.nx != nx || (g.hx - hx).abs() > 1e-9 * hx {
                return Err(CliError::Usage(format!(
                    "model is {} columns at {} m, section is {nx} traces at {hx} m",
                    g.nx, g.hx
                )));
            }
            VelocityModel2D::new(g.nx, g.nz, g.hx, g.hz, g.data)?
        }
        ModelSpec::Constant { velocity } => VelocityModel2D::constant(nx, nz, hx, hz, *velocity)?,
        ModelSpec::TwoLayer {
            depth,
            c_top,
            c_bottom,
        } => VelocityModel2D::two_layer(nx, nz, hx, hz, *depth, *c_top, *c_bottom)?,
        ModelSpec::Syncline {
            depth,
            sag,
            width,
            c_top,
            c_bottom,
        } => VelocityModel2D::syncline(nx, nz, hx, hz, *depth, *sag, *width, *c_top, *c_bottom)?,
    })
}

/// Depth image of a zero-offset section: `image.f32`, the continuation
/// velocity `velocity.f32` and `image_profile.csv`.
pub fn cmd_migrate(cfg: &MigrateConfig, out: &Path, hash: &str) -> Result<MigrationImage> {
    let (section, hx) = load_section(&cfg.section)?;
    let model = build_model(cfg, section.nx, hx)?;
    let mcfg = MigrationConfig {
        eta: cfg.eta,
        n_terms: cfg.n_terms,
        smoothing_passes: cfg.smoothing_passes,
        solver: cfg.solver.solver_config()?,
    };
    let img = migrate(&section, &model, &mcfg)?;
    Grid2D::new(
        img.nx,
        img.nz,
        img.hx,
        img.hz,
        "amplitude",
        img.image.clone(),
    )?
    .write(&out.join("image.f32"))?;
    Grid2D::new(
        img.nx,
        img.nz,
        img.hx,
        img.hz,
        "m/s",
        img.velocity.c.clone(),
    )?
    .write(&out.join("velocity.f32"))?;
    let mut w = create_csv(
        &out.join("image_profile.csv"),
        hash,
        &["x_m", "peak_depth_m", "centroid_depth_m"],
    )?;
    for i in 0..img.nx {
        w.write_record([
            num(i as f64 * img.hx),
            num(img.peak_depth(i)),
            num(img.centroid_depth(i..i + 1)),
        ])?;
    }
    w.flush()?;
    Ok(img)
}

/// Sweeps `η` upward until the moved wavelet is represented within `tol`;
/// `eta_select.csv` lists every candidate tried.
pub fn cmd_eta_select(
    cfg: &EtaSelectConfig,
    out: &Path,
    hash: &str,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut sweep = Vec::new();
    let mut chosen = None;
    for eta in eta_candidates(cfg.eta_lo, cfg.eta_hi, cfg.eta_ratio) {
        let err = arrival_projection_error(
            &cfg.wavelet,
            cfg.t_max,
            LaguerreParams::new(eta, cfg.n_terms)?,
        )?;
        sweep.push((eta, err));
        if err < cfg.tol {
            chosen = Some(eta);
            break;
        }
    }
    let mut w = create_csv(
        &out.join("eta_select.csv"),
        hash,
        &["eta", "projection_error", "selected"],
    )?;
    for (eta, err) in &sweep {
        let sel = if Some(*eta) == chosen { "1" } else { "0" };
        w.write_record([num(*eta), num(*err), sel.to_string()])?;
    }
    w.flush()?;
    match chosen {
        Some(eta) => Ok((eta, sweep)),
        None => {
            let best = sweep.iter().fold(
                (f64::NAN, f64::INFINITY),
                |b, s| if s.1 < b.1 { *s } else { b },
            );
            Err(owwe::Error::NoEtaCandidate {
                best_eta: best.0,
                best_error: best.1,
            }
            .into())
        }
    }
}
