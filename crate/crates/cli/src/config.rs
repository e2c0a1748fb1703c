//! Run configurations. One JSON document per run; its canonical
//! serialization is hashed and stamped on every CSV the run writes.

use crate::{CliError, Result};
use owwe::schemes1d::SchemeSpec;
use owwe::solver2d::{Method2D, Starter2D};
use owwe::SourceWavelet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Stability(StabilityConfig),
    Table1(Table1Config),
    Impulse2d(Impulse2dConfig),
    Migrate(MigrateConfig),
    EtaSelect(EtaSelectConfig),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::Stability(_) => "stability",
            ExperimentConfig::Table1(_) => "table1",
            ExperimentConfig::Impulse2d(_) => "impulse2d",
            ExperimentConfig::Migrate(_) => "migrate",
            ExperimentConfig::EtaSelect(_) => "eta-select",
        }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configs always serialize")
    }

    /// SHA-256 of the canonical JSON, lowercase hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::Stability(c) => c.validate(),
            ExperimentConfig::Table1(c) => c.validate(),
            ExperimentConfig::Impulse2d(c) => c.validate(),
            ExperimentConfig::Migrate(c) => c.validate(),
            ExperimentConfig::EtaSelect(c) => c.validate(),
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        usage(format!("{name} must be positive, got {v}"))
    }
}

fn check_wavelet(w: &SourceWavelet) -> Result<()> {
    positive("wavelet.f0", w.f0)?;
    positive("wavelet.delta", w.delta)?;
    if !w.t0.is_finite() {
        return usage("wavelet.t0 must be finite");
    }
    Ok(())
}

fn parse_schemes(names: &[String]) -> Result<Vec<SchemeSpec>> {
    if names.is_empty() {
        return usage("empty scheme list");
    }
    names
        .iter()
        .map(|n| {
            SchemeSpec::parse(n).ok_or_else(|| CliError::Usage(format!("unknown scheme {n:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub schemes: Vec<String>,
    pub betas: Vec<f64>,
    pub n_samples: usize,
    /// Compare classifications with the bundled expectations table.
    pub check_expectations: bool,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            schemes: [
                "CN", "FWD1", "BWD1", "AM3", "AM4", "AM5", "AM6", "AM5-D4", "AM5-D6",
            ]
            .map(String::from)
            .to_vec(),
            betas: vec![0.1, 0.25, 0.5, 1.0, 10.0, -0.1, -1.0, -10.0],
            n_samples: 512,
            check_expectations: true,
        }
    }
}

impl StabilityConfig {
    pub fn specs(&self) -> Result<Vec<SchemeSpec>> {
        parse_schemes(&self.schemes)
    }

    fn validate(&self) -> Result<()> {
        self.specs()?;
        if self.betas.is_empty() {
            return usage("empty beta list");
        }
        if self.betas.iter().any(|b| !b.is_finite()) {
            return usage("betas must be finite");
        }
        if self.n_samples < 64 {
            return usage("n_samples must be at least 64");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Config {
    pub wavelet: SourceWavelet,
    pub eta: f64,
    pub n_terms: usize,
    pub velocity: f64,
    pub length: f64,
    /// Sampling step and end of the boundary record fed to the transform.
    pub sample_dt: f64,
    pub record_end: f64,
    /// Time at which fields are compared.
    pub t_eval: f64,
    /// Interval counts.
    pub meshes: Vec<usize>,
    pub schemes: Vec<String>,
    /// Mesh for the energy-profile CSV, if any.
    pub energy_mesh: Option<usize>,
}

impl Default for Table1Config {
    fn default() -> Self {
        Table1Config {
            wavelet: SourceWavelet::default(),
            eta: 600.0,
            n_terms: 2500,
            velocity: 3000.0,
            length: 7500.0,
            sample_dt: 1e-4,
            record_end: 2.0,
            t_eval: 2.0,
            meshes: vec![1000, 1500, 2000, 3000, 4000, 4500],
            schemes: ["AM5-I5", "AM6-I7", "AM5-D4", "Richardson", "RK4", "CN"]
                .map(String::from)
                .to_vec(),
            energy_mesh: Some(1000),
        }
    }
}

impl Table1Config {
    pub fn specs(&self) -> Result<Vec<SchemeSpec>> {
        parse_schemes(&self.schemes)
    }

    fn validate(&self) -> Result<()> {
        check_wavelet(&self.wavelet)?;
        for (n, v) in [
            ("eta", self.eta),
            ("velocity", self.velocity),
            ("length", self.length),
            ("sample_dt", self.sample_dt),
            ("record_end", self.record_end),
            ("t_eval", self.t_eval),
        ] {
            positive(n, v)?;
        }
        if self.n_terms == 0 {
            return usage("n_terms must be positive");
        }
        if self.meshes.is_empty() {
            return usage("empty mesh list");
        }
        if let Some(m) = self.meshes.iter().find(|m| **m < 16 || **m % 2 != 0) {
            return usage(format!(
                "mesh {m}: need an even interval count of at least 16"
            ));
        }
        self.specs()?;
        Ok(())
    }
}

/// 2D marching method, solver knobs shared by the 2D experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Solver2DSpec {
    /// `pc` or `am`.
    pub method: String,
    /// `cn` or `be`.
    pub starter: String,
    pub filter_degree: Option<usize>,
    pub filter_phi1_psi: bool,
}

impl Default for Solver2DSpec {
    fn default() -> Self {
        Solver2DSpec {
            method: "pc".into(),
            starter: "cn".into(),
            filter_degree: Some(5),
            filter_phi1_psi: true,
        }
    }
}

impl Solver2DSpec {
    pub fn solver_config(&self) -> Result<owwe::solver2d::Solver2DConfig> {
        let method = Method2D::parse(&self.method)
            .ok_or_else(|| CliError::Usage(format!("unknown 2D method {:?}", self.method)))?;
        let starter = match self.starter.to_ascii_lowercase().as_str() {
            "cn" | "crank-nicolson" => Starter2D::CrankNicolson,
            "be" | "backward-euler" => Starter2D::BackwardEuler,
            s => return usage(format!("unknown starter {s:?}")),
        };
        if let Some(d) = self.filter_degree {
            if d % 2 == 0 || !(1..=7).contains(&d) {
                return usage(format!("filter degree must be odd and at most 7, got {d}"));
            }
        }
        Ok(owwe::solver2d::Solver2DConfig {
            method,
            starter,
            filter_degree: self.filter_degree,
            filter_phi1_psi: self.filter_phi1_psi,
            ..Default::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Impulse2dConfig {
    pub velocity: f64,
    pub width: f64,
    pub depth: f64,
    pub hx: f64,
    /// `h_z / h_x`.
    pub ratio: f64,
    pub wavelet: SourceWavelet,
    pub amplitude: f64,
    pub eta: f64,
    pub n_terms: usize,
    pub sample_dt: f64,
    pub record_end: f64,
    /// Lateral Gaussian taper of the source in cells; 0 is a single node.
    pub source_sigma: f64,
    pub snapshot_times: Vec<f64>,
    pub solver: Solver2DSpec,
}

impl Default for Impulse2dConfig {
    fn default() -> Self {
        Impulse2dConfig {
            velocity: 250.0,
            width: 3500.0,
            depth: 1500.0,
            hx: 10.0,
            ratio: 0.25,
            wavelet: SourceWavelet::new(2.0, 4.0, 3.0),
            amplitude: 1.0,
            eta: 60.0,
            n_terms: 500,
            sample_dt: 1e-3,
            record_end: 12.0,
            source_sigma: 0.0,
            snapshot_times: vec![3.0, 4.0, 5.0],
            solver: Solver2DSpec::default(),
        }
    }
}

impl Impulse2dConfig {
    pub fn nx(&self) -> usize {
        (self.width / self.hx).round() as usize + 1
    }

    pub fn hz(&self) -> f64 {
        self.ratio * self.hx
    }

    /// Depth rows, rounded up to an odd count for the filtration.
    pub fn nz(&self) -> usize {
        let nz = (self.depth / self.hz()).round() as usize + 1;
        nz + 1 - nz % 2
    }

    fn validate(&self) -> Result<()> {
        check_wavelet(&self.wavelet)?;
        for (n, v) in [
            ("velocity", self.velocity),
            ("width", self.width),
            ("depth", self.depth),
            ("hx", self.hx),
            ("ratio", self.ratio),
            ("eta", self.eta),
            ("sample_dt", self.sample_dt),
            ("record_end", self.record_end),
        ] {
            positive(n, v)?;
        }
        if !self.amplitude.is_finite() {
            return usage("amplitude must be finite");
        }
        if !(self.source_sigma >= 0.0) {
            return usage("source_sigma must be non-negative");
        }
        if self.n_terms == 0 {
            return usage("n_terms must be positive");
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0)) {
            return usage("snapshot times must be non-negative");
        }
        self.solver.solver_config()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SectionSpec {
    /// Seismogram file (raw grid plus header).
    File { path: PathBuf },
    /// Explosive flat reflector at `depth` under a constant `velocity`.
    FlatReflector {
        nx: usize,
        hx: f64,
        nt: usize,
        dt: f64,
        depth: f64,
        velocity: f64,
        wavelet: SourceWavelet,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Grid file of true velocities; its `h_z` and `nz` override the config.
    File {
        path: PathBuf,
    },
    Constant {
        velocity: f64,
    },
    TwoLayer {
        depth: f64,
        c_top: f64,
        c_bottom: f64,
    },
    Syncline {
        depth: f64,
        sag: f64,
        width: f64,
        c_top: f64,
        c_bottom: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MigrateConfig {
    pub section: SectionSpec,
    pub model: ModelSpec,
    /// Depth step and extent for synthetic models.
    pub hz: f64,
    pub max_depth: f64,
    pub eta: f64,
    pub n_terms: usize,
    pub smoothing_passes: usize,
    pub solver: Solver2DSpec,
}

impl Default for MigrateConfig {
    fn default() -> Self {
        MigrateConfig {
            section: SectionSpec::FlatReflector {
                nx: 121,
                hx: 10.0,
                nt: 1501,
                dt: 2e-3,
                depth: 500.0,
                velocity: 500.0,
                wavelet: SourceWavelet::new(0.0, 4.0, 3.0),
            },
            model: ModelSpec::Constant { velocity: 500.0 },
            hz: 2.5,
            max_depth: 800.0,
            eta: 60.0,
            n_terms: 250,
            smoothing_passes: 1,
            solver: Solver2DSpec::default(),
        }
    }
}

impl MigrateConfig {
    fn validate(&self) -> Result<()> {
        match &self.section {
            SectionSpec::File { path } => {
                if !path.is_file() || !owwe::gridio::header_path(path).is_file() {
                    return usage(format!(
                        "section {} or its header is missing",
                        path.display()
                    ));
                }
            }
            SectionSpec::FlatReflector {
                nx,
                hx,
                nt,
                dt,
                depth,
                velocity,
                wavelet,
            } => {
                check_wavelet(wavelet)?;
                for (n, v) in [
                    ("hx", *hx),
                    ("dt", *dt),
                    ("depth", *depth),
                    ("velocity", *velocity),
                ] {
                    positive(n, v)?;
                }
                if *nx < 2 || *nt < 2 {
                    return usage("section needs at least two traces and two samples");
                }
            }
        }
        match &self.model {
            ModelSpec::File { path } => {
                if !path.is_file() || !owwe::gridio::header_path(path).is_file() {
                    return usage(format!("model {} or its header is missing", path.display()));
                }
            }
            ModelSpec::Constant { velocity } => positive("velocity", *velocity)?,
            ModelSpec::TwoLayer {
                depth,
                c_top,
                c_bottom,
            } => {
                for (n, v) in [
                    ("depth", *depth),
                    ("c_top", *c_top),
                    ("c_bottom", *c_bottom),
                ] {
                    positive(n, v)?;
                }
            }
            ModelSpec::Syncline {
                depth,
                sag,
                width,
                c_top,
                c_bottom,
            } => {
                for (n, v) in [
                    ("depth", *depth),
                    ("width", *width),
                    ("c_top", *c_top),
                    ("c_bottom", *c_bottom),
                ] {
                    positive(n, v)?;
                }
                if !sag.is_finite() {
                    return usage("sag must be finite");
                }
            }
        }
        positive("hz", self.hz)?;
        positive("max_depth", self.max_depth)?;
        positive("eta", self.eta)?;
        if self.n_terms == 0 {
            return usage("n_terms must be positive");
        }
        self.solver.solver_config()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtaSelectConfig {
    pub wavelet: SourceWavelet,
    /// Latest arrival the expansion must represent.
    pub t_max: f64,
    pub n_terms: usize,
    pub tol: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub eta_ratio: f64,
}

impl Default for EtaSelectConfig {
    fn default() -> Self {
        EtaSelectConfig {
            wavelet: SourceWavelet::default(),
            t_max: 2.0,
            n_terms: 2500,
            tol: 1e-10,
            eta_lo: 10.0,
            eta_hi: 1e5,
            eta_ratio: 2f64.powf(0.125),
        }
    }
}

impl EtaSelectConfig {
    fn validate(&self) -> Result<()> {
        check_wavelet(&self.wavelet)?;
        for (n, v) in [
            ("t_max", self.t_max),
            ("tol", self.tol),
            ("eta_lo", self.eta_lo),
            ("eta_hi", self.eta_hi),
        ] {
            positive(n, v)?;
        }
        if !(self.eta_ratio > 1.0) || self.eta_hi < self.eta_lo {
            return usage("need eta_ratio > 1 and eta_hi >= eta_lo");
        }
        if self.n_terms == 0 {
            return usage("n_terms must be positive");
        }
        Ok(())
    }
}
