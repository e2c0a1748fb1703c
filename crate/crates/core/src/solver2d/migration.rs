//! Post-stack depth migration with the exploding-reflector model: the
//! zero-offset section, reversed in time, is continued downward at half
//! the medium velocity and the field at the record end is the image.

use super::march::{BoundaryData2D, Solver2D, Solver2DConfig};
use super::model::{smooth_velocity, VelocityModel2D};
use crate::error::{Error, Result};
use crate::laguerre::LaguerreParams;
use crate::wavelet::SourceWavelet;
use serde::{Deserialize, Serialize};

/// Zero-offset record `[it * nx + i]`, first sample at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroOffsetSection {
    pub nt: usize,
    pub nx: usize,
    pub dt: f64,
    pub data: Vec<f64>,
}

impl ZeroOffsetSection {
    pub fn new(nt: usize, nx: usize, dt: f64, data: Vec<f64>) -> Result<Self> {
        if data.len() != nt * nx || nt < 2 || !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a {nt} x {nx} section with dt = {dt}",
                data.len()
            )));
        }
        Ok(ZeroOffsetSection { nt, nx, dt, data })
    }

    /// Time of the last sample.
    pub fn duration(&self) -> f64 {
        (self.nt - 1) as f64 * self.dt
    }

    /// The section with time running backwards from the record end.
    pub fn reversed(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for it in 0..self.nt {
            let src = (self.nt - 1 - it) * self.nx;
            data[it * self.nx..(it + 1) * self.nx].copy_from_slice(&self.data[src..src + self.nx]);
        }
        ZeroOffsetSection { data, ..*self }
    }
}

/// Section of a horizontal reflector at `depth` under a constant `velocity`:
/// the wavelet arrives at the two-way time `2·depth/velocity` on every trace.
pub fn flat_reflector_section(
    nx: usize,
    nt: usize,
    dt: f64,
    depth: f64,
    velocity: f64,
    wavelet: &SourceWavelet,
) -> Result<ZeroOffsetSection> {
    let w = wavelet.shifted(2.0 * depth / velocity);
    let mut data = Vec::with_capacity(nt * nx);
    for it in 0..nt {
        let v = w.eval(it as f64 * dt);
        data.extend(std::iter::repeat_n(v, nx));
    }
    ZeroOffsetSection::new(nt, nx, dt, data)
}

/// Diffraction-sum section of a reflector `z(x_j) = depths[j]` under a
/// constant `velocity`: every reflector point radiates the wavelet with
/// obliquity `z/r` and cylindrical spreading `1/√r`.
pub fn diffraction_section(
    depths: &[f64],
    hx: f64,
    nt: usize,
    dt: f64,
    velocity: f64,
    wavelet: &SourceWavelet,
) -> Result<ZeroOffsetSection> {
    let nx = depths.len();
    let mut data = vec![0.0; nt * nx];
    let reach = wavelet.half_support();
    for i in 0..nx {
        for (j, &z) in depths.iter().enumerate() {
            let dx = (i as f64 - j as f64) * hx;
            let r = (dx * dx + z * z).sqrt();
            if r == 0.0 {
                continue;
            }
            let t_arr = 2.0 * r / velocity;
            let w = wavelet.shifted(t_arr);
            let amp = (z / r) / r.sqrt() * hx;
            let lo = ((t_arr - reach) / dt).floor().max(0.0) as usize;
            let hi = (((t_arr + reach) / dt).ceil() as usize).min(nt - 1);
            for it in lo..=hi {
                data[it * nx + i] += amp * w.eval(it as f64 * dt);
            }
        }
    }
    ZeroOffsetSection::new(nt, nx, dt, data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationConfig {
    pub eta: f64,
    pub n_terms: usize,
    /// Passes of five-point velocity averaging before migration.
    pub smoothing_passes: usize,
    pub solver: Solver2DConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MigrationImage {
    pub nx: usize,
    pub nz: usize,
    pub hx: f64,
    pub hz: f64,
    pub image: Vec<f64>,
    /// Velocity the section was continued with (smoothed, halved).
    pub velocity: VelocityModel2D,
}

/// Migrates `section` through `model` (true medium velocities).
pub fn migrate(
    section: &ZeroOffsetSection,
    model: &VelocityModel2D,
    cfg: &MigrationConfig,
) -> Result<MigrationImage> {
    if section.nx != model.nx {
        return Err(Error::InvalidArgument(format!(
            "section has {} traces, model has {} columns",
            section.nx, model.nx
        )));
    }
    let velocity = smooth_velocity(model, cfg.smoothing_passes).scaled(0.5);
    let params = LaguerreParams::new(cfg.eta, cfg.n_terms)?;
    let rev = section.reversed();
    let boundary = BoundaryData2D::from_traces(&rev.data, rev.nt, rev.nx, rev.dt, params)?;
    let mut solver = Solver2D::new(velocity.clone(), cfg.eta, cfg.solver.clone())?;
    let t_end = section.duration();
    let mut out = solver.run(&boundary, &[t_end])?;
    let (_, image) = out.snapshots.pop().expect("one snapshot requested");
    Ok(MigrationImage {
        nx: model.nx,
        nz: model.nz,
        hx: model.hx,
        hz: model.hz,
        image,
        velocity,
    })
}

impl MigrationImage {
    /// Energy centroid `Σ z u² / Σ u²` along depth over columns `cols`.
    pub fn centroid_depth(&self, cols: std::ops::Range<usize>) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..self.nz {
            let z = k as f64 * self.hz;
            for i in cols.clone() {
                let e = self.image[k * self.nx + i].powi(2);
                num += z * e;
                den += e;
            }
        }
        num / den
    }

    /// Depth of the largest `|u|` in column `i`.
    pub fn peak_depth(&self, i: usize) -> f64 {
        let mut best = (0.0, 0);
        for k in 0..self.nz {
            let v = self.image[k * self.nx + i].abs();
            if v > best.0 {
                best = (v, k);
            }
        }
        best.1 as f64 * self.hz
    }
}
