use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Velocity on a regular grid, `c[k * nx + i]` at `x = i·h_x`, `z = k·h_z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityModel2D {
    pub nx: usize,
    pub nz: usize,
    pub hx: f64,
    pub hz: f64,
    pub c: Vec<f64>,
}

impl VelocityModel2D {
    pub fn new(nx: usize, nz: usize, hx: f64, hz: f64, c: Vec<f64>) -> Result<Self> {
        if nx == 0 || nz == 0 {
            return Err(Error::Domain("empty velocity grid".into()));
        }
        if !(hx > 0.0) || !(hz > 0.0) {
            return Err(Error::Domain(format!(
                "grid steps must be positive, got {hx}, {hz}"
            )));
        }
        if c.len() != nx * nz {
            return Err(Error::InvalidArgument(format!(
                "{} velocities for a {nx} x {nz} grid",
                c.len()
            )));
        }
        if let Some(bad) = c.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!(
                "velocity must be positive, found {bad}"
            )));
        }
        Ok(VelocityModel2D { nx, nz, hx, hz, c })
    }

    pub fn constant(nx: usize, nz: usize, hx: f64, hz: f64, c: f64) -> Result<Self> {
        Self::new(nx, nz, hx, hz, vec![c; nx * nz])
    }

    /// `c_top` above `depth`, `c_bottom` from `depth` down.
    pub fn two_layer(
        nx: usize,
        nz: usize,
        hx: f64,
        hz: f64,
        depth: f64,
        c_top: f64,
        c_bottom: f64,
    ) -> Result<Self> {
        let mut c = Vec::with_capacity(nx * nz);
        for k in 0..nz {
            let v = if (k as f64) * hz < depth {
                c_top
            } else {
                c_bottom
            };
            c.extend(std::iter::repeat_n(v, nx));
        }
        Self::new(nx, nz, hx, hz, c)
    }

    /// Layer boundary bending down as a cosine bowl centred in `x`:
    /// interface depth `depth + sag·(1 + cos(2π(x - x_mid)/width))/2` inside
    /// `|x - x_mid| < width/2`, `depth` elsewhere.
    #[allow(clippy::too_many_arguments)]
    pub fn syncline(
        nx: usize,
        nz: usize,
        hx: f64,
        hz: f64,
        depth: f64,
        sag: f64,
        width: f64,
        c_top: f64,
        c_bottom: f64,
    ) -> Result<Self> {
        let x_mid = 0.5 * (nx - 1) as f64 * hx;
        let mut c = vec![0.0; nx * nz];
        for i in 0..nx {
            let dx = i as f64 * hx - x_mid;
            let d = if dx.abs() < 0.5 * width {
                depth + 0.5 * sag * (1.0 + (2.0 * std::f64::consts::PI * dx / width).cos())
            } else {
                depth
            };
            for k in 0..nz {
                c[k * nx + i] = if (k as f64) * hz < d { c_top } else { c_bottom };
            }
        }
        Self::new(nx, nz, hx, hz, c)
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.c[k * self.nx + i]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.c[k * self.nx..(k + 1) * self.nx]
    }

    /// Copy with every velocity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        VelocityModel2D {
            c: self.c.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub fn max_velocity(&self) -> f64 {
        self.c.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Largest relative jump between neighbouring cells.
    pub fn max_contrast(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.nz {
            for i in 0..self.nx {
                let v = self.at(i, k);
                if i + 1 < self.nx {
                    worst = worst.max((self.at(i + 1, k) - v).abs() / v);
                }
                if k + 1 < self.nz {
                    worst = worst.max((self.at(i, k + 1) - v).abs() / v);
                }
            }
        }
        worst
    }
}

/// Five-point averaging `(4c + c_W + c_E + c_N + c_S)/8`, applied
/// `passes` times. Neighbours outside the grid are replaced by the cell
/// itself.
pub fn smooth_velocity(model: &VelocityModel2D, passes: usize) -> VelocityModel2D {
    let (nx, nz) = (model.nx, model.nz);
    let mut cur = model.c.clone();
    let mut next = vec![0.0; cur.len()];
    for _ in 0..passes {
        for k in 0..nz {
            for i in 0..nx {
                let v = cur[k * nx + i];
                let w = if i > 0 { cur[k * nx + i - 1] } else { v };
                let e = if i + 1 < nx { cur[k * nx + i + 1] } else { v };
                let n = if k > 0 { cur[(k - 1) * nx + i] } else { v };
                let s = if k + 1 < nz { cur[(k + 1) * nx + i] } else { v };
                next[k * nx + i] = (4.0 * v + w + e + n + s) / 8.0;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    VelocityModel2D {
        c: cur,
        ..model.clone()
    }
}
