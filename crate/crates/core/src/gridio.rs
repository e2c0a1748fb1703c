//! Raw little-endian `f32` grids with a plain-text sidecar header.
//!
//! A grid stored at `path` keeps its samples in `path` and its header in
//! `path.hdr`, one `key = value` per line. Samples are row-major with the
//! slow axis first: depth rows for models and snapshots, time samples for
//! seismograms.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Depth grid `[k * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub nz: usize,
    pub hx: f64,
    pub hz: f64,
    pub units: String,
    pub data: Vec<f64>,
}

/// Surface record `[it * nx + i]`, first sample at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Seismogram {
    pub nt: usize,
    pub nx: usize,
    pub dt: f64,
    pub hx: f64,
    pub units: String,
    pub data: Vec<f64>,
}

pub fn header_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

fn write_samples(path: &Path, data: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(4 * data.len());
    for v in data {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn read_samples(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() != 4 * expected {
        return Err(Error::Format(format!(
            "{}: {} bytes, header promises {} samples",
            path.display(),
            bytes.len(),
            expected
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

fn write_header(path: &Path, entries: &[(&str, String)]) -> Result<()> {
    let mut text = String::new();
    for (k, v) in entries {
        text.push_str(&format!("{k} = {v}\n"));
    }
    fs::write(header_path(path), text)?;
    Ok(())
}

struct Header {
    path: PathBuf,
    map: BTreeMap<String, String>,
}

impl Header {
    fn read(path: &Path) -> Result<Self> {
        let hp = header_path(path);
        let text = fs::read_to_string(&hp)?;
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("{}: bad line {line:?}", hp.display())))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Header { path: hp, map })
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.map
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Format(format!("{}: missing {key}", self.path.display())))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| {
            Error::Format(format!("{}: cannot parse {key} = {v}", self.path.display()))
        })
    }

    fn units(&self) -> String {
        self.map.get("units").cloned().unwrap_or_default()
    }
}

impl Grid2D {
    pub fn new(
        nx: usize,
        nz: usize,
        hx: f64,
        hz: f64,
        units: &str,
        data: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != nx * nz {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a {nx} x {nz} grid",
                data.len()
            )));
        }
        Ok(Grid2D {
            nx,
            nz,
            hx,
            hz,
            units: units.to_string(),
            data,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_samples(path, &self.data)?;
        write_header(
            path,
            &[
                ("nx", self.nx.to_string()),
                ("nz", self.nz.to_string()),
                ("h_x", self.hx.to_string()),
                ("h_z", self.hz.to_string()),
                ("units", self.units.clone()),
            ],
        )
    }

    pub fn read(path: &Path) -> Result<Self> {
        let h = Header::read(path)?;
        let (nx, nz): (usize, usize) = (h.parse("nx")?, h.parse("nz")?);
        let data = read_samples(path, nx * nz)?;
        Grid2D::new(nx, nz, h.parse("h_x")?, h.parse("h_z")?, &h.units(), data)
    }
}

impl Seismogram {
    pub fn new(
        nt: usize,
        nx: usize,
        dt: f64,
        hx: f64,
        units: &str,
        data: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != nt * nx {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a {nt} x {nx} record",
                data.len()
            )));
        }
        Ok(Seismogram {
            nt,
            nx,
            dt,
            hx,
            units: units.to_string(),
            data,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_samples(path, &self.data)?;
        write_header(
            path,
            &[
                ("nt", self.nt.to_string()),
                ("nx", self.nx.to_string()),
                ("dt", self.dt.to_string()),
                ("h_x", self.hx.to_string()),
                ("units", self.units.clone()),
            ],
        )
    }

    pub fn read(path: &Path) -> Result<Self> {
        let h = Header::read(path)?;
        let (nt, nx): (usize, usize) = (h.parse("nt")?, h.parse("nx")?);
        let data = read_samples(path, nt * nx)?;
        Seismogram::new(nt, nx, h.parse("dt")?, h.parse("h_x")?, &h.units(), data)
    }

    /// Last sample time.
    pub fn duration(&self) -> f64 {
        (self.nt.saturating_sub(1)) as f64 * self.dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("owwe-gridio-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn grid_round_trip() {
        let data: Vec<f64> = (0..12).map(|k| k as f64 * 0.5 - 2.0).collect();
        let g = Grid2D::new(4, 3, 10.0, 2.5, "m/s", data).unwrap();
        let p = scratch("g.bin");
        g.write(&p).unwrap();
        assert_eq!(fs::metadata(&p).unwrap().len(), 48);
        let back = Grid2D::read(&p).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn seismogram_round_trip() {
        let data = vec![1.0, -1.0, 0.25, 3.0, 0.0, 2.0];
        let s = Seismogram::new(3, 2, 0.004, 10.0, "", data).unwrap();
        let p = scratch("s.bin");
        s.write(&p).unwrap();
        let back = Seismogram::read(&p).unwrap();
        assert_eq!(back, s);
        assert!((back.duration() - 0.008).abs() < 1e-15);
    }

    #[test]
    fn size_mismatch_is_a_format_error() {
        let g = Grid2D::new(2, 2, 1.0, 1.0, "m/s", vec![1.0; 4]).unwrap();
        let p = scratch("short.bin");
        g.write(&p).unwrap();
        fs::write(&p, [0u8; 12]).unwrap();
        assert!(matches!(Grid2D::read(&p), Err(Error::Format(_))));
        assert!(Grid2D::new(2, 2, 1.0, 1.0, "", vec![0.0; 3]).is_err());
    }
}
