//! Uniform planar array steering vectors and the per-cell angle search.
//!
//! Element `(r, c)` sits `r` pitches up the z axis and `c` pitches along
//! the y axis; its flattened antenna index is `r * cols + c`.

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::doppler::DopplerCube;
use crate::error::{Error, Result};
use crate::scene::{ArrivalAngles, RadioConfig};

/// Array response to a plane wave arriving from `angles`.
pub fn steering_for(cfg: &RadioConfig, angles: ArrivalAngles) -> Vec<Complex64> {
    let u = angles.unit_vector();
    let k = 2.0 * std::f64::consts::PI * cfg.element_spacing;
    let mut out = Vec::with_capacity(cfg.num_antennas());
    for r in 0..cfg.array_rows {
        for c in 0..cfg.array_cols {
            out.push(Complex64::cis(k * (r as f64 * u.z + c as f64 * u.y)));
        }
    }
    out
}

/// Steering vector for a flattened grid index.
pub fn steering_vector(cfg: &RadioConfig, grid: &AoaGrid, aoa_id: usize) -> Vec<Complex64> {
    steering_for(cfg, grid.angles(aoa_id))
}

/// Rectangular search grid of horizontal (azimuth) by vertical (elevation)
/// angles, radians. Flattened index is `v * azimuth.len() + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct AoaGrid {
    azimuth: Vec<f64>,
    elevation: Vec<f64>,
}

impl AoaGrid {
    pub fn new(azimuth: Vec<f64>, elevation: Vec<f64>) -> Result<Self> {
        for (name, axis) in [("azimuth", &azimuth), ("elevation", &elevation)] {
            if axis.is_empty() {
                return Err(Error::config(format!("{name} grid is empty")));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::config(format!("{name} grid must be strictly increasing")));
            }
        }
        Ok(Self { azimuth, elevation })
    }

    pub fn from_spec(spec: &AoaGridSpec) -> Result<Self> {
        Self::new(
            degree_axis(spec.azimuth_min, spec.azimuth_max, spec.step)?,
            degree_axis(spec.elevation_min, spec.elevation_max, spec.step)?,
        )
    }

    pub fn len(&self) -> usize {
        self.azimuth.len() * self.elevation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn azimuths(&self) -> &[f64] {
        &self.azimuth
    }

    pub fn elevations(&self) -> &[f64] {
        &self.elevation
    }

    pub fn index_of(&self, h: usize, v: usize) -> usize {
        v * self.azimuth.len() + h
    }

    pub fn angles(&self, aoa_id: usize) -> ArrivalAngles {
        let h = aoa_id % self.azimuth.len();
        let v = aoa_id / self.azimuth.len();
        ArrivalAngles {
            azimuth: self.azimuth[h],
            elevation: self.elevation[v],
        }
    }

    /// Conjugated steering vectors, one row per grid point.
    pub fn conj_steering_matrix(&self, cfg: &RadioConfig) -> Array2<Complex64> {
        let n = cfg.num_antennas();
        let mut m = Array2::zeros((self.len(), n));
        for (id, mut row) in m.outer_iter_mut().enumerate() {
            for (dst, s) in row.iter_mut().zip(steering_vector(cfg, self, id)) {
                *dst = s.conj();
            }
        }
        m
    }
}

fn degree_axis(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= min) {
        return Err(Error::config(format!(
            "bad angle axis [{min}, {max}] step {step}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| (min + i as f64 * step).to_radians())
        .collect())
}

/// Grid bounds in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AoaGridSpec {
    pub azimuth_min: f64,
    pub azimuth_max: f64,
    pub elevation_min: f64,
    pub elevation_max: f64,
    pub step: f64,
}

impl Default for AoaGridSpec {
    fn default() -> Self {
        Self {
            azimuth_min: -60.0,
            azimuth_max: 60.0,
            elevation_min: -30.0,
            elevation_max: 30.0,
            step: 2.0,
        }
    }
}

/// Best angle for one delay-Doppler cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPeak {
    pub delay_bin: usize,
    pub doppler_bin: usize,
    pub aoa_id: usize,
    pub power: f64,
}

/// Matched-filter angle search over every delay-Doppler cell whose signed
/// Doppler bin lies outside `+-zero_doppler_guard` (DC is always skipped).
/// Output is ordered by delay bin, then Doppler bin.
pub fn aoa_power_search(
    cube: &DopplerCube,
    grid: &AoaGrid,
    cfg: &RadioConfig,
    zero_doppler_guard: usize,
) -> Result<Vec<CellPeak>> {
    if grid.is_empty() {
        return Err(Error::config("empty angle grid"));
    }
    if cube.num_antennas() != cfg.num_antennas() {
        return Err(Error::ShapeError {
            expected: (cube.num_delay_bins(), cfg.num_antennas()),
            actual: (cube.num_delay_bins(), cube.num_antennas()),
        });
    }
    let steering = grid.conj_steering_matrix(cfg);
    let doppler_bins: Vec<usize> = (0..cube.num_doppler_bins())
        .filter(|&d| cube.signed_bin(d).unsigned_abs() > zero_doppler_guard)
        .collect();
    let mut out = Vec::with_capacity(cube.num_delay_bins() * doppler_bins.len());
    if doppler_bins.is_empty() {
        return Ok(out);
    }
    for t_s in 0..cube.num_delay_bins() {
        // antennas x doppler -> grid x doppler
        let slab = cube.values().slice(s![t_s, .., ..]);
        let corr = steering.dot(&slab);
        for &d in &doppler_bins {
            let mut best = (0usize, f64::NEG_INFINITY);
            for (id, z) in corr.column(d).iter().enumerate() {
                let p = z.norm_sqr();
                if p > best.1 {
                    best = (id, p);
                }
            }
            out.push(CellPeak {
                delay_bin: t_s,
                doppler_bin: d,
                aoa_id: best.0,
                power: best.1,
            });
        }
    }
    Ok(out)
}
