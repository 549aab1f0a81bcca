//! Geometry, radio parameters and ground-truth scene description.
//!
//! Positions are local Cartesian meters with the receiving base station at
//! the origin. The receive array faces +x: azimuth is measured from +x
//! towards +y, elevation from the x-y plane towards +z. The polar angle
//! used by the localizer is `pi/2 - elevation`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Radio and array parameters shared by the simulator and the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    pub subcarrier_spacing: f64,
    pub num_subcarriers: usize,
    pub packet_period: f64,
    pub array_rows: usize,
    pub array_cols: usize,
    /// Element pitch in wavelengths.
    pub element_spacing: f64,
}

impl RadioConfig {
    /// 4.85 GHz carrier, 100 MHz (273 RBs of 12 subcarriers at 30 kHz),
    /// 8x8 half-wavelength array and one sensing packet per 5 ms half-frame.
    pub fn full_scale() -> Self {
        Self {
            carrier_frequency: 4.85e9,
            bandwidth: 100e6,
            subcarrier_spacing: 30e3,
            num_subcarriers: 273 * 12,
            packet_period: 0.005,
            array_rows: 8,
            array_cols: 8,
            element_spacing: 0.5,
        }
    }

    /// Reduced configuration used for tests and examples: 34 RBs (408
    /// subcarriers) and a 4x4 array, same carrier, spacing and timing.
    pub fn desk_scale() -> Self {
        Self {
            bandwidth: 34.0 * 12.0 * 30e3,
            num_subcarriers: 34 * 12,
            array_rows: 4,
            array_cols: 4,
            ..Self::full_scale()
        }
    }

    pub fn num_antennas(&self) -> usize {
        self.array_rows * self.array_cols
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Largest delay representable without wrapping, `1 / subcarrier_spacing`.
    pub fn unambiguous_delay(&self) -> f64 {
        1.0 / self.subcarrier_spacing
    }

    /// Largest bistatic sum-range representable without wrapping.
    pub fn unambiguous_range(&self) -> f64 {
        SPEED_OF_LIGHT / self.subcarrier_spacing
    }

    /// Sum-range covered by one delay bin of an `ifft_size`-point transform.
    pub fn range_bin(&self, ifft_size: usize) -> f64 {
        SPEED_OF_LIGHT / (ifft_size as f64 * self.subcarrier_spacing)
    }

    /// Baseband frequency of subcarrier `m`, relative to band center.
    pub fn subcarrier_offset(&self, m: usize) -> f64 {
        (m as f64 - (self.num_subcarriers / 2) as f64) * self.subcarrier_spacing
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_frequency", self.carrier_frequency),
            ("bandwidth", self.bandwidth),
            ("subcarrier_spacing", self.subcarrier_spacing),
            ("packet_period", self.packet_period),
            ("element_spacing", self.element_spacing),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.num_subcarriers == 0 {
            return Err(Error::config("num_subcarriers must be positive"));
        }
        if self.num_antennas() == 0 {
            return Err(Error::config("array must have at least one element"));
        }
        let occupied = self.num_subcarriers as f64 * self.subcarrier_spacing;
        if occupied > self.bandwidth * (1.0 + 1e-9) {
            return Err(Error::config(format!(
                "{} subcarriers at {} Hz occupy {occupied} Hz, more than the {} Hz bandwidth",
                self.num_subcarriers, self.subcarrier_spacing, self.bandwidth
            )));
        }
        Ok(())
    }
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self::full_scale()
    }
}

/// A point in the receiver-centred Cartesian frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const ORIGIN: Position3 = Position3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Position3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn distance(&self, other: &Position3) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Position3 {
    type Output = Position3;
    fn add(self, o: Position3) -> Position3 {
        Position3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Position3 {
    type Output = Position3;
    fn sub(self, o: Position3) -> Position3 {
        Position3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Position3 {
    type Output = Position3;
    fn mul(self, k: f64) -> Position3 {
        Position3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for Position3 {
    type Output = Position3;
    fn neg(self) -> Position3 {
        Position3::new(-self.x, -self.y, -self.z)
    }
}

/// Spherical coordinates about the receiver: range `r'`, polar angle
/// measured from +z, azimuth from +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spherical {
    pub range: f64,
    pub polar: f64,
    pub azimuth: f64,
}

impl Spherical {
    pub fn to_cartesian(&self) -> Position3 {
        let (sp, cp) = self.polar.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        Position3::new(
            self.range * sp * ca,
            self.range * sp * sa,
            self.range * cp,
        )
    }
}

/// Sum of the transmitter-to-target and target-to-receiver distances.
pub fn bistatic_range(target: Position3, tx: Position3) -> f64 {
    target.norm() + target.distance(&tx)
}

/// Inverse of [`Spherical::to_cartesian`]. On the z axis the azimuth is 0.
pub fn spherical_from_cartesian(p: Position3) -> Result<Spherical> {
    let range = p.norm();
    if range == 0.0 || !range.is_finite() {
        return Err(Error::DegenerateDirection);
    }
    let rho = p.x.hypot(p.y);
    let polar = rho.atan2(p.z);
    let azimuth = if rho == 0.0 { 0.0 } else { p.y.atan2(p.x) };
    Ok(Spherical {
        range,
        polar,
        azimuth,
    })
}

/// Arrival direction in array angles (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalAngles {
    pub azimuth: f64,
    pub elevation: f64,
}

impl ArrivalAngles {
    pub fn from_degrees(azimuth: f64, elevation: f64) -> Self {
        Self {
            azimuth: azimuth.to_radians(),
            elevation: elevation.to_radians(),
        }
    }

    /// Angles of the line of sight from the receiver to `p`.
    pub fn towards(p: Position3) -> Result<Self> {
        let s = spherical_from_cartesian(p)?;
        Ok(Self {
            azimuth: s.azimuth,
            elevation: std::f64::consts::FRAC_PI_2 - s.polar,
        })
    }

    pub fn polar(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 - self.elevation
    }

    pub fn unit_vector(&self) -> Position3 {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        Position3::new(ce * ca, ce * sa, se)
    }
}

/// A moving point scatterer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub initial_position: Position3,
    /// Constant velocity, m/s.
    pub velocity: Position3,
    /// Linear amplitude scale of the reflected path.
    pub reflectivity: f64,
}

impl TargetSpec {
    pub fn position_at(&self, time: f64) -> Position3 {
        self.initial_position + self.velocity * time
    }
}

/// A static propagation path (building, parked car, direct path).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterPath {
    /// Bistatic delay, seconds.
    pub delay: f64,
    pub amplitude: f64,
    pub azimuth: f64,
    pub elevation: f64,
}

impl ClutterPath {
    pub fn angles(&self) -> ArrivalAngles {
        ArrivalAngles {
            azimuth: self.azimuth,
            elevation: self.elevation,
        }
    }
}

/// Per-packet timing/phase impairment between unsynchronized stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyncModel {
    pub enabled: bool,
    /// Timing offsets are uniform in `+-timing_spread / bandwidth`.
    pub timing_spread: f64,
    /// Phase offsets are uniform in `(-phase_spread, phase_spread]` radians.
    pub phase_spread: f64,
}

impl Default for SyncModel {
    fn default() -> Self {
        Self {
            enabled: true,
            timing_spread: 0.1,
            phase_spread: std::f64::consts::PI,
        }
    }
}

/// Ground-truth description of everything the receiver sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub tx_position: Position3,
    #[serde(default, rename = "target")]
    pub targets: Vec<TargetSpec>,
    #[serde(default, rename = "clutter")]
    pub clutter_paths: Vec<ClutterPath>,
    /// Linear noise power per sample (`E|n|^2`).
    #[serde(default)]
    pub noise_power: f64,
    #[serde(default)]
    pub sync: SyncModel,
}

impl Scene {
    pub fn new(tx_position: Position3) -> Self {
        Self {
            tx_position,
            targets: Vec::new(),
            clutter_paths: Vec::new(),
            noise_power: 0.0,
            sync: SyncModel::default(),
        }
    }

    /// Sets the noise power so that the strongest target path (or the
    /// strongest clutter path when there are no targets) sits `snr_db`
    /// above the per-sample noise.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        let strongest = self
            .targets
            .iter()
            .map(|t| t.reflectivity)
            .fold(None, |acc: Option<f64>, a| Some(acc.map_or(a, |b| b.max(a))))
            .or_else(|| {
                self.clutter_paths
                    .iter()
                    .map(|c| c.amplitude.abs())
                    .reduce(f64::max)
            })
            .unwrap_or(1.0);
        self.noise_power = strongest * strongest / 10f64.powf(snr_db / 10.0);
        self
    }

    pub fn with_sync_offsets(mut self, enabled: bool) -> Self {
        self.sync.enabled = enabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tx_position.is_finite() || self.tx_position == Position3::ORIGIN {
            return Err(Error::config(
                "transmitter must be at a finite position away from the receiver",
            ));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !(t.reflectivity > 0.0) || !t.initial_position.is_finite() || !t.velocity.is_finite()
            {
                return Err(Error::config(format!("target {i} is malformed")));
            }
        }
        for (i, c) in self.clutter_paths.iter().enumerate() {
            if !(c.delay >= 0.0) || !c.amplitude.is_finite() {
                return Err(Error::config(format!("clutter path {i} is malformed")));
            }
        }
        if !(self.noise_power >= 0.0) {
            return Err(Error::config("noise_power must be non-negative"));
        }
        Ok(())
    }
}
