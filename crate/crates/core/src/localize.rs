//! Closed-form position from a bistatic sum-range and an arrival direction,
//! receiver at the origin.

use crate::aoa::AoaGrid;
use crate::detect::Detection;
use crate::error::{Error, Result};
use crate::scene::{Position3, RadioConfig, Spherical};

/// Default lower bound on `|denominator|` in [`solve_bistatic`].
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Bistatic observables of one detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Transmitter-target-receiver path length, meters.
    pub sum_range: f64,
    /// Polar angle from +z, radians.
    pub polar: f64,
    /// Azimuth from +x, radians.
    pub azimuth: f64,
}

/// Delay bin to sum-range, grid index to angles.
pub fn measurement_from_detection(
    detection: &Detection,
    grid: &AoaGrid,
    radio: &RadioConfig,
    ifft_size: usize,
) -> Measurement {
    let angles = grid.angles(detection.aoa_id);
    Measurement {
        sum_range: detection.delay_bin as f64 * radio.range_bin(ifft_size),
        polar: angles.polar(),
        azimuth: angles.azimuth,
    }
}

/// Solves `r = r' + |p - tx|` along the measured direction:
///
/// `r' = (|tx|^2 - r^2) / (2 tx . u - 2 r)`
///
/// Rejects near-zero denominators and roots that do not satisfy the
/// unsquared equation (`0 < r' <= r`).
pub fn solve_bistatic(meas: &Measurement, tx: Position3, epsilon: f64) -> Result<Position3> {
    let u = Spherical {
        range: 1.0,
        polar: meas.polar,
        azimuth: meas.azimuth,
    }
    .to_cartesian();
    let r = meas.sum_range;
    let d = tx.norm();
    let denominator = 2.0 * (tx.dot(&u) - r);
    if !(denominator.abs() > epsilon) {
        return Err(Error::DegenerateGeometry { denominator });
    }
    // (|tx| - r)(|tx| + r) loses less precision than |tx|^2 - r^2.
    let range = (d - r) * (d + r) / denominator;
    if !(range > 0.0) || range > r * (1.0 + 1e-12) {
        return Err(Error::NoPhysicalSolution { range });
    }
    Ok(u * range)
}
