//! Delay/phase alignment against the reference packet and differential
//! clutter cancellation.
//!
//! Every packet `t` is correlated with the reference `Y0`, the residual
//! linear phase slope across subcarriers (timing offset) and the common
//! phase (carrier offset) are estimated, removed, and the reference is
//! subtracted. What survives is whatever moved since the reference was
//! taken.
//!
//! The estimates can be formed per antenna or jointly over the array. A
//! moving target leaks a small Doppler-rate wobble into either estimate,
//! which then modulates the static clutter and shows up as faint ghost
//! peaks at the target's Doppler. Pooling the array averages most of that
//! leakage away, and since every antenna shares one sampling clock and
//! oscillator the offsets really are common, so joint is the default.

use ndarray::{Array2, ArrayView1, ArrayView2, Zip};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::doppler::Taper;
use crate::error::{Error, Result};
use crate::sim::PacketMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocConfig {
    /// Subcarrier shift used by the delay-slope estimator.
    pub shift: usize,
    pub ifft_size: usize,
    /// Delay bins kept after the IFFT.
    pub truncation: usize,
    /// Subcarrier taper applied to the differential spectrum before the IFFT.
    pub delay_taper: Taper,
    pub alignment: AlignmentMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMode {
    /// One slope and phase per antenna column.
    PerAntenna,
    /// One slope and phase for the whole packet.
    #[default]
    Joint,
}

impl Default for PreprocConfig {
    fn default() -> Self {
        Self {
            shift: 8,
            ifft_size: 4096,
            truncation: 512,
            delay_taper: Taper::Hann,
            alignment: AlignmentMode::Joint,
        }
    }
}

impl PreprocConfig {
    pub fn validate(&self, num_subcarriers: usize) -> Result<()> {
        if self.shift == 0 || self.shift >= num_subcarriers {
            return Err(Error::config(format!(
                "shift must be in 1..{num_subcarriers}, got {}",
                self.shift
            )));
        }
        if self.ifft_size < num_subcarriers {
            return Err(Error::config(format!(
                "ifft_size {} is smaller than the {num_subcarriers} subcarriers",
                self.ifft_size
            )));
        }
        if self.truncation == 0 || self.truncation > self.ifft_size {
            return Err(Error::config(format!(
                "truncation must be in 1..={}, got {}",
                self.ifft_size, self.truncation
            )));
        }
        Ok(())
    }
}

/// Time-domain differential response of one packet, `Ts x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialChannel {
    pub packet_index: usize,
    pub h: Array2<Complex64>,
}

fn check_shape(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::ShapeError { expected, actual });
    }
    Ok(())
}

/// `R = Y0 * conj(Yt)`, element-wise.
pub fn correlate_with_reference(
    reference: &PacketMatrix,
    packet: &PacketMatrix,
) -> Result<Array2<Complex64>> {
    check_shape(reference.dim(), packet.dim())?;
    Ok(Zip::from(&reference.samples)
        .and(&packet.samples)
        .map_collect(|a, b| a * b.conj()))
}

/// Per-antenna phase slope of `R` across subcarriers, radians per
/// subcarrier, from the lag-`shift` autocorrelation. Unambiguous while
/// `|slope| < pi / shift`.
pub fn estimate_delay_slope(r: ArrayView2<Complex64>, shift: usize) -> Result<Vec<f64>> {
    check_shift(r, shift)?;
    r.columns()
        .into_iter()
        .enumerate()
        .map(|(n, col)| slope_from_lag_sum(lag_sum(col, shift), shift, n))
        .collect()
}

/// Single slope for the whole array: the lag products of all antennas are
/// summed before taking the angle.
pub fn estimate_joint_delay_slope(r: ArrayView2<Complex64>, shift: usize) -> Result<f64> {
    check_shift(r, shift)?;
    let sum = r.columns().into_iter().map(|col| lag_sum(col, shift)).sum();
    slope_from_lag_sum(sum, shift, 0)
}

fn check_shift(r: ArrayView2<Complex64>, shift: usize) -> Result<()> {
    let m_len = r.nrows();
    if shift == 0 || shift >= m_len {
        return Err(Error::config(format!("shift {shift} out of range for {m_len} subcarriers")));
    }
    Ok(())
}

fn lag_sum(col: ArrayView1<Complex64>, shift: usize) -> Complex64 {
    (0..col.len() - shift)
        .map(|u| col[u] * col[u + shift].conj())
        .sum()
}

fn slope_from_lag_sum(sum: Complex64, shift: usize, antenna: usize) -> Result<f64> {
    if sum == Complex64::new(0.0, 0.0) {
        return Err(Error::IndeterminatePhase { antenna });
    }
    Ok(-sum.arg() / shift as f64)
}

/// `D(m, n) = exp(j (m - M/2) slope_n)`.
fn slope_phasor(m: usize, m_len: usize, slope: f64) -> Complex64 {
    Complex64::cis((m as f64 - (m_len / 2) as f64) * slope)
}

/// Per-antenna phase of `R` at band centre after removing the slope.
pub fn estimate_initial_phase(r: ArrayView2<Complex64>, slope: &[f64]) -> Result<Vec<f64>> {
    let n_len = r.ncols();
    if slope.len() != n_len {
        return Err(Error::ShapeError {
            expected: (1, n_len),
            actual: (1, slope.len()),
        });
    }
    r.columns()
        .into_iter()
        .zip(slope)
        .enumerate()
        .map(|(n, (col, &s))| {
            if !s.is_finite() {
                return Err(Error::IndeterminatePhase { antenna: n });
            }
            phase_from_sum(deramped_sum(col, s), n)
        })
        .collect()
}

/// Array-wide counterpart of [`estimate_initial_phase`].
pub fn estimate_joint_initial_phase(r: ArrayView2<Complex64>, slope: f64) -> Result<f64> {
    if !slope.is_finite() {
        return Err(Error::IndeterminatePhase { antenna: 0 });
    }
    let sum = r.columns().into_iter().map(|col| deramped_sum(col, slope)).sum();
    phase_from_sum(sum, 0)
}

fn deramped_sum(col: ArrayView1<Complex64>, slope: f64) -> Complex64 {
    let m_len = col.len();
    col.iter()
        .enumerate()
        .map(|(m, z)| z * slope_phasor(m, m_len, slope).conj())
        .sum()
}

fn phase_from_sum(sum: Complex64, antenna: usize) -> Result<f64> {
    if sum == Complex64::new(0.0, 0.0) {
        return Err(Error::IndeterminatePhase { antenna });
    }
    Ok(sum.arg())
}

/// Aligns a packet to the reference: `C = Y * D * exp(j P_ini)`.
///
/// `R = Y0 conj(Yt)` carries the reference-minus-packet phase, so the
/// packet is rotated forward by the estimates.
pub fn compensate(packet: &PacketMatrix, slope: &[f64], initial_phase: &[f64]) -> Result<Array2<Complex64>> {
    let (m_len, n_len) = packet.dim();
    check_shape((m_len, n_len), (m_len, slope.len()))?;
    check_shape((m_len, n_len), (m_len, initial_phase.len()))?;
    let phase: Vec<Complex64> = initial_phase.iter().map(|p| Complex64::cis(*p)).collect();
    Ok(Array2::from_shape_fn((m_len, n_len), |(m, n)| {
        packet.samples[[m, n]] * slope_phasor(m, m_len, slope[n]) * phase[n]
    }))
}

pub fn differential(current: &Array2<Complex64>, reference: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    check_shape(reference.dim(), current.dim())?;
    Ok(current - reference)
}

/// `ifft_size`-point IFFT (scaled by `1/ifft_size`) down each antenna
/// column, keeping the first `truncation` delay bins.
pub fn to_time_domain(
    c_diff: ArrayView2<Complex64>,
    ifft_size: usize,
    truncation: usize,
    packet_index: usize,
) -> Result<DifferentialChannel> {
    let (m_len, n_len) = c_diff.dim();
    if truncation > ifft_size {
        return Err(Error::config(format!(
            "truncation {truncation} exceeds ifft_size {ifft_size}"
        )));
    }
    if ifft_size < m_len {
        return Err(Error::config(format!(
            "ifft_size {ifft_size} is smaller than the {m_len} subcarriers"
        )));
    }
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(ifft_size);
    let scale = 1.0 / ifft_size as f64;
    let mut h = Array2::zeros((truncation, n_len));
    let mut buf = vec![Complex64::new(0.0, 0.0); ifft_size];
    for n in 0..n_len {
        buf.fill(Complex64::new(0.0, 0.0));
        for (dst, src) in buf.iter_mut().zip(c_diff.column(n)) {
            *dst = *src;
        }
        ifft.process(&mut buf);
        for k in 0..truncation {
            h[[k, n]] = buf[k] * scale;
        }
    }
    Ok(DifferentialChannel { packet_index, h })
}

/// Delay and phase estimates for one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub slope: Vec<f64>,
    pub initial_phase: Vec<f64>,
}

/// Holds the reference packet and turns later packets into differential
/// channels.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    reference: PacketMatrix,
    config: PreprocConfig,
    taper: Vec<f64>,
}

impl Preprocessor {
    pub fn new(reference: PacketMatrix, config: PreprocConfig) -> Result<Self> {
        let m_len = reference.dim().0;
        config.validate(m_len)?;
        let taper = config.delay_taper.weights(m_len);
        Ok(Self {
            reference,
            config,
            taper,
        })
    }

    pub fn reference(&self) -> &PacketMatrix {
        &self.reference
    }

    pub fn config(&self) -> &PreprocConfig {
        &self.config
    }

    pub fn align(&self, packet: &PacketMatrix) -> Result<Alignment> {
        let r = correlate_with_reference(&self.reference, packet)?;
        let (slope, initial_phase) = match self.config.alignment {
            AlignmentMode::PerAntenna => {
                let slope = estimate_delay_slope(r.view(), self.config.shift)?;
                let phase = estimate_initial_phase(r.view(), &slope)?;
                (slope, phase)
            }
            AlignmentMode::Joint => {
                let n = r.ncols();
                let slope = estimate_joint_delay_slope(r.view(), self.config.shift)?;
                let phase = estimate_joint_initial_phase(r.view(), slope)?;
                (vec![slope; n], vec![phase; n])
            }
        };
        Ok(Alignment {
            slope,
            initial_phase,
        })
    }

    pub fn compensated(&self, packet: &PacketMatrix) -> Result<Array2<Complex64>> {
        let a = self.align(packet)?;
        compensate(packet, &a.slope, &a.initial_phase)
    }

    /// Aligned packet minus reference, before the IFFT.
    pub fn differential_spectrum(&self, packet: &PacketMatrix) -> Result<Array2<Complex64>> {
        differential(&self.compensated(packet)?, &self.reference.samples)
    }

    pub fn process(&self, packet: &PacketMatrix) -> Result<DifferentialChannel> {
        let mut c_diff = self.differential_spectrum(packet)?;
        for (mut row, w) in c_diff.outer_iter_mut().zip(&self.taper) {
            row.mapv_inplace(|z| z * *w);
        }
        to_time_domain(
            c_diff.view(),
            self.config.ifft_size,
            self.config.truncation,
            packet.index,
        )
    }
}
