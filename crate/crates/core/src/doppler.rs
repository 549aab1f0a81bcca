//! Slow-time FFT across the differential channels of one processing window.

use std::io::Write;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::DifferentialChannel;

/// Amplitude taper applied before a transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    #[default]
    Rectangular,
    Hann,
}

impl Taper {
    /// Symmetric weights of length `len`.
    pub fn weights(self, len: usize) -> Vec<f64> {
        match self {
            Taper::Rectangular => vec![1.0; len],
            Taper::Hann if len <= 1 => vec![1.0; len],
            Taper::Hann => (0..len)
                .map(|i| {
                    let x = 2.0 * std::f64::consts::PI * i as f64 / (len - 1) as f64;
                    0.5 - 0.5 * x.cos()
                })
                .collect(),
        }
    }
}

/// Delay x antenna x Doppler spectrum. The Doppler axis is in natural FFT
/// order: bin `d` maps to signed bin `d` for `d < T/2`, `d - T` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerCube {
    values: Array3<Complex64>,
    bin_spacing: f64,
}

impl DopplerCube {
    pub fn new(values: Array3<Complex64>, bin_spacing: f64) -> Self {
        Self {
            values,
            bin_spacing,
        }
    }

    pub fn values(&self) -> &Array3<Complex64> {
        &self.values
    }

    pub fn num_delay_bins(&self) -> usize {
        self.values.dim().0
    }

    pub fn num_antennas(&self) -> usize {
        self.values.dim().1
    }

    pub fn num_doppler_bins(&self) -> usize {
        self.values.dim().2
    }

    /// Doppler resolution, Hz.
    pub fn bin_spacing(&self) -> f64 {
        self.bin_spacing
    }

    pub fn signed_bin(&self, d: usize) -> isize {
        signed_bin(d, self.num_doppler_bins())
    }

    pub fn doppler_hz(&self, d: usize) -> f64 {
        self.signed_bin(d) as f64 * self.bin_spacing
    }

    /// Per-cell power, summed over antennas.
    pub fn power_map(&self) -> Array2<f64> {
        let (ts, _, td) = self.values.dim();
        Array2::from_shape_fn((ts, td), |(t, d)| {
            self.values
                .slice(ndarray::s![t, .., d])
                .iter()
                .map(|z| z.norm_sqr())
                .sum()
        })
    }

    /// Writes `delay_bin,doppler_bin,doppler_hz,power` rows using the largest
    /// single-antenna power of each cell.
    pub fn write_power_map_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::Parse {
            path: "<power map>".into(),
            message: e.to_string(),
        };
        w.write_record(["delay_bin", "doppler_bin", "doppler_hz", "power"])
            .map_err(to_err)?;
        let (ts, _, td) = self.values.dim();
        for t in 0..ts {
            for d in 0..td {
                let p = self
                    .values
                    .slice(ndarray::s![t, .., d])
                    .iter()
                    .map(|z| z.norm_sqr())
                    .fold(0.0, f64::max);
                w.write_record(&[
                    t.to_string(),
                    self.signed_bin(d).to_string(),
                    self.doppler_hz(d).to_string(),
                    p.to_string(),
                ])
                .map_err(to_err)?;
            }
        }
        w.flush().map_err(|e| Error::io("<power map>", e))
    }
}

pub fn signed_bin(d: usize, len: usize) -> isize {
    if d < len.div_ceil(2) {
        d as isize
    } else {
        d as isize - len as isize
    }
}

/// `T`-point FFT over consecutive differential channels, per delay bin and
/// antenna. Unnormalized, so that `sum_d |X|^2 = T * sum_t |h|^2` for the
/// rectangular taper.
pub fn doppler_transform(
    frames: &[DifferentialChannel],
    packet_period: f64,
    taper: Taper,
) -> Result<DopplerCube> {
    let t_len = frames.len();
    if t_len < 2 {
        return Err(Error::WindowIncomplete(format!(
            "need at least 2 packets, got {t_len}"
        )));
    }
    for w in frames.windows(2) {
        if w[1].packet_index != w[0].packet_index + 1 {
            return Err(Error::WindowIncomplete(format!(
                "packet {} follows packet {}",
                w[1].packet_index, w[0].packet_index
            )));
        }
    }
    let (ts, n) = frames[0].h.dim();
    if let Some(bad) = frames.iter().find(|f| f.h.dim() != (ts, n)) {
        return Err(Error::ShapeError {
            expected: (ts, n),
            actual: bad.h.dim(),
        });
    }

    let weights = taper.weights(t_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t_len);
    let mut values = Array3::zeros((ts, n, t_len));
    let mut buf = vec![Complex64::new(0.0, 0.0); t_len];
    for delay in 0..ts {
        for ant in 0..n {
            for (t, f) in frames.iter().enumerate() {
                buf[t] = f.h[[delay, ant]] * weights[t];
            }
            fft.process(&mut buf);
            for (d, z) in buf.iter().enumerate() {
                values[[delay, ant, d]] = *z;
            }
        }
    }
    Ok(DopplerCube::new(
        values,
        1.0 / (t_len as f64 * packet_period),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frames_from(f: impl Fn(usize, usize, usize) -> Complex64, t: usize) -> Vec<DifferentialChannel> {
        (0..t)
            .map(|k| DifferentialChannel {
                packet_index: k + 1,
                h: Array2::from_shape_fn((3, 2), |(d, n)| f(k, d, n)),
            })
            .collect()
    }

    fn energy(frames: &[DifferentialChannel]) -> f64 {
        frames.iter().flat_map(|f| f.h.iter()).map(|z| z.norm_sqr()).sum()
    }

    #[test]
    fn constant_sequence_lands_in_dc() {
        let frames = frames_from(|_, d, n| Complex64::new(1.0 + d as f64, n as f64), 8);
        let cube = doppler_transform(&frames, 0.005, Taper::Rectangular).unwrap();
        for ((_, _, d), z) in cube.values().indexed_iter() {
            if d != 0 {
                assert!(z.norm() < 1e-12);
            }
        }
        assert_relative_eq!(cube.bin_spacing(), 25.0, epsilon = 1e-12);
    }

    #[test]
    fn basis_vector_peaks_at_its_bin() {
        let t = 16;
        for k in [1usize, 5, 11] {
            let frames = frames_from(
                |tt, _, _| Complex64::cis(2.0 * std::f64::consts::PI * (k * tt) as f64 / t as f64),
                t,
            );
            let cube = doppler_transform(&frames, 0.005, Taper::Rectangular).unwrap();
            let map = cube.power_map();
            for d in 0..t {
                let expect = if d == k { (t * t * 2) as f64 } else { 0.0 };
                assert!((map[[0, d]] - expect).abs() < 1e-9, "bin {d}");
            }
        }
    }

    #[test]
    fn signed_bins_center_dc() {
        let order: Vec<_> = (0..8).map(|d| signed_bin(d, 8)).collect();
        assert_eq!(order, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        let order: Vec<_> = (0..5).map(|d| signed_bin(d, 5)).collect();
        assert_eq!(order, vec![0, 1, 2, -2, -1]);
    }

    #[test]
    fn gaps_and_short_windows_are_incomplete() {
        let mut frames = frames_from(|_, _, _| Complex64::new(1.0, 0.0), 4);
        assert!(matches!(
            doppler_transform(&frames[..1], 0.005, Taper::Rectangular),
            Err(Error::WindowIncomplete(_))
        ));
        frames.remove(2);
        assert!(matches!(
            doppler_transform(&frames, 0.005, Taper::Rectangular),
            Err(Error::WindowIncomplete(_))
        ));
    }

    #[test]
    fn parseval_and_shift_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = 32;
        let raw: Vec<Complex64> = (0..t * 6)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let frames = frames_from(|tt, d, n| raw[tt * 6 + d * 2 + n], t);
        let cube = doppler_transform(&frames, 0.005, Taper::Rectangular).unwrap();
        let spectral: f64 = cube.values().iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(spectral, t as f64 * energy(&frames), max_relative = 1e-12);

        let k = 7;
        let shifted = frames_from(
            |tt, d, n| {
                raw[tt * 6 + d * 2 + n]
                    * Complex64::cis(2.0 * std::f64::consts::PI * (k * tt) as f64 / t as f64)
            },
            t,
        );
        let cube2 = doppler_transform(&shifted, 0.005, Taper::Rectangular).unwrap();
        for ((a, b, d), z) in cube.values().indexed_iter() {
            let w = cube2.values()[[a, b, (d + k) % t]];
            assert!((w - z).norm() <= 1e-12 * (1.0 + z.norm()));
        }
    }

    #[test]
    fn hann_weights_are_symmetric() {
        let w = Taper::Hann.weights(9);
        assert_eq!(w[0], 0.0);
        assert_relative_eq!(w[4], 1.0);
        for i in 0..9 {
            assert_relative_eq!(w[i], w[8 - i], epsilon = 1e-15);
        }
    }

    #[test]
    fn power_map_csv_has_one_row_per_cell() {
        let frames = frames_from(|_, _, _| Complex64::new(1.0, 0.0), 4);
        let cube = doppler_transform(&frames, 0.005, Taper::Rectangular).unwrap();
        let mut out = Vec::new();
        cube.write_power_map_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 4);
        assert!(text.starts_with("delay_bin,doppler_bin,doppler_hz,power"));
    }
}
