//! End-to-end sensing over a capture: packets in, detections and track
//! updates out, one report per processing window.
//!
//! Packet 0 is the reference for the whole capture. Window `w` takes the
//! differential channels of packets `1 + w * hop .. 1 + w * hop + T`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aoa::{aoa_power_search, AoaGrid, AoaGridSpec};
use crate::detect::{local_peaks, partition_peaks, select_candidates, Detection, DetectorConfig};
use crate::doppler::{doppler_transform, DopplerCube, Taper};
use crate::error::{Error, Result};
use crate::io::capture::CaptureHeader;
use crate::io::records::TrackRecord;
use crate::localize::{measurement_from_detection, solve_bistatic, DEFAULT_EPSILON};
use crate::preprocess::{DifferentialChannel, PreprocConfig, Preprocessor};
use crate::scene::{Position3, RadioConfig};
use crate::sim::PacketMatrix;
use crate::track::{TrackUpdate, Tracker, TrackerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DopplerConfig {
    /// Packets per window (`T`).
    pub window: usize,
    /// Packets between window starts; defaults to `window`.
    pub hop: Option<usize>,
    pub zero_doppler_guard: usize,
    pub taper: Taper,
}

impl Default for DopplerConfig {
    fn default() -> Self {
        Self {
            window: 64,
            hop: None,
            zero_doppler_guard: 2,
            taper: Taper::Rectangular,
        }
    }
}

impl DopplerConfig {
    pub fn hop(&self) -> usize {
        self.hop.unwrap_or(self.window)
    }
}

/// Array layout when the radio parameters come from a capture header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub element_spacing: f64,
    /// Occupied bandwidth; defaults to subcarriers times spacing.
    pub bandwidth: Option<f64>,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            rows: None,
            cols: None,
            element_spacing: 0.5,
            bandwidth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub tx_position: Position3,
}

/// Everything the sensing chain needs besides the radio parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SenseConfig {
    pub geometry: Geometry,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub preprocess: PreprocConfig,
    #[serde(default)]
    pub doppler: DopplerConfig,
    #[serde(default)]
    pub aoa: AoaGridSpec,
    #[serde(default)]
    pub detect: DetectorConfig,
    #[serde(default)]
    pub track: TrackerConfig,
}

impl SenseConfig {
    pub fn new(tx_position: Position3) -> Self {
        Self {
            geometry: Geometry { tx_position },
            array: ArrayConfig::default(),
            preprocess: PreprocConfig::default(),
            doppler: DopplerConfig::default(),
            aoa: AoaGridSpec::default(),
            detect: DetectorConfig::default(),
            track: TrackerConfig::default(),
        }
    }

    /// Layout used for the reduced radio: 128 delay bins (8 regions of 16),
    /// otherwise defaults.
    pub fn desk_scale(tx_position: Position3) -> Self {
        let mut cfg = Self::new(tx_position);
        cfg.preprocess.truncation = 128;
        cfg.detect.region_count = 8;
        cfg
    }

    /// Radio parameters from a capture header plus the array section.
    pub fn radio_for(&self, header: &CaptureHeader) -> Result<RadioConfig> {
        let n = header.num_antennas as usize;
        let (rows, cols) = match (self.array.rows, self.array.cols) {
            (Some(r), Some(c)) => (r, c),
            (Some(r), None) if r > 0 && n.is_multiple_of(r) => (r, n / r),
            (None, Some(c)) if c > 0 && n.is_multiple_of(c) => (n / c, c),
            (None, None) => {
                let side = (n as f64).sqrt().round() as usize;
                (side, side)
            }
            _ => return Err(Error::config(format!("array layout does not fit {n} antennas"))),
        };
        if rows * cols != n {
            return Err(Error::config(format!(
                "array {rows}x{cols} does not match the capture's {n} antennas"
            )));
        }
        let radio = RadioConfig {
            carrier_frequency: header.carrier_frequency,
            bandwidth: self
                .array
                .bandwidth
                .unwrap_or(header.num_subcarriers as f64 * header.subcarrier_spacing),
            subcarrier_spacing: header.subcarrier_spacing,
            num_subcarriers: header.num_subcarriers as usize,
            packet_period: header.packet_period,
            array_rows: rows,
            array_cols: cols,
            element_spacing: self.array.element_spacing,
        };
        radio.validate()?;
        Ok(radio)
    }
}

/// Output of one processing window.
#[derive(Debug, Clone)]
pub struct WindowReport {
    pub index: usize,
    /// Mid-window time, seconds.
    pub timestamp: f64,
    pub first_packet: usize,
    pub threshold: f64,
    /// Selected peaks; `position` is set when localization succeeded.
    pub detections: Vec<Detection>,
    pub updates: Vec<TrackUpdate>,
}

/// Stateful sensing chain for one receiver.
#[derive(Debug)]
pub struct Sensor {
    radio: RadioConfig,
    config: SenseConfig,
    grid: AoaGrid,
    tracker: Tracker,
}

impl Sensor {
    pub fn new(radio: RadioConfig, config: SenseConfig) -> Result<Self> {
        radio.validate()?;
        config.preprocess.validate(radio.num_subcarriers)?;
        config.detect.validate(config.preprocess.truncation)?;
        if config.doppler.window < 2 || config.doppler.hop() == 0 {
            return Err(Error::config("doppler window must be at least 2 and hop positive"));
        }
        let grid = AoaGrid::from_spec(&config.aoa)?;
        let tracker = Tracker::new(config.track.clone())?;
        Ok(Self {
            radio,
            config,
            grid,
            tracker,
        })
    }

    pub fn radio(&self) -> &RadioConfig {
        &self.radio
    }

    pub fn config(&self) -> &SenseConfig {
        &self.config
    }

    pub fn grid(&self) -> &AoaGrid {
        &self.grid
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    /// Number of complete windows in a capture of `packets` packets.
    pub fn window_count(&self, packets: usize) -> usize {
        let t = self.config.doppler.window;
        if packets < t + 1 {
            0
        } else {
            (packets - 1 - t) / self.config.doppler.hop() + 1
        }
    }

    /// Differential channels of packets `1..` against packet 0.
    pub fn differentials(&self, packets: &[PacketMatrix]) -> Result<Vec<DifferentialChannel>> {
        let reference = packets
            .first()
            .ok_or_else(|| Error::WindowIncomplete("capture is empty".into()))?;
        let pre = Preprocessor::new(reference.clone(), self.config.preprocess.clone())?;
        packets[1..].par_iter().map(|p| pre.process(p)).collect()
    }

    /// Power a single path carrying all of the reference packet's energy
    /// would reach after the full chain.
    pub fn reference_power(&self, reference: &PacketMatrix) -> f64 {
        let (m, n) = reference.dim();
        let mean = reference.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / (m * n) as f64;
        let taper: f64 = self.config.preprocess.delay_taper.weights(m).iter().sum();
        let slow: f64 = self
            .config
            .doppler
            .taper
            .weights(self.config.doppler.window)
            .iter()
            .sum();
        let gain = n as f64 * slow * taper / self.config.preprocess.ifft_size as f64;
        mean * gain * gain
    }

    pub fn doppler_cube(&self, frames: &[DifferentialChannel]) -> Result<DopplerCube> {
        doppler_transform(frames, self.radio.packet_period, self.config.doppler.taper)
    }

    /// Detection for one window of consecutive differential channels.
    /// Positions are filled in where the geometry admits a solution.
    pub fn detect_window(
        &self,
        frames: &[DifferentialChannel],
        reference_power: f64,
        timestamp: f64,
    ) -> Result<(f64, Vec<Detection>)> {
        let cube = self.doppler_cube(frames)?;
        let cells = aoa_power_search(
            &cube,
            &self.grid,
            &self.radio,
            self.config.doppler.zero_doppler_guard,
        )?;
        let threshold = self.config.detect.threshold(&cells, reference_power);
        let peaks = local_peaks(&cells, cube.num_delay_bins(), cube.num_doppler_bins());
        let regions = partition_peaks(&peaks, &self.config.detect, cube.num_delay_bins())?;
        let mut detections = select_candidates(&regions, &self.config.detect, threshold, timestamp);
        for d in &mut detections {
            let meas = measurement_from_detection(d, &self.grid, &self.radio, self.config.preprocess.ifft_size);
            match solve_bistatic(&meas, self.config.geometry.tx_position, DEFAULT_EPSILON) {
                Ok(p) => d.position = Some(p),
                Err(e) => log::debug!("dropping detection at delay bin {}: {e}", d.delay_bin),
            }
        }
        Ok((threshold, detections))
    }

    /// Runs every complete window of the capture through detection and the
    /// tracker.
    pub fn process_capture(&mut self, packets: &[PacketMatrix]) -> Result<Vec<WindowReport>> {
        let windows = self.window_count(packets.len());
        if windows == 0 {
            return Err(Error::WindowIncomplete(format!(
                "{} packets cannot fill a window of {} after the reference",
                packets.len(),
                self.config.doppler.window
            )));
        }
        let frames = self.differentials(packets)?;
        let reference_power = self.reference_power(&packets[0]);
        let (t, hop) = (self.config.doppler.window, self.config.doppler.hop());

        let detected = (0..windows)
            .into_par_iter()
            .map(|w| {
                let slice = &frames[w * hop..w * hop + t];
                let first = slice[0].packet_index;
                let last = slice[t - 1].packet_index;
                let timestamp = 0.5 * (first + last) as f64 * self.radio.packet_period;
                self.detect_window(slice, reference_power, timestamp)
                    .map(|(threshold, detections)| (w, first, timestamp, threshold, detections))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut reports = Vec::with_capacity(windows);
        for (index, first_packet, timestamp, threshold, detections) in detected {
            let updates = self.tracker.step(&detections, timestamp)?;
            reports.push(WindowReport {
                index,
                timestamp,
                first_packet,
                threshold,
                detections,
                updates,
            });
        }
        Ok(reports)
    }
}

/// Flattens window reports into track records, in time order.
pub fn track_records(reports: &[WindowReport]) -> Vec<TrackRecord> {
    reports
        .iter()
        .flat_map(|r| r.updates.iter().map(TrackRecord::from))
        .collect()
}
