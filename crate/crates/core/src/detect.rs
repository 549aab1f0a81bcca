//! Target selection in the delay-Doppler map: local peaks, split into
//! delay regions, best `k` per region, then the best `U` overall above a
//! threshold.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::aoa::CellPeak;
use crate::error::{Error, Result};
use crate::scene::Position3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    /// Delay bins per region (`m`).
    pub region_length: usize,
    /// Number of regions (`Nc`); `m * Nc` must not exceed the delay bins kept.
    pub region_count: usize,
    /// Peaks kept per region (`k`).
    pub per_region_top: usize,
    /// Peaks kept overall (`U`).
    pub global_top: usize,
    /// Threshold above the median cell power, dB.
    pub threshold_db: f64,
    /// Peaks further than this below the strongest candidate are dropped.
    pub peak_margin_db: Option<f64>,
    /// Absolute floor relative to a full-strength reference path, dB.
    pub floor_db: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            region_length: 16,
            region_count: 32,
            per_region_top: 2,
            global_top: 8,
            threshold_db: 12.0,
            peak_margin_db: Some(25.0),
            floor_db: -120.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self, delay_bins: usize) -> Result<()> {
        if self.region_length == 0 || self.region_count == 0 {
            return Err(Error::config("region_length and region_count must be positive"));
        }
        if self.region_length * self.region_count > delay_bins {
            return Err(Error::config(format!(
                "{} regions of {} bins exceed the {delay_bins} delay bins",
                self.region_count, self.region_length
            )));
        }
        if self.per_region_top == 0 {
            return Err(Error::config("per_region_top must be at least 1"));
        }
        if self.global_top > self.per_region_top * self.region_count {
            return Err(Error::config(format!(
                "global_top {} exceeds per_region_top * region_count = {}",
                self.global_top,
                self.per_region_top * self.region_count
            )));
        }
        Ok(())
    }

    /// Effective linear threshold for one map: the largest of the
    /// median-relative threshold, the absolute floor, and the margin below
    /// the strongest cell. `reference_power` is the power a single
    /// unit-coherence path carrying the reference packet's energy would
    /// produce.
    pub fn threshold(&self, cells: &[CellPeak], reference_power: f64) -> f64 {
        if cells.is_empty() {
            return f64::INFINITY;
        }
        let mut powers: Vec<f64> = cells.iter().map(|c| c.power).collect();
        powers.sort_by(f64::total_cmp);
        let mid = powers.len() / 2;
        let median = if powers.len().is_multiple_of(2) {
            0.5 * (powers[mid - 1] + powers[mid])
        } else {
            powers[mid]
        };
        let mut threshold = median * db_to_linear(self.threshold_db);
        threshold = threshold.max(reference_power * db_to_linear(self.floor_db));
        if let Some(margin) = self.peak_margin_db {
            let strongest = *powers.last().unwrap();
            threshold = threshold.max(strongest * db_to_linear(-margin));
        }
        threshold
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A selected peak, optionally with the localizer's position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Window time, seconds.
    pub timestamp: f64,
    pub delay_bin: usize,
    pub doppler_bin: usize,
    pub aoa_id: usize,
    pub power: f64,
    pub position: Option<Position3>,
}

/// Descending power, then ascending delay, Doppler and angle index.
pub fn strength_order(a: &CellPeak, b: &CellPeak) -> Ordering {
    b.power
        .total_cmp(&a.power)
        .then(a.delay_bin.cmp(&b.delay_bin))
        .then(a.doppler_bin.cmp(&b.doppler_bin))
        .then(a.aoa_id.cmp(&b.aoa_id))
}

/// Cells strictly above every 8-neighbour in the delay x Doppler map.
/// Delay does not wrap; Doppler does. Among equal neighbours only the
/// lowest `(delay, doppler)` cell survives. Missing cells count as zero.
pub fn local_peaks(cells: &[CellPeak], delay_bins: usize, doppler_bins: usize) -> Vec<CellPeak> {
    let mut map = vec![0.0f64; delay_bins * doppler_bins];
    for c in cells {
        map[c.delay_bin * doppler_bins + c.doppler_bin] = c.power;
    }
    let at = |t: usize, d: usize| map[t * doppler_bins + d];
    let mut out = Vec::new();
    for c in cells {
        let here = (c.delay_bin, c.doppler_bin);
        let mut peak = true;
        let mut exceeds_any = false;
        'scan: for dt in -1isize..=1 {
            let t = c.delay_bin as isize + dt;
            if t < 0 || t >= delay_bins as isize {
                continue;
            }
            for dd in -1isize..=1 {
                if dt == 0 && dd == 0 {
                    continue;
                }
                let d = (c.doppler_bin as isize + dd).rem_euclid(doppler_bins as isize) as usize;
                let there = (t as usize, d);
                if there == here {
                    continue;
                }
                let other = at(there.0, there.1);
                let beaten = if there < here {
                    other >= c.power
                } else {
                    other > c.power
                };
                if beaten {
                    peak = false;
                    break 'scan;
                }
                exceeds_any |= other < c.power;
            }
        }
        if peak && exceeds_any {
            out.push(*c);
        }
    }
    out
}

/// Buckets peaks into `region_count` runs of `region_length` delay bins.
/// Peaks beyond the last region are dropped.
pub fn partition_peaks(
    peaks: &[CellPeak],
    cfg: &DetectorConfig,
    delay_bins: usize,
) -> Result<Vec<Vec<CellPeak>>> {
    cfg.validate(delay_bins)?;
    let mut regions = vec![Vec::new(); cfg.region_count];
    for p in peaks {
        let r = p.delay_bin / cfg.region_length;
        if r < cfg.region_count {
            regions[r].push(*p);
        }
    }
    Ok(regions)
}

/// Best `k` per region, then the best `U` of those whose power exceeds
/// `threshold`, strongest first.
pub fn select_candidates(
    regions: &[Vec<CellPeak>],
    cfg: &DetectorConfig,
    threshold: f64,
    timestamp: f64,
) -> Vec<Detection> {
    let mut pool: Vec<CellPeak> = Vec::with_capacity(regions.len() * cfg.per_region_top);
    for region in regions {
        let mut sorted = region.clone();
        sorted.sort_by(strength_order);
        pool.extend(sorted.into_iter().take(cfg.per_region_top));
    }
    pool.sort_by(strength_order);
    pool.into_iter()
        .filter(|p| p.power > threshold)
        .take(cfg.global_top)
        .map(|p| Detection {
            timestamp,
            delay_bin: p.delay_bin,
            doppler_bin: p.doppler_bin,
            aoa_id: p.aoa_id,
            power: p.power,
            position: None,
        })
        .collect()
}
