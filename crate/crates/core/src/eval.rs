//! Localization error statistics of confirmed tracks against ground truth.
//!
//! Each track record is paired with the truth sample nearest in time. A
//! truth target is scored against a single track for the whole run: pairs
//! are taken greedily in ascending mean error, each track and target used
//! once.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::records::TrackRecord;
use crate::sim::TruthRecord;
use crate::track::TrackState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Largest errors left out of `mean_excluding_outliers`.
    pub outliers_excluded: usize,
    /// Maximum record-to-truth time difference, seconds.
    pub tolerance: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            outliers_excluded: 2,
            tolerance: 0.16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotError {
    pub timestamp: f64,
    pub track_id: u64,
    pub target_id: usize,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub count: usize,
    pub mean: f64,
    pub mean_excluding_outliers: Option<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(errors: &[f64], outliers_excluded: usize) -> ErrorSummary {
    let count = errors.len();
    if count == 0 {
        return ErrorSummary {
            count,
            mean: f64::NAN,
            mean_excluding_outliers: None,
            min: f64::NAN,
            max: f64::NAN,
        };
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / count as f64;
    let kept = &sorted[..count.saturating_sub(outliers_excluded)];
    ErrorSummary {
        count,
        mean,
        mean_excluding_outliers: (!kept.is_empty())
            .then(|| kept.iter().sum::<f64>() / kept.len() as f64),
        min: sorted[0],
        max: sorted[count - 1],
    }
}

/// Empirical CDF point: fraction of errors `<= error`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub error: f64,
    pub fraction: f64,
}

pub fn error_cdf(errors: &[f64]) -> Vec<CdfPoint> {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<CdfPoint> = Vec::with_capacity(sorted.len());
    for (i, e) in sorted.into_iter().enumerate() {
        let fraction = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.error == e => last.fraction = fraction,
            _ => out.push(CdfPoint { error: e, fraction }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetMetrics {
    pub target_id: usize,
    pub track_id: u64,
    pub errors: Vec<SnapshotError>,
    pub summary: ErrorSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub targets: Vec<TargetMetrics>,
    pub overall: ErrorSummary,
    pub cdf: Vec<CdfPoint>,
    /// Confirmed tracks not assigned to any truth target.
    pub unassigned_tracks: Vec<u64>,
}

struct TruthIndex {
    by_target: BTreeMap<usize, Vec<TruthRecord>>,
}

impl TruthIndex {
    fn new(truth: &[TruthRecord]) -> Self {
        let mut by_target: BTreeMap<usize, Vec<TruthRecord>> = BTreeMap::new();
        for t in truth {
            by_target.entry(t.target_id).or_default().push(*t);
        }
        for v in by_target.values_mut() {
            v.sort_by(|a, b| a.time.total_cmp(&b.time));
        }
        Self { by_target }
    }

    fn nearest(&self, target: usize, time: f64, tolerance: f64) -> Option<&TruthRecord> {
        let samples = self.by_target.get(&target)?;
        let i = samples.partition_point(|s| s.time < time);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|k| samples.get(k))
            .filter(|s| (s.time - time).abs() <= tolerance)
            .min_by(|a, b| (a.time - time).abs().total_cmp(&(b.time - time).abs()))
    }
}

fn confirmed_by_track(records: &[TrackRecord]) -> BTreeMap<u64, Vec<&TrackRecord>> {
    let mut out: BTreeMap<u64, Vec<&TrackRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.state == TrackState::Confirmed) {
        out.entry(r.track_id).or_default().push(r);
    }
    out
}

pub fn evaluate(records: &[TrackRecord], truth: &[TruthRecord], cfg: &EvalConfig) -> Result<EvalReport> {
    let index = TruthIndex::new(truth);
    let tracks = confirmed_by_track(records);

    let mut candidates = Vec::new();
    for (&track_id, recs) in &tracks {
        for &target_id in index.by_target.keys() {
            let errors: Vec<SnapshotError> = recs
                .iter()
                .filter_map(|r| {
                    index
                        .nearest(target_id, r.timestamp, cfg.tolerance)
                        .map(|t| SnapshotError {
                            timestamp: r.timestamp,
                            track_id,
                            target_id,
                            error: r.position().distance(&t.position),
                        })
                })
                .collect();
            if !errors.is_empty() {
                let mean = errors.iter().map(|e| e.error).sum::<f64>() / errors.len() as f64;
                candidates.push((mean, target_id, track_id, errors));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::NoOverlap);
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut used_targets = BTreeSet::new();
    let mut used_tracks = BTreeSet::new();
    let mut targets = Vec::new();
    for (_, target_id, track_id, errors) in candidates {
        if used_targets.contains(&target_id) || used_tracks.contains(&track_id) {
            continue;
        }
        used_targets.insert(target_id);
        used_tracks.insert(track_id);
        let values: Vec<f64> = errors.iter().map(|e| e.error).collect();
        targets.push(TargetMetrics {
            target_id,
            track_id,
            summary: summarize(&values, cfg.outliers_excluded),
            errors,
        });
    }
    targets.sort_by_key(|t| t.target_id);

    let all: Vec<f64> = targets
        .iter()
        .flat_map(|t| t.errors.iter().map(|e| e.error))
        .collect();
    Ok(EvalReport {
        overall: summarize(&all, cfg.outliers_excluded),
        cdf: error_cdf(&all),
        unassigned_tracks: tracks
            .keys()
            .filter(|id| !used_tracks.contains(id))
            .copied()
            .collect(),
        targets,
    })
}

/// Number of times a confirmed track's nearest truth target changes
/// between consecutive records.
pub fn count_identity_swaps(records: &[TrackRecord], truth: &[TruthRecord], tolerance: f64) -> usize {
    let index = TruthIndex::new(truth);
    let mut swaps = 0;
    for recs in confirmed_by_track(records).values() {
        let mut previous = None;
        for r in recs {
            let nearest = index
                .by_target
                .keys()
                .filter_map(|&id| {
                    index
                        .nearest(id, r.timestamp, tolerance)
                        .map(|t| (r.position().distance(&t.position), id))
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, id)| id);
            if let (Some(prev), Some(now)) = (previous, nearest) {
                if prev != now {
                    swaps += 1;
                }
            }
            previous = nearest.or(previous);
        }
    }
    swaps
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse {
        path: "<metrics>".into(),
        message: e.to_string(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per assigned target plus an `all` row.
pub fn write_summary_csv<W: Write>(out: W, report: &EvalReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "target_id",
        "track_id",
        "snapshots",
        "mean_m",
        "mean_excluding_outliers_m",
        "min_m",
        "max_m",
    ])
    .map_err(csv_err)?;
    let row = |id: String, track: String, s: &ErrorSummary| {
        vec![
            id,
            track,
            s.count.to_string(),
            s.mean.to_string(),
            opt(s.mean_excluding_outliers),
            s.min.to_string(),
            s.max.to_string(),
        ]
    };
    for t in &report.targets {
        w.write_record(row(t.target_id.to_string(), t.track_id.to_string(), &t.summary))
            .map_err(csv_err)?;
    }
    w.write_record(row("all".into(), String::new(), &report.overall))
        .map_err(csv_err)?;
    w.flush().map_err(|e| Error::io("<metrics>", e))
}

/// Columns `error_m,cumulative_fraction`.
pub fn write_cdf_csv<W: Write>(out: W, cdf: &[CdfPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["error_m", "cumulative_fraction"]).map_err(csv_err)?;
    for p in cdf {
        w.write_record([p.error.to_string(), p.fraction.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<cdf>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Position3;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn truth_line(target_id: usize, start: Position3, vel: Position3, n: usize) -> Vec<TruthRecord> {
        (0..n)
            .map(|k| {
                let time = k as f64 * 0.005;
                TruthRecord {
                    time,
                    target_id,
                    position: start + vel * time,
                    range: 0.0,
                }
            })
            .collect()
    }

    fn record(track_id: u64, timestamp: f64, p: Position3) -> TrackRecord {
        TrackRecord {
            timestamp,
            track_id,
            state: TrackState::Confirmed,
            x: p.x,
            y: p.y,
            z: p.z,
            power_db: 0.0,
            error_m: None,
        }
    }

    #[test]
    fn perfect_tracks_have_zero_error() {
        let truth = truth_line(0, Position3::new(10.0, 0.0, 0.0), Position3::new(0.0, 3.0, 0.0), 200);
        let recs: Vec<_> = truth.iter().step_by(20).map(|t| record(7, t.time, t.position)).collect();
        let report = evaluate(&recs, &truth, &EvalConfig::default()).unwrap();
        assert_eq!(report.targets.len(), 1);
        assert_eq!(report.targets[0].track_id, 7);
        assert_eq!(report.overall.max, 0.0);
        assert_eq!(report.cdf, vec![CdfPoint { error: 0.0, fraction: 1.0 }]);
    }

    #[test]
    fn constant_offset_gives_flat_statistics() {
        let truth = truth_line(0, Position3::new(10.0, 0.0, 0.0), Position3::new(0.0, 3.0, 0.0), 200);
        let recs: Vec<_> = truth
            .iter()
            .step_by(16)
            .map(|t| record(1, t.time, t.position + Position3::new(0.0, 0.0, 1.0)))
            .collect();
        let s = evaluate(&recs, &truth, &EvalConfig::default()).unwrap().overall;
        assert_relative_eq!(s.mean, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.min, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.max, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn outliers_are_excluded_from_trimmed_mean() {
        let s = summarize(&[0.4, 0.5, 0.6, 2.19, 3.26], 2);
        assert_relative_eq!(s.mean, 6.95 / 5.0, epsilon = 1e-12);
        assert_relative_eq!(s.mean_excluding_outliers.unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!((s.min, s.max), (0.4, 3.26));
        assert_eq!(summarize(&[1.0], 2).mean_excluding_outliers, None);
    }

    #[test]
    fn tentative_records_and_disjoint_times_do_not_count() {
        let truth = truth_line(0, Position3::ORIGIN, Position3::ORIGIN, 10);
        let mut r = record(1, 0.01, Position3::ORIGIN);
        r.state = TrackState::Tentative;
        assert!(matches!(
            evaluate(&[r], &truth, &EvalConfig::default()),
            Err(Error::NoOverlap)
        ));
        let late = record(1, 50.0, Position3::ORIGIN);
        assert!(matches!(
            evaluate(&[late], &truth, &EvalConfig::default()),
            Err(Error::NoOverlap)
        ));
    }

    #[test]
    fn targets_get_their_nearest_track() {
        let a = truth_line(0, Position3::new(0.0, 0.0, 0.0), Position3::new(1.0, 0.0, 0.0), 100);
        let b = truth_line(1, Position3::new(50.0, 0.0, 0.0), Position3::new(-1.0, 0.0, 0.0), 100);
        let truth: Vec<_> = a.iter().chain(&b).copied().collect();
        let mut recs = Vec::new();
        for k in (0..100).step_by(10) {
            recs.push(record(5, b[k].time, b[k].position + Position3::new(0.5, 0.0, 0.0)));
            recs.push(record(9, a[k].time, a[k].position + Position3::new(0.0, 0.2, 0.0)));
            recs.push(record(11, a[k].time, Position3::new(200.0, 0.0, 0.0)));
        }
        let report = evaluate(&recs, &truth, &EvalConfig::default()).unwrap();
        let pairs: Vec<_> = report.targets.iter().map(|t| (t.target_id, t.track_id)).collect();
        assert_eq!(pairs, vec![(0, 9), (1, 5)]);
        assert_eq!(report.unassigned_tracks, vec![11]);
        assert_eq!(count_identity_swaps(&recs[..20], &truth, 0.01), 0);
    }

    #[test]
    fn swaps_are_counted() {
        let a = truth_line(0, Position3::new(0.0, 0.0, 0.0), Position3::ORIGIN, 100);
        let b = truth_line(1, Position3::new(50.0, 0.0, 0.0), Position3::ORIGIN, 100);
        let truth: Vec<_> = a.iter().chain(&b).copied().collect();
        let recs = vec![
            record(1, 0.0, Position3::new(1.0, 0.0, 0.0)),
            record(1, 0.1, Position3::new(49.0, 0.0, 0.0)),
            record(1, 0.2, Position3::new(49.0, 0.0, 0.0)),
        ];
        assert_eq!(count_identity_swaps(&recs, &truth, 0.01), 1);
    }

    #[test]
    fn csv_outputs() {
        let truth = truth_line(0, Position3::ORIGIN, Position3::ORIGIN, 10);
        let recs = vec![
            record(1, 0.0, Position3::new(1.0, 0.0, 0.0)),
            record(1, 0.02, Position3::new(3.0, 0.0, 0.0)),
        ];
        let report = evaluate(&recs, &truth, &EvalConfig::default()).unwrap();
        let mut out = Vec::new();
        write_summary_csv(&mut out, &report).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("0,1,2,2,"));
        let mut out = Vec::new();
        write_cdf_csv(&mut out, &report.cdf).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "error_m,cumulative_fraction\n1,0.5\n3,1\n"
        );
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_to_one(errors in proptest::collection::vec(0.0..10.0f64, 1..60)) {
            let cdf = error_cdf(&errors);
            prop_assert!((cdf.last().unwrap().fraction - 1.0).abs() < 1e-15);
            prop_assert!(cdf[0].fraction > 0.0);
            for w in cdf.windows(2) {
                prop_assert!(w[1].error > w[0].error);
                prop_assert!(w[1].fraction > w[0].fraction);
            }
            let s = summarize(&errors, 0);
            let mean = errors.iter().sum::<f64>() / errors.len() as f64;
            prop_assert!((s.mean - mean).abs() <= 1e-12 * mean.max(1.0));
        }
    }
}
