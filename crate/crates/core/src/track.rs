//! Frame-to-frame association and track confirmation.
//!
//! A detection that is not claimed by an existing track opens a tentative
//! track. A tentative track becomes confirmed once it has been hit in `p`
//! consecutive windows and its mean speed over the last `p - 1` steps
//! reaches `v_min`. Any track missed `q` windows in a row is terminated.

use serde::{Deserialize, Serialize};

use crate::detect::Detection;
use crate::error::{Error, Result};
use crate::scene::Position3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    /// Association gate, meters.
    pub gate: f64,
    /// Consecutive hits needed for confirmation (`p`).
    pub confirm_count: usize,
    /// Minimum mean speed for confirmation, m/s.
    pub min_velocity: f64,
    /// Consecutive misses before termination (`q`).
    pub miss_limit: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            gate: 5.0,
            confirm_count: 4,
            min_velocity: 0.5,
            miss_limit: 3,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gate > 0.0) {
            return Err(Error::config("gate must be positive"));
        }
        if self.confirm_count < 2 {
            return Err(Error::config("confirm_count must be at least 2"));
        }
        if !(self.min_velocity >= 0.0) {
            return Err(Error::config("min_velocity must be non-negative"));
        }
        if self.miss_limit == 0 {
            return Err(Error::config("miss_limit must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackState {
    Tentative,
    Confirmed,
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub timestamp: f64,
    pub position: Position3,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub state: TrackState,
    /// Length of the current run of consecutive hits.
    pub occurrences: usize,
    pub misses: usize,
    pub history: Vec<TrackPoint>,
    /// Mean speed over the most recent steps of the current run, m/s.
    pub speed: f64,
}

impl Track {
    fn open(id: u64, point: TrackPoint) -> Self {
        Self {
            id,
            state: TrackState::Tentative,
            occurrences: 1,
            misses: 0,
            history: vec![point],
            speed: 0.0,
        }
    }

    pub fn last(&self) -> &TrackPoint {
        self.history.last().expect("tracks are never empty")
    }

    pub fn is_live(&self) -> bool {
        self.state != TrackState::Terminated
    }

    /// Mean of `|dp| / dt` over the last `steps` steps.
    fn mean_speed(&self, steps: usize) -> f64 {
        let n = self.history.len();
        if steps == 0 || n < steps + 1 {
            return 0.0;
        }
        let window = &self.history[n - steps - 1..];
        window
            .windows(2)
            .map(|w| w[1].position.distance(&w[0].position) / (w[1].timestamp - w[0].timestamp))
            .sum::<f64>()
            / steps as f64
    }
}

/// Result of matching detections to tracks, by index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Association {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

/// Greedy nearest-neighbour matching: candidate pairs within `gate` are
/// taken in ascending distance, each track and detection at most once.
/// Terminated tracks and detections without a position never match.
pub fn associate(tracks: &[Track], detections: &[Detection], gate: f64) -> Association {
    let mut candidates = Vec::new();
    for (ti, track) in tracks.iter().enumerate().filter(|(_, t)| t.is_live()) {
        for (di, det) in detections.iter().enumerate() {
            if let Some(p) = det.position {
                let dist = track.last().position.distance(&p);
                if dist <= gate {
                    candidates.push((dist, ti, di));
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut track_used = vec![false; tracks.len()];
    let mut det_used = vec![false; detections.len()];
    let mut pairs = Vec::new();
    for (_, ti, di) in candidates {
        if !track_used[ti] && !det_used[di] {
            track_used[ti] = true;
            det_used[di] = true;
            pairs.push((ti, di));
        }
    }
    Association {
        pairs,
        unmatched_tracks: (0..tracks.len())
            .filter(|&i| !track_used[i] && tracks[i].is_live())
            .collect(),
        unmatched_detections: (0..detections.len()).filter(|&i| !det_used[i]).collect(),
    }
}

/// What happened to one track in one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackUpdate {
    pub timestamp: f64,
    pub track_id: u64,
    pub state: TrackState,
    pub position: Position3,
    pub power: f64,
}

/// Stateful tracker; feed it one window of detections at a time.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    tracks: Vec<Track>,
    finished: Vec<Track>,
    next_id: u64,
    last_timestamp: Option<f64>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            tracks: Vec::new(),
            finished: Vec::new(),
            next_id: 1,
            last_timestamp: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Tracks that are still tentative or confirmed.
    pub fn live_tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn terminated_tracks(&self) -> &[Track] {
        &self.finished
    }

    /// Associates and updates. Detections must carry positions; ones that
    /// do not are ignored. Returns an update for every track that was hit,
    /// opened or terminated.
    pub fn step(&mut self, detections: &[Detection], timestamp: f64) -> Result<Vec<TrackUpdate>> {
        if let Some(previous) = self.last_timestamp {
            if !(timestamp > previous) {
                return Err(Error::OutOfOrder {
                    timestamp,
                    previous,
                });
            }
        }
        self.last_timestamp = Some(timestamp);
        let assoc = associate(&self.tracks, detections, self.config.gate);
        let updates = self.update(detections, &assoc, timestamp);
        let (live, done): (Vec<_>, Vec<_>) = std::mem::take(&mut self.tracks)
            .into_iter()
            .partition(Track::is_live);
        self.tracks = live;
        self.finished.extend(done);
        Ok(updates)
    }

    fn update(&mut self, detections: &[Detection], assoc: &Association, timestamp: f64) -> Vec<TrackUpdate> {
        let p = self.config.confirm_count;
        let mut updates = Vec::new();
        let mut touched: Vec<Position3> = Vec::new();

        for &(ti, di) in &assoc.pairs {
            let det = &detections[di];
            let position = det.position.expect("matched detections have positions");
            let track = &mut self.tracks[ti];
            track.history.push(TrackPoint {
                timestamp,
                position,
                power: det.power,
            });
            track.occurrences += 1;
            track.misses = 0;
            track.speed = track.mean_speed((track.occurrences - 1).min(p - 1));
            if track.state == TrackState::Tentative
                && track.occurrences >= p
                && track.mean_speed(p - 1) >= self.config.min_velocity
            {
                track.state = TrackState::Confirmed;
            }
            touched.push(position);
            updates.push(TrackUpdate {
                timestamp,
                track_id: track.id,
                state: track.state,
                position,
                power: det.power,
            });
        }

        for &ti in &assoc.unmatched_tracks {
            let track = &mut self.tracks[ti];
            track.misses += 1;
            track.occurrences = 0;
            if track.misses >= self.config.miss_limit {
                track.state = TrackState::Terminated;
                let last = *track.last();
                updates.push(TrackUpdate {
                    timestamp,
                    track_id: track.id,
                    state: TrackState::Terminated,
                    position: last.position,
                    power: last.power,
                });
            }
        }

        // A leftover detection inside the gate of a track hit in this window
        // is a second response from the same object, not a new one.
        for &di in &assoc.unmatched_detections {
            let det = &detections[di];
            let Some(position) = det.position else {
                continue;
            };
            if touched
                .iter()
                .any(|q| q.distance(&position) <= self.config.gate)
            {
                continue;
            }
            let id = self.next_id;
            self.next_id += 1;
            self.tracks.push(Track::open(
                id,
                TrackPoint {
                    timestamp,
                    position,
                    power: det.power,
                },
            ));
            touched.push(position);
            updates.push(TrackUpdate {
                timestamp,
                track_id: id,
                state: TrackState::Tentative,
                position,
                power: det.power,
            });
        }
        updates
    }
}
