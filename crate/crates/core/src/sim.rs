//! Multipath OFDM channel synthesis for a [`Scene`].
//!
//! Each path contributes `a * exp(-j2pi (f_c + f_m) tau) * s(n)` to sample
//! `(m, n)`, where `tau` is the bistatic delay and `s` the array response.
//! Receiver noise is added next, and the per-packet timing offset
//! `exp(-j2pi f_m dt)` and phase offset `exp(j phi)` are applied last, so
//! they rotate noise along with the signal.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::aoa::steering_for;
use crate::error::{Error, Result};
use crate::scene::{bistatic_range, ArrivalAngles, Position3, RadioConfig, Scene, SPEED_OF_LIGHT};

/// One frequency-domain snapshot, `M x N`, subcarrier-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketMatrix {
    pub index: usize,
    pub samples: Array2<Complex64>,
}

impl PacketMatrix {
    pub fn dim(&self) -> (usize, usize) {
        self.samples.dim()
    }
}

/// Timing (seconds) and phase (radians) offset of a packet relative to
/// packet 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SyncOffsets {
    pub timing: f64,
    pub phase: f64,
}

impl SyncOffsets {
    pub const ZERO: SyncOffsets = SyncOffsets {
        timing: 0.0,
        phase: 0.0,
    };

    /// Offsets drawn for packet `t`. Packet 0 and disabled models give zero.
    pub fn draw(scene: &Scene, cfg: &RadioConfig, t: usize, seed: u64) -> Self {
        if t == 0 || !scene.sync.enabled {
            return Self::ZERO;
        }
        let mut rng = packet_rng(seed, t, Stream::Offsets);
        let timing_bound = scene.sync.timing_spread / cfg.bandwidth;
        let timing = if timing_bound > 0.0 {
            rng.random_range(-timing_bound..=timing_bound)
        } else {
            0.0
        };
        let phase = if scene.sync.phase_spread > 0.0 {
            // (-spread, spread]
            scene.sync.phase_spread - rng.random_range(0.0..2.0 * scene.sync.phase_spread)
        } else {
            0.0
        };
        Self { timing, phase }
    }
}

enum Stream {
    Noise = 0,
    Offsets = 1,
}

fn packet_rng(seed: u64, t: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * t as u64 + stream as u64);
    rng
}

struct Path {
    delay: f64,
    amplitude: f64,
    angles: ArrivalAngles,
}

fn paths_at(scene: &Scene, time: f64) -> Result<Vec<Path>> {
    let mut paths = Vec::with_capacity(scene.clutter_paths.len() + scene.targets.len());
    for c in &scene.clutter_paths {
        paths.push(Path {
            delay: c.delay,
            amplitude: c.amplitude,
            angles: c.angles(),
        });
    }
    for t in &scene.targets {
        let p = t.position_at(time);
        paths.push(Path {
            delay: bistatic_range(p, scene.tx_position) / SPEED_OF_LIGHT,
            amplitude: t.reflectivity,
            angles: ArrivalAngles::towards(p)?,
        });
    }
    Ok(paths)
}

/// Received snapshot for packet `t` (at time `t * packet_period`).
pub fn synthesize_packet(
    scene: &Scene,
    cfg: &RadioConfig,
    t: usize,
    offsets: SyncOffsets,
    seed: u64,
) -> Result<PacketMatrix> {
    let (m_len, n_len) = (cfg.num_subcarriers, cfg.num_antennas());
    let time = t as f64 * cfg.packet_period;
    let limit = cfg.unambiguous_delay();
    let paths = paths_at(scene, time)?;
    if let Some(p) = paths.iter().find(|p| p.delay >= limit) {
        return Err(Error::DelayAliased {
            delay_s: p.delay,
            limit_s: limit,
        });
    }

    let mut samples = Array2::<Complex64>::zeros((m_len, n_len));
    let mut spectrum = vec![Complex64::new(0.0, 0.0); m_len];
    for path in &paths {
        for (m, z) in spectrum.iter_mut().enumerate() {
            // Reduce to cycles before scaling: f_c * tau is thousands of turns.
            let cycles = (cfg.carrier_frequency + cfg.subcarrier_offset(m)) * path.delay;
            *z = path.amplitude * Complex64::cis(-2.0 * std::f64::consts::PI * cycles.fract());
        }
        let steering = steering_for(cfg, path.angles);
        for ((m, n), y) in samples.indexed_iter_mut() {
            *y += spectrum[m] * steering[n];
        }
    }

    if scene.noise_power > 0.0 {
        let sigma = (scene.noise_power / 2.0).sqrt();
        let mut rng = packet_rng(seed, t, Stream::Noise);
        for y in samples.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *y += Complex64::new(re * sigma, im * sigma);
        }
    }

    if offsets != SyncOffsets::ZERO {
        let rotation = Complex64::cis(offsets.phase);
        for (m, mut row) in samples.outer_iter_mut().enumerate() {
            let w = rotation
                * Complex64::cis(-2.0 * std::f64::consts::PI * cfg.subcarrier_offset(m) * offsets.timing);
            row.mapv_inplace(|y| y * w);
        }
    }

    Ok(PacketMatrix { index: t, samples })
}

/// True state of one target at one packet time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthRecord {
    /// Packet time, seconds.
    pub time: f64,
    pub target_id: usize,
    pub position: Position3,
    /// Bistatic sum-range, meters.
    pub range: f64,
}

/// A simulated recording with its ground truth.
#[derive(Debug, Clone)]
pub struct Capture {
    pub radio: RadioConfig,
    pub packets: Vec<PacketMatrix>,
    pub offsets: Vec<SyncOffsets>,
    pub truth: Vec<TruthRecord>,
}

/// `count` consecutive packets starting at packet 0.
pub fn synthesize_capture(
    scene: &Scene,
    cfg: &RadioConfig,
    count: usize,
    seed: u64,
) -> Result<Capture> {
    if count < 2 {
        return Err(Error::config(format!("capture needs at least 2 packets, got {count}")));
    }
    cfg.validate()?;
    scene.validate()?;
    let offsets: Vec<SyncOffsets> = (0..count)
        .map(|t| SyncOffsets::draw(scene, cfg, t, seed))
        .collect();
    let packets = (0..count)
        .into_par_iter()
        .map(|t| synthesize_packet(scene, cfg, t, offsets[t], seed))
        .collect::<Result<Vec<_>>>()?;

    let mut truth = Vec::with_capacity(count * scene.targets.len());
    for t in 0..count {
        let time = t as f64 * cfg.packet_period;
        for (target_id, spec) in scene.targets.iter().enumerate() {
            let position = spec.position_at(time);
            truth.push(TruthRecord {
                time,
                target_id,
                position,
                range: bistatic_range(position, scene.tx_position),
            });
        }
    }
    Ok(Capture {
        radio: cfg.clone(),
        packets,
        offsets,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{ClutterPath, TargetSpec};
    use approx::assert_relative_eq;

    fn radio() -> RadioConfig {
        RadioConfig::desk_scale()
    }

    fn single_clutter(delay: f64) -> Scene {
        let mut scene = Scene::new(Position3::new(100.0, 0.0, 0.0)).with_sync_offsets(false);
        scene.clutter_paths.push(ClutterPath {
            delay,
            amplitude: 2.0,
            azimuth: 0.3,
            elevation: -0.1,
        });
        scene
    }

    fn walker() -> TargetSpec {
        TargetSpec {
            initial_position: Position3::new(40.0, 10.0, 0.0),
            velocity: Position3::new(0.0, 3.0, 0.0),
            reflectivity: 1.0,
        }
    }

    #[test]
    fn single_path_has_constant_modulus() {
        let p = synthesize_packet(&single_clutter(4e-7), &radio(), 0, SyncOffsets::ZERO, 1).unwrap();
        for y in p.samples.iter() {
            assert_relative_eq!(y.norm(), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn adjacent_subcarrier_phase_step_matches_delay() {
        let tau = 7.3e-7;
        let cfg = radio();
        let p = synthesize_packet(&single_clutter(tau), &cfg, 0, SyncOffsets::ZERO, 1).unwrap();
        let expected = Complex64::cis(-2.0 * std::f64::consts::PI * cfg.subcarrier_spacing * tau);
        for n in 0..cfg.num_antennas() {
            for m in 0..cfg.num_subcarriers - 1 {
                let ratio = p.samples[[m + 1, n]] / p.samples[[m, n]];
                assert!((ratio - expected).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn static_scene_does_not_change() {
        let scene = single_clutter(1e-6);
        let a = synthesize_packet(&scene, &radio(), 0, SyncOffsets::ZERO, 9).unwrap();
        let b = synthesize_packet(&scene, &radio(), 5, SyncOffsets::ZERO, 9).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn aliased_delay_is_rejected() {
        let cfg = radio();
        let scene = single_clutter(cfg.unambiguous_delay());
        assert!(matches!(
            synthesize_packet(&scene, &cfg, 0, SyncOffsets::ZERO, 0),
            Err(Error::DelayAliased { .. })
        ));
        let mut scene = Scene::new(Position3::new(100.0, 0.0, 0.0));
        scene.targets.push(TargetSpec {
            initial_position: Position3::new(6000.0, 0.0, 0.0),
            ..walker()
        });
        assert!(matches!(
            synthesize_capture(&scene, &cfg, 2, 0),
            Err(Error::DelayAliased { .. })
        ));
    }

    #[test]
    fn empty_scene_packets_differ_only_by_noise() {
        let mut scene = Scene::new(Position3::new(50.0, 0.0, 0.0));
        scene.noise_power = 1e-2;
        let cap = synthesize_capture(&scene, &radio(), 2, 4).unwrap();
        assert_eq!(cap.packets.len(), 2);
        assert!(cap.truth.is_empty());
        let mean_power = |p: &PacketMatrix| {
            p.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / p.samples.len() as f64
        };
        for p in &cap.packets {
            assert_relative_eq!(mean_power(p), 1e-2, max_relative = 0.1);
        }
        assert_ne!(cap.packets[0].samples, cap.packets[1].samples);
    }

    #[test]
    fn truth_follows_kinematics() {
        let mut scene = Scene::new(Position3::new(100.0, 0.0, 0.0));
        scene.targets.push(walker());
        let cap = synthesize_capture(&scene, &radio(), 201, 0).unwrap();
        let first = cap.truth.first().unwrap();
        let last = cap.truth.last().unwrap();
        assert_relative_eq!(last.time, 1.0, epsilon = 1e-12);
        assert_relative_eq!(first.position.distance(&last.position), 3.0, epsilon = 1e-12);
        assert_relative_eq!(
            last.range,
            bistatic_range(last.position, scene.tx_position),
            epsilon = 1e-12
        );
    }

    #[test]
    fn captures_are_deterministic() {
        let mut scene = single_clutter(5e-7).with_snr_db(20.0).with_sync_offsets(true);
        scene.targets.push(walker());
        let a = synthesize_capture(&scene, &radio(), 4, 77).unwrap();
        let b = synthesize_capture(&scene, &radio(), 4, 77).unwrap();
        assert_eq!(a.packets, b.packets);
        assert_eq!(a.offsets, b.offsets);
        let c = synthesize_capture(&scene, &radio(), 4, 78).unwrap();
        assert_ne!(a.packets[1], c.packets[1]);
    }

    #[test]
    fn offsets_follow_sync_model() {
        let cfg = radio();
        let scene = single_clutter(1e-7).with_sync_offsets(true);
        assert_eq!(SyncOffsets::draw(&scene, &cfg, 0, 5), SyncOffsets::ZERO);
        for t in 1..200 {
            let o = SyncOffsets::draw(&scene, &cfg, t, 5);
            assert!(o.timing.abs() <= 0.1 / cfg.bandwidth);
            assert!(o.phase > -std::f64::consts::PI && o.phase <= std::f64::consts::PI);
        }
        let off = single_clutter(1e-7);
        assert_eq!(SyncOffsets::draw(&off, &cfg, 3, 5), SyncOffsets::ZERO);
    }

    #[test]
    fn offsets_rotate_without_changing_noise_draw() {
        let cfg = radio();
        let scene = single_clutter(3e-7).with_snr_db(10.0);
        let o = SyncOffsets {
            timing: 2e-9,
            phase: 0.7,
        };
        let clean = synthesize_packet(&scene, &cfg, 3, SyncOffsets::ZERO, 21).unwrap();
        let shifted = synthesize_packet(&scene, &cfg, 3, o, 21).unwrap();
        for ((m, n), y) in shifted.samples.indexed_iter() {
            let w = Complex64::cis(o.phase)
                * Complex64::cis(-2.0 * std::f64::consts::PI * cfg.subcarrier_offset(m) * o.timing);
            assert!((y - clean.samples[[m, n]] * w).norm() < 1e-12);
        }
    }
}
