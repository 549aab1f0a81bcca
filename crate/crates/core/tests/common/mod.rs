//! Scenes shared by the integration tests.
#![allow(dead_code)]

use bistatic_isac::scene::{bistatic_range, ClutterPath, Position3, Scene, TargetSpec, SPEED_OF_LIGHT};

pub const TX: Position3 = Position3 {
    x: -80.0,
    y: 60.0,
    z: 0.0,
};

/// Line-of-sight path plus four weaker local scatterers, all static.
pub fn clutter_paths() -> Vec<ClutterPath> {
    let los = TX.norm();
    [
        (los, 4.0, 143.13, 0.0),
        (112.0, 1.0, 20.0, 5.0),
        (124.0, 0.8, -35.0, 0.0),
        (138.0, 0.6, 50.0, -10.0),
        (150.0, 0.5, -10.0, 15.0),
    ]
    .into_iter()
    .map(|(range, amplitude, az, el): (f64, f64, f64, f64)| ClutterPath {
        delay: range / SPEED_OF_LIGHT,
        amplitude,
        azimuth: az.to_radians(),
        elevation: el.to_radians(),
    })
    .collect()
}

pub fn static_scene() -> Scene {
    let mut scene = Scene::new(TX);
    scene.clutter_paths = clutter_paths();
    scene
}

/// Car-like mover, 3 m/s along +y, about 60 m in front of the array.
pub fn car() -> TargetSpec {
    TargetSpec {
        initial_position: Position3::new(60.0, -25.0, 0.0),
        velocity: Position3::new(0.0, 3.0, 0.0),
        reflectivity: 0.1,
    }
}

pub fn pedestrian() -> TargetSpec {
    TargetSpec {
        initial_position: Position3::new(45.0, 20.0, 0.0),
        velocity: Position3::new(1.5, 0.0, 0.0),
        reflectivity: 0.04,
    }
}

/// 3 m/s at 30 m altitude.
pub fn uav() -> TargetSpec {
    let s = 3.0 / 2f64.sqrt();
    TargetSpec {
        initial_position: Position3::new(65.0, 5.0, 30.0),
        velocity: Position3::new(s, -s, 0.0),
        reflectivity: 0.06,
    }
}

pub fn scene_with(targets: Vec<TargetSpec>, snr_db: f64) -> Scene {
    let mut scene = static_scene();
    scene.targets = targets;
    scene.with_snr_db(snr_db)
}

/// Rate of change of the bistatic sum-range, m/s.
pub fn bistatic_rate(target: &TargetSpec, tx: Position3, time: f64) -> f64 {
    let p = target.position_at(time);
    let to_tx = p - tx;
    target.velocity.dot(&p) / p.norm() + target.velocity.dot(&to_tx) / to_tx.norm()
}

pub fn sum_range(target: &TargetSpec, tx: Position3, time: f64) -> f64 {
    bistatic_range(target.position_at(time), tx)
}
