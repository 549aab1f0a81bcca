// End-to-end sensing of a single car: detections per window, the track
// life cycle, and the position error once the track is confirmed.

use std::path::Path;

use bistatic_isac::io::config::load_simulation_config;
use bistatic_isac::sim::synthesize_capture;
use bistatic_isac::{SenseConfig, Sensor};

const SCENE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/desk_scene.toml");

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = load_simulation_config(Path::new(SCENE))?;
    let car = cfg.scene.targets[1].clone();
    cfg.scene.targets = vec![car];
    let scene = cfg.resolved_scene();

    let mut sensor = Sensor::new(cfg.radio.clone(), SenseConfig::desk_scale(scene.tx_position))?;
    let packets = 1 + 6 * sensor.config().doppler.window;
    let capture = synthesize_capture(&scene, &cfg.radio, packets, 4)?;
    let reports = sensor.process_capture(&capture.packets)?;

    for r in &reports {
        let truth = scene.targets[0].position_at(r.timestamp);
        print!("window {} at {:.3} s: {} detections", r.index, r.timestamp, r.detections.len());
        for u in &r.updates {
            print!(
                ", track {} {:?} at ({:.1}, {:.1}, {:.1}) error {:.2} m",
                u.track_id,
                u.state,
                u.position.x,
                u.position.y,
                u.position.z,
                u.position.distance(&truth)
            );
        }
        println!();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
