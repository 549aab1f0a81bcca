// A pedestrian, a car and a drone tracked together. Prints every
// confirmed track's position beside the nearest true target.

use std::path::Path;

use bistatic_isac::io::config::load_simulation_config;
use bistatic_isac::sim::synthesize_capture;
use bistatic_isac::track::TrackState;
use bistatic_isac::{SenseConfig, Sensor};

const SCENE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/desk_scene.toml");
const NAMES: [&str; 3] = ["pedestrian", "car", "drone"];

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = load_simulation_config(Path::new(SCENE))?;
    let scene = cfg.resolved_scene();
    let mut sensor = Sensor::new(cfg.radio.clone(), SenseConfig::desk_scale(scene.tx_position))?;
    let packets = 1 + 6 * sensor.config().doppler.window;
    let capture = synthesize_capture(&scene, &cfg.radio, packets, 5)?;
    let reports = sensor.process_capture(&capture.packets)?;

    for r in &reports {
        let confirmed: Vec<_> = r.updates.iter().filter(|u| u.state == TrackState::Confirmed).collect();
        println!(
            "window {}: {} detections, {} live tracks, {} confirmed",
            r.index,
            r.detections.len(),
            r.updates.iter().filter(|u| u.state != TrackState::Terminated).count(),
            confirmed.len()
        );
        for u in confirmed {
            let (name, err) = scene
                .targets
                .iter()
                .zip(NAMES)
                .map(|(t, name)| (name, t.position_at(r.timestamp).distance(&u.position)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or("scene has no targets")?;
            println!("  track {} -> {name}, {err:.2} m off", u.track_id);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
