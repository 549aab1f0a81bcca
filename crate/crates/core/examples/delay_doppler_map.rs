// One processing window of a moving target: differential channels, the
// delay-Doppler cube, and the angle search on its strongest cell.

use std::path::Path;

use bistatic_isac::aoa::aoa_power_search;
use bistatic_isac::io::config::load_simulation_config;
use bistatic_isac::scene::bistatic_range;
use bistatic_isac::sim::synthesize_capture;
use bistatic_isac::{SenseConfig, Sensor};

const SCENE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/desk_scene.toml");

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = load_simulation_config(Path::new(SCENE))?;
    // Keep the car only.
    let car = cfg.scene.targets[1].clone();
    cfg.scene.targets = vec![car];
    let scene = cfg.resolved_scene();
    let radio = cfg.radio.clone();

    let sensor = Sensor::new(radio.clone(), SenseConfig::desk_scale(scene.tx_position))?;
    let window = sensor.config().doppler.window;
    let capture = synthesize_capture(&scene, &radio, window + 1, 21)?;
    let frames = sensor.differentials(&capture.packets)?;
    let cube = sensor.doppler_cube(&frames)?;
    println!(
        "cube: {} delay bins x {} antennas x {} Doppler bins, {:.3} m and {:.3} Hz per bin",
        cube.num_delay_bins(),
        cube.num_antennas(),
        cube.num_doppler_bins(),
        radio.range_bin(sensor.config().preprocess.ifft_size),
        cube.bin_spacing()
    );

    let cells = aoa_power_search(&cube, sensor.grid(), &radio, sensor.config().doppler.zero_doppler_guard)?;
    let best = cells
        .iter()
        .max_by(|a, b| a.power.total_cmp(&b.power))
        .ok_or("no cells searched")?;
    let angles = sensor.grid().angles(best.aoa_id);

    let target = &scene.targets[0];
    let t_mid = 0.5 * (1 + window) as f64 * radio.packet_period;
    let p = target.position_at(t_mid);
    let dt = 1e-3;
    let rate = (bistatic_range(target.position_at(t_mid + dt), scene.tx_position)
        - bistatic_range(target.position_at(t_mid - dt), scene.tx_position))
        / (2.0 * dt);
    println!(
        "strongest cell: delay bin {} ({:.1} m), {:+.2} Hz, azimuth {:.1} deg, elevation {:.1} deg",
        best.delay_bin,
        best.delay_bin as f64 * radio.range_bin(sensor.config().preprocess.ifft_size),
        cube.doppler_hz(best.doppler_bin),
        angles.azimuth.to_degrees(),
        angles.elevation.to_degrees()
    );
    println!(
        "truth: sum-range {:.1} m, Doppler {:+.2} Hz",
        bistatic_range(p, scene.tx_position),
        -rate / radio.wavelength()
    );

    let dir = tempfile::tempdir()?;
    let csv = dir.path().join("power_map.csv");
    cube.write_power_map_csv(std::fs::File::create(&csv)?)?;
    println!("power map written to {} ({} lines)", csv.display(), std::fs::read_to_string(&csv)?.lines().count());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
