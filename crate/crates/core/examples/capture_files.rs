// Synthesizes a short capture, writes it in the binary capture format
// together with its ground truth, and reads both back.

use bistatic_isac::io::capture::{read_capture, write_capture, CaptureHeader};
use bistatic_isac::io::records::{load_truth_csv, save_truth_csv};
use bistatic_isac::scene::{ClutterPath, TargetSpec, SPEED_OF_LIGHT};
use bistatic_isac::sim::synthesize_capture;
use bistatic_isac::{Position3, RadioConfig, Scene};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let radio = RadioConfig::desk_scale();
    let tx = Position3::new(-80.0, 60.0, 0.0);
    let mut scene = Scene::new(tx);
    scene.clutter_paths.push(ClutterPath {
        delay: tx.norm() / SPEED_OF_LIGHT,
        amplitude: 4.0,
        azimuth: 143.13f64.to_radians(),
        elevation: 0.0,
    });
    scene.targets.push(TargetSpec {
        initial_position: Position3::new(60.0, -25.0, 0.0),
        velocity: Position3::new(0.0, 3.0, 0.0),
        reflectivity: 0.1,
    });
    let scene = scene.with_snr_db(20.0).with_sync_offsets(true);

    let packets = 33;
    let capture = synthesize_capture(&scene, &radio, packets, 11)?;

    let dir = tempfile::tempdir()?;
    let capture_path = dir.path().join("capture.bin");
    let truth_path = dir.path().join("truth.csv");
    write_capture(&capture_path, &CaptureHeader::for_radio(&radio, packets), &capture.packets)?;
    save_truth_csv(&truth_path, &capture.truth)?;

    let file = read_capture(&capture_path)?;
    let truth = load_truth_csv(&truth_path)?;
    let h = &file.header;
    println!(
        "{} bytes: {} packets of {} subcarriers x {} antennas, {} Hz spacing, {} s period",
        std::fs::metadata(&capture_path)?.len(),
        h.num_packets,
        h.num_subcarriers,
        h.num_antennas,
        h.subcarrier_spacing,
        h.packet_period
    );
    println!("{} truth rows, last at t = {:.3} s", truth.len(), truth.last().map_or(0.0, |r| r.time));

    // Samples are stored as f32 pairs, so the round trip loses precision.
    let worst = capture
        .packets
        .iter()
        .zip(&file.packets)
        .flat_map(|(a, b)| a.samples.iter().zip(b.samples.iter()).map(|(x, y)| (x - y).norm() / x.norm().max(1e-30)))
        .fold(0.0, f64::max);
    println!("largest relative sample change after the round trip: {worst:.1e}");
    assert!(worst < 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
