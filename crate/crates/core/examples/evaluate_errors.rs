// Scores tracks against ground truth through the files the command line
// tool exchanges: per-target error summary and the error CDF.

use std::path::Path;

use bistatic_isac::eval::{count_identity_swaps, evaluate, write_cdf_csv, write_summary_csv, EvalConfig};
use bistatic_isac::io::config::load_simulation_config;
use bistatic_isac::io::records::{load_track_records, load_truth_csv, save_track_records, save_truth_csv};
use bistatic_isac::pipeline::track_records;
use bistatic_isac::sim::synthesize_capture;
use bistatic_isac::{SenseConfig, Sensor};

const SCENE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/desk_scene.toml");

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = load_simulation_config(Path::new(SCENE))?;
    cfg.scene.targets.truncate(2);
    let scene = cfg.resolved_scene();
    let mut sensor = Sensor::new(cfg.radio.clone(), SenseConfig::desk_scale(scene.tx_position))?;
    let packets = 1 + 8 * sensor.config().doppler.window;
    let capture = synthesize_capture(&scene, &cfg.radio, packets, 8)?;
    let reports = sensor.process_capture(&capture.packets)?;

    let dir = tempfile::tempdir()?;
    let (tracks_csv, truth_csv) = (dir.path().join("tracks.csv"), dir.path().join("truth.csv"));
    save_track_records(&tracks_csv, &track_records(&reports))?;
    save_truth_csv(&truth_csv, &capture.truth)?;

    let records = load_track_records(&tracks_csv)?;
    let truth = load_truth_csv(&truth_csv)?;
    let eval = EvalConfig::default();
    let report = evaluate(&records, &truth, &eval)?;

    let mut summary = Vec::new();
    write_summary_csv(&mut summary, &report)?;
    print!("{}", String::from_utf8(summary)?);
    let mut cdf = Vec::new();
    write_cdf_csv(&mut cdf, &report.cdf)?;
    println!("CDF has {} points", String::from_utf8(cdf)?.lines().count() - 1);
    println!(
        "identity swaps: {}, unassigned tracks: {:?}",
        count_identity_swaps(&records, &truth, eval.tolerance),
        report.unassigned_tracks
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
