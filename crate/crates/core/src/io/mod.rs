//! File formats: binary captures, TOML configuration, JSON-lines tracks
//! and CSV ground truth.

pub mod capture;
pub mod config;
pub mod records;

pub use capture::{read_capture, write_capture, CaptureFile, CaptureHeader};
pub use config::{load_sense_config, load_simulation_config, SimulationConfig};
pub use records::{
    load_track_records, load_truth_csv, save_track_records, save_truth_csv, TrackRecord,
};
