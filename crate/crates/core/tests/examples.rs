//! Runs every example as a test.

mod geometry {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/geometry.rs"));
}

#[test]
fn geometry_runs() {
    geometry::run_example().expect("geometry example should run");
}

mod capture_files {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/capture_files.rs"));
}

#[test]
fn capture_files_runs() {
    capture_files::run_example().expect("capture_files example should run");
}

mod clutter_cancellation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/clutter_cancellation.rs"));
}

#[test]
fn clutter_cancellation_runs() {
    clutter_cancellation::run_example().expect("clutter_cancellation example should run");
}

mod angle_search {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/angle_search.rs"));
}

#[test]
fn angle_search_runs() {
    angle_search::run_example().expect("angle_search example should run");
}

mod delay_doppler_map {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/delay_doppler_map.rs"));
}

#[test]
fn delay_doppler_map_runs() {
    delay_doppler_map::run_example().expect("delay_doppler_map example should run");
}

mod single_target_tracking {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/single_target_tracking.rs"));
}

#[test]
fn single_target_tracking_runs() {
    single_target_tracking::run_example().expect("single_target_tracking example should run");
}

mod multi_target_tracking {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/multi_target_tracking.rs"));
}

#[test]
fn multi_target_tracking_runs() {
    multi_target_tracking::run_example().expect("multi_target_tracking example should run");
}

mod evaluate_errors {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/evaluate_errors.rs"));
}

#[test]
fn evaluate_errors_runs() {
    evaluate_errors::run_example().expect("evaluate_errors example should run");
}
