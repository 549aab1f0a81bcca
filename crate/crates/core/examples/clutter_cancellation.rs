// Static multipath with random timing and phase offsets on every packet.
// Aligning each packet to the reference and subtracting removes it.

use bistatic_isac::preprocess::{PreprocConfig, Preprocessor};
use bistatic_isac::scene::{ClutterPath, SPEED_OF_LIGHT};
use bistatic_isac::sim::synthesize_capture;
use bistatic_isac::{Position3, RadioConfig, Scene};

fn energy<'a>(values: impl Iterator<Item = &'a num_complex::Complex64>) -> f64 {
    values.map(|z| z.norm_sqr()).sum()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let radio = RadioConfig::desk_scale();
    let tx = Position3::new(-80.0, 60.0, 0.0);
    let mut scene = Scene::new(tx);
    for (range, amplitude, az, el) in [(tx.norm(), 4.0, 143.13f64, 0.0f64), (112.0, 1.0, 20.0, 5.0), (138.0, 0.6, 50.0, -10.0)] {
        scene.clutter_paths.push(ClutterPath {
            delay: range / SPEED_OF_LIGHT,
            amplitude,
            azimuth: az.to_radians(),
            elevation: el.to_radians(),
        });
    }
    let scene = scene.with_sync_offsets(true);
    let capture = synthesize_capture(&scene, &radio, 65, 3)?;

    let pre = Preprocessor::new(capture.packets[0].clone(), PreprocConfig::default())?;
    let (mut raw, mut drift, mut residual) = (0.0, 0.0, 0.0);
    for p in &capture.packets[1..] {
        raw += energy(p.samples.iter());
        // Subtracting without alignment leaves the offsets in place.
        drift += energy((&p.samples - &capture.packets[0].samples).iter());
        residual += energy(pre.differential_spectrum(p)?.iter());
    }
    let db = |x: f64| 10.0 * (x / raw).log10();
    println!("packet energy             {:>8.1} dB", 0.0);
    println!("plain subtraction         {:>8.1} dB", db(drift));
    println!("aligned subtraction       {:>8.1} dB", db(residual));
    assert!(db(residual) < -60.0);

    let a = pre.align(&capture.packets[1])?;
    println!("packet 1 delay slope {:.4} rad/subcarrier, phase {:.3} rad", a.slope[0], a.initial_phase[0]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
