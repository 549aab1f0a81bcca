// Steering vectors of the planar array and a matched-filter angle search
// over the default grid for a single plane wave.

use bistatic_isac::aoa::{steering_for, steering_vector, AoaGrid, AoaGridSpec};
use bistatic_isac::scene::ArrivalAngles;
use bistatic_isac::RadioConfig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let radio = RadioConfig::desk_scale();
    let grid = AoaGrid::from_spec(&AoaGridSpec::default())?;
    println!(
        "{} antennas, grid of {} azimuths x {} elevations",
        radio.num_antennas(),
        grid.azimuths().len(),
        grid.elevations().len()
    );

    for (az, el) in [(-40.0, 0.0), (12.0, 20.0), (55.0, -15.0)] {
        let wave = steering_for(&radio, ArrivalAngles::from_degrees(az, el));
        let (best, power) = (0..grid.len())
            .map(|id| {
                let a = steering_vector(&radio, &grid, id);
                let y: num_complex::Complex64 = a.iter().zip(&wave).map(|(a, w)| a.conj() * w).sum();
                (id, y.norm_sqr())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or("empty grid")?;
        let found = grid.angles(best);
        println!(
            "wave from ({az:+.0}, {el:+.0}) deg -> grid ({:+.1}, {:+.1}) deg, gain {:.1} of {}",
            found.azimuth.to_degrees(),
            found.elevation.to_degrees(),
            power,
            radio.num_antennas() * radio.num_antennas()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
