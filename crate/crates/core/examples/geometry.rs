// Forward and inverse bistatic geometry: a target position becomes a
// sum-range plus arrival direction, and the solver recovers the position.

use bistatic_isac::localize::{solve_bistatic, Measurement, DEFAULT_EPSILON};
use bistatic_isac::scene::{bistatic_range, spherical_from_cartesian};
use bistatic_isac::Position3;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tx = Position3::new(-80.0, 60.0, 0.0);
    let targets = [
        Position3::new(60.0, -25.0, 0.0),
        Position3::new(45.0, 20.0, 0.0),
        Position3::new(65.0, 5.0, 30.0),
    ];
    println!("transmitter at {tx:?}, baseline {:.2} m", tx.norm());
    for p in targets {
        let dir = spherical_from_cartesian(p)?;
        let meas = Measurement {
            sum_range: bistatic_range(p, tx),
            polar: dir.polar,
            azimuth: dir.azimuth,
        };
        let solved = solve_bistatic(&meas, tx, DEFAULT_EPSILON)?;
        println!(
            "target {p:?}: sum-range {:.3} m, azimuth {:.2} deg, polar {:.2} deg -> error {:.2e} m",
            meas.sum_range,
            meas.azimuth.to_degrees(),
            meas.polar.to_degrees(),
            solved.distance(&p)
        );
        assert!(solved.distance(&p) < 1e-6);
    }

    // A sum-range shorter than the baseline has no solution.
    let short = Measurement {
        sum_range: 0.5 * tx.norm(),
        polar: std::f64::consts::FRAC_PI_2,
        azimuth: 0.0,
    };
    match solve_bistatic(&short, tx, DEFAULT_EPSILON) {
        Ok(p) => return Err(format!("unexpected solution {p:?}").into()),
        Err(e) => println!("sum-range {:.1} m rejected: {e}", short.sum_range),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
