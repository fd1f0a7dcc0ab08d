//! Phase budget of a fiber coil on Earth: propagation, rotation and Kerr terms.

use nlgyro::analytic::{sagnac_phase, signal_from_rotation, PhysicalParams, SPEED_OF_LIGHT};

fn main() -> nlgyro::Result<()> {
    let radius = 0.1;
    let n_loops = 1000;
    let p = PhysicalParams {
        omega: 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / 1550e-9,
        length: 2.0 * std::f64::consts::PI * radius * n_loops as f64,
        radius,
        n_loops,
        chi: 2.5e-22,
        cross_section: 5e-11,
        pulse_duration: 1e-12,
        n0: 1.45,
        rotation_rate: 7.292115e-5,
    };
    println!("Kerr phase per photon: {:.4e} rad", signal_from_rotation(&p)?);
    for (plus, minus) in [(1e6, 4e5), (1e9, 1e9), (1e12, 0.0)] {
        let s = sagnac_phase(&p, plus, minus)?;
        println!(
            "N+={plus:.0e} N-={minus:.0e}: propagation {:.6} rotation {:.4e} nonlinear {:.4e}",
            s.propagation, s.rotation, s.nonlinear
        );
    }
    Ok(())
}
