//! Photon-number distribution after one pass, against the closed-form coherent moments.

use std::f64::consts::FRAC_PI_2;

use nlgyro::analytic::coherent_moments;
use nlgyro::channel::{gyro_pass, m_statistics, ChannelParams};
use nlgyro::probes::{build_probe, ProbeSpec};

fn main() -> nlgyro::Result<()> {
    let n_bar: f64 = 8.0;
    let probe = build_probe(&ProbeSpec::coherent(n_bar.sqrt(), 0.0), 1e-12)?;
    for phi in [0.0, 0.01, 0.05] {
        let params = ChannelParams::new(phi, -FRAC_PI_2);
        let stats = gyro_pass(&probe, &params)?;
        let m = m_statistics(&stats);
        let exact = coherent_moments(n_bar / 2.0, n_bar / 2.0, phi, -FRAC_PI_2);
        println!(
            "phi={phi:<5} <M>={:+.10} (exact {:+.10})  <M^2>={:.10} (exact {:.10})",
            m.mean, exact.mean, m.mean_sq, exact.mean_sq
        );
    }
    Ok(())
}
