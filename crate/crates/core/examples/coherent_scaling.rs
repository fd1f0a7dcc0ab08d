//! Error-propagation resolution of a coherent probe approaching 1/(4 N^3).

use std::f64::consts::FRAC_PI_2;

use nlgyro::analytic::coherent_exact_delta2phi;
use nlgyro::channel::ChannelParams;
use nlgyro::estimators::{error_propagation_delta_phi, EstimatorConfig};
use nlgyro::probes::{build_probe, ProbeSpec};

fn main() -> nlgyro::Result<()> {
    let cfg = EstimatorConfig::default();
    println!("{:>6} {:>14} {:>14} {:>10}", "N", "numeric", "exact", "4N^3 d2phi");
    for n in [4.0f64, 8.0, 16.0, 32.0, 64.0] {
        let phi = 1e-3 / n;
        let probe = build_probe(&ProbeSpec::coherent(n.sqrt(), 0.0), 1e-12)?;
        let d = error_propagation_delta_phi(&probe, &ChannelParams::new(phi, -FRAC_PI_2), &cfg)?.delta2phi;
        let exact = coherent_exact_delta2phi(n / 2.0, n / 2.0, phi, -FRAC_PI_2)?;
        println!("{n:>6} {d:>14.6e} {exact:>14.6e} {:>10.4}", 4.0 * n.powi(3) * d);
    }
    Ok(())
}
