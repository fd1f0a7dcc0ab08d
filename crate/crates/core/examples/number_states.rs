//! Number-state probes: the M estimator for unbalanced pairs and M^2 for twin states.

use nlgyro::analytic::{number_state_model, twin_m2_delta2phi};
use nlgyro::channel::ChannelParams;
use nlgyro::estimators::{error_propagation_delta_phi, m2_error_propagation, EstimatorConfig};
use nlgyro::probes::{build_probe, ProbeSpec};

fn main() -> nlgyro::Result<()> {
    let cfg = EstimatorConfig::default();
    let (phi, phi0) = (0.01, 0.3);
    for (n1, n2) in [(1, 0), (3, 1), (6, 0), (5, 3)] {
        let probe = build_probe(&ProbeSpec::NumberPair { n1, n2 }, 1e-12)?;
        let d = error_propagation_delta_phi(&probe, &ChannelParams::new(phi, phi0), &cfg)?.delta2phi;
        let model = number_state_model(n1, n2, phi, phi0)?;
        println!("|{n1},{n2}>  d2phi_M={d:.6e} model={:.6e} F_Q={}", model.delta2phi_m.unwrap_or(f64::NAN), model.qfi);
    }
    for k in [2usize, 4, 8, 16] {
        let n = 2.0 * k as f64;
        let phi = 1e-3 / n;
        let probe = build_probe(&ProbeSpec::NumberPair { n1: k, n2: k }, 1e-12)?;
        let d = m2_error_propagation(&probe, &ChannelParams::new(phi, 0.0), &cfg)?.delta2phi;
        let exact = twin_m2_delta2phi(k, phi, 0.0)?;
        println!("|{k},{k}>  2N^4 d2phi_M2 = {:.5} (closed form {:.5})", 2.0 * n.powi(4) * d, 2.0 * n.powi(4) * exact);
    }
    Ok(())
}
