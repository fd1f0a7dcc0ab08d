//! Classical Fisher information of photon counting equals the QFI for real probes.

use nlgyro::channel::ChannelParams;
use nlgyro::estimators::{fisher_information, EstimatorConfig};
use nlgyro::probes::{build_probe, ProbeSpec, SqueezeAxis};

fn main() -> nlgyro::Result<()> {
    let cfg = EstimatorConfig::default();
    let specs = [
        ProbeSpec::coherent(2.0, 0.0),
        ProbeSpec::CoherentSqueezed {
            alpha: 2.0,
            r: 0.8,
            axis: SqueezeAxis::ReduceX,
        },
        ProbeSpec::NumberPair { n1: 3, n2: 3 },
    ];
    for spec in specs {
        let probe = build_probe(&spec, 1e-12)?;
        for phi in [0.0, 0.01, 0.1] {
            let r = fisher_information(&probe, &ChannelParams::new(phi, 0.4), &cfg)?;
            println!("{spec:<40} phi={phi:<5} F={:<14.6} F_Q={:<14.6} CRB={:.3e}", r.fisher, r.qfi, 1.0 / r.fisher);
        }
    }
    Ok(())
}
