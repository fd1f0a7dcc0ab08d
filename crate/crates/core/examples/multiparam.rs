//! Joint estimation of the linear and Kerr phases from one probe.

use nlgyro::estimators::multiparam_fisher;
use nlgyro::probes::{build_probe, ProbeSpec};

fn main() -> nlgyro::Result<()> {
    for n in [4.0f64, 16.0, 64.0] {
        let probe = build_probe(&ProbeSpec::coherent(n.sqrt(), 0.0), 1e-12)?;
        let r = multiparam_fisher(&probe)?;
        println!(
            "N={n:<3} joint: L {:.4} NL {:.4e} | single: L {:.4e} NL {:.4e}",
            r.bound_linear, r.bound_nonlinear, r.single_bound_linear, r.single_bound_nonlinear
        );
    }
    Ok(())
}
