//! How much of the photon budget to put in squeezed vacuum.

use nlgyro::analytic::squeezed_simple_optimum;
use nlgyro::sweep::{optimize_split, OptimizeOptions, SplitObjective};

fn main() -> nlgyro::Result<()> {
    let opts = OptimizeOptions::default();
    for n in [8.0f64, 16.0] {
        let q = optimize_split(n, SplitObjective::QfiExact, &opts)?;
        println!("N={n:<4} QFI-optimal f = {:.4}, F_Q/N^4 = {:.3}", q.fraction, q.value / n.powi(4));
    }
    let n = 64.0;
    let simple = optimize_split(
        n,
        SplitObjective::SimpleM,
        &OptimizeOptions {
            grid: 20,
            f_min: 0.005,
            f_max: 0.2,
            ..opts
        },
    )?;
    let model = squeezed_simple_optimum(n);
    println!(
        "N={n}: M-estimator optimum N2 = {:.3}, model optimum = {:.3}",
        simple.fraction * n,
        model.n2
    );
    Ok(())
}
