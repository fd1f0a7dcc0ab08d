//! Build each probe family at a fixed photon budget and show its truncation.

use nlgyro::fock::g_moments;
use nlgyro::probes::{build_probe_with_plan, plan_cutoffs, ProbeSpec, SqueezeAxis};

fn main() -> nlgyro::Result<()> {
    let n_bar = 16.0;
    let tail_tol = 1e-10;
    let specs = [
        ProbeSpec::coherent_split(n_bar, 0.0),
        ProbeSpec::squeezed_split(n_bar, 0.7, SqueezeAxis::ReduceX),
        ProbeSpec::number_split(16, 0.5),
    ];
    println!("{:<48} {:>5} {:>5} {:>10} {:>12}", "probe", "c1", "c2", "tail", "F_Q/N^4");
    for spec in specs {
        let plan = plan_cutoffs(&spec, tail_tol);
        let state = build_probe_with_plan(&spec, &plan, tail_tol)?;
        let fq = g_moments(&state)?.qfi();
        println!(
            "{:<48} {:>5} {:>5} {:>10.2e} {:>12.4}",
            spec.to_string(),
            plan.cutoff1,
            plan.cutoff2,
            state.truncation_loss(),
            fq / n_bar.powi(4)
        );
    }
    Ok(())
}
