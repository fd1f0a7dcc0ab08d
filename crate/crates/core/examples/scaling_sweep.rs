//! Sweep N for a coherent probe and fit the resolution exponent.

use nlgyro::sweep::{fit_scaling, run_sweep, RowField, SweepConfig};

const CONFIG: &str = include_str!("../configs/coherent_scaling.toml");

fn main() -> nlgyro::Result<()> {
    let cfg = SweepConfig::from_toml_str(CONFIG)?;
    let rows = run_sweep(&cfg)?;
    for r in &rows {
        println!("N={:<4} d2phi_M={:.4e} F_Q={:.4e}", r.n_bar, r.d2phi_m.unwrap_or(f64::NAN), r.qfi.unwrap_or(f64::NAN));
    }
    let fit = fit_scaling(&rows, RowField::NBar, RowField::D2PhiM)?;
    println!("d2phi_M ~ N^{:.3} over {} points", fit.slope, fit.points);
    Ok(())
}
