//! Loss, thermal photons and phase noise eat into the squeezing advantage.

use nlgyro::noise::{mc_noise_oracle, noisy_delta2phi, noisy_m_variance, squeezing_advantage_lost, NoiseParams, NoisyProbe};

fn main() -> nlgyro::Result<()> {
    let n = 256.0;
    for eta in [1.0, 0.99, 0.9, 0.5] {
        let noise = NoiseParams::new(eta, 0.01, 1e-4)?;
        let coh = noisy_delta2phi(n, NoisyProbe::Coherent, &noise)?;
        let sq = noisy_delta2phi(n, NoisyProbe::SqueezedOptimum, &noise)?;
        println!(
            "eta={eta:<5} coherent={coh:.4e} squeezed={sq:.4e} advantage lost: {}",
            squeezing_advantage_lost(n, &noise)
        );
    }
    let noise = NoiseParams::new(0.9, 0.1, 0.01)?;
    let alpha = 8f64.sqrt();
    let mc = mc_noise_oracle(alpha, 1.0, &noise, 200_000, 7)?;
    println!(
        "Var M: exact {:.6}, Monte Carlo {:.6} +- {:.1e}",
        noisy_m_variance(alpha, 1.0, &noise)?,
        mc.var_m,
        mc.std_error
    );
    Ok(())
}
