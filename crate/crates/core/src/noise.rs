//! Detection noise: finite efficiency, thermal background and a random relative phase.
//!
//! Noise enters through the substitution
//! `a1^dag a2 -> e^{i varphi} (sqrt(eta) a1^dag + sqrt(1-eta) b1^dag)(sqrt(eta) a2 + sqrt(1-eta) b2)`
//! in `M = a1^dag a2 + a2^dag a1`, with thermal `b1, b2` such that
//! `(1 - eta) <b^dag b> = N_t / 2` and `varphi ~ Normal(0, sigma^2)`.

use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GyroError, Result};
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Detector quantum efficiency.
    pub eta: f64,
    /// Thermal photons `N_t` summed over both detection modes.
    pub thermal_photons: f64,
    /// Variance `sigma^2` of the random relative phase.
    pub phase_var: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            eta: 1.0,
            thermal_photons: 0.0,
            phase_var: 0.0,
        }
    }
}

impl NoiseParams {
    pub fn new(eta: f64, thermal_photons: f64, phase_var: f64) -> Result<Self> {
        let p = NoiseParams {
            eta,
            thermal_photons,
            phase_var,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(GyroError::InvalidParameter(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        if !(self.thermal_photons >= 0.0 && self.thermal_photons.is_finite()) {
            return Err(GyroError::InvalidParameter("thermal photons must be >= 0".into()));
        }
        if !(self.phase_var >= 0.0 && self.phase_var.is_finite()) {
            return Err(GyroError::InvalidParameter("phase variance must be >= 0".into()));
        }
        Ok(())
    }

    /// `1 - exp(-2 sigma^2)`
    pub fn epsilon(&self) -> f64 {
        -(-2.0 * self.phase_var).exp_m1()
    }

    /// The thermal background is small compared with the probe (`N_t < 0.1 N`).
    pub fn weak_thermal(&self, n_bar: f64) -> bool {
        self.thermal_photons < 0.1 * n_bar
    }
}

/// Exact `Var M` at zero signal for coherent `alpha` (x) reduce-X squeezed vacuum `r`.
///
/// With `T = N_t/2` and `N2 = sinh^2 r`:
/// `eta^2 alpha^2 e^{-2 sigma^2} (<a2^2> + <a2^dag^2>) + 2 eta^2 alpha^2 N2
///  + eta (alpha^2 + N2)(2T + 1) + 2 T (T + 1)`.
pub fn noisy_m_variance(alpha: f64, r: f64, noise: &NoiseParams) -> Result<f64> {
    noise.validate()?;
    let a2 = alpha * alpha;
    let n2 = r.sinh().powi(2);
    let pair = -r.cosh() * r.sinh();
    let eta = noise.eta;
    let t = 0.5 * noise.thermal_photons;
    let coherence = (-2.0 * noise.phase_var).exp();
    Ok(eta * eta * a2 * coherence * 2.0 * pair
        + 2.0 * eta * eta * a2 * n2
        + eta * (a2 + n2) * (2.0 * t + 1.0)
        + 2.0 * t * (t + 1.0))
}

/// The published appendix expression, kept for comparison. It does not reduce to
/// `alpha^2 e^{-2r} + sinh^2 r` in the noiseless limit.
pub fn noisy_m_variance_printed(alpha: f64, r: f64, noise: &NoiseParams) -> Result<f64> {
    noise.validate()?;
    let a2 = alpha * alpha;
    let n2 = r.sinh().powi(2);
    let pair = -r.cosh() * r.sinh();
    let eta = noise.eta;
    let coherence = (-2.0 * noise.phase_var).exp();
    Ok(eta * eta * (2.0 * a2 * pair * coherence + a2 * n2 + n2)
        + eta * (a2 + n2) * (noise.thermal_photons + 1.0 - eta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisyProbe {
    Coherent,
    /// Coherent plus squeezed vacuum at `N2 = sqrt(N)/2`.
    SqueezedOptimum,
}

impl FromStr for NoisyProbe {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" => Ok(NoisyProbe::Coherent),
            "squeezed" | "squeezed-optimum" => Ok(NoisyProbe::SqueezedOptimum),
            other => Err(GyroError::InvalidParameter(format!("unknown noisy probe kind '{other}'"))),
        }
    }
}

/// Large-`N` degraded resolution.
///
/// Squeezed: `1/(4 eta^2 N^3.5) + (N_t + 1 - eta)/(4 eta^3 N^3) + eps/(4 eta^2 N^2.5)`.
/// Coherent: `(N_t + 1)/(4 eta^3 N^3)`.
pub fn noisy_delta2phi(n_bar: f64, kind: NoisyProbe, noise: &NoiseParams) -> Result<f64> {
    if noise.eta == 0.0 {
        return Err(GyroError::InvalidParameter("eta = 0 registers no photons".into()));
    }
    noise.validate()?;
    if !(n_bar > 0.0) {
        return Err(GyroError::InvalidParameter(format!("N_bar must be > 0, got {n_bar}")));
    }
    let eta = noise.eta;
    let nt = noise.thermal_photons;
    Ok(match kind {
        NoisyProbe::Coherent => (nt + 1.0) / (4.0 * eta.powi(3) * n_bar.powi(3)),
        NoisyProbe::SqueezedOptimum => {
            0.25 / (eta * eta * n_bar.powf(3.5))
                + (nt + 1.0 - eta) / (4.0 * eta.powi(3) * n_bar.powi(3))
                + noise.epsilon() / (4.0 * eta * eta * n_bar.powf(2.5))
        }
    })
}

/// Whether phase noise has erased the squeezing gain: `eps > 1/N`.
pub fn squeezing_advantage_lost(n_bar: f64, noise: &NoiseParams) -> bool {
    noise.epsilon() > 1.0 / n_bar
}

/// Single-mode Gaussian moments `<a>`, `<a^2>`, `<a^dag a>`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ModeMoments {
    mean: Complex64,
    pair: Complex64,
    number: f64,
}

impl ModeMoments {
    fn coherent(alpha: f64) -> Self {
        let a = Complex64::new(alpha, 0.0);
        ModeMoments {
            mean: a,
            pair: a * a,
            number: alpha * alpha,
        }
    }

    fn squeezed_vacuum(r: f64) -> Self {
        ModeMoments {
            mean: Complex64::new(0.0, 0.0),
            pair: Complex64::new(-r.cosh() * r.sinh(), 0.0),
            number: r.sinh().powi(2),
        }
    }

    fn thermal(n: f64) -> Self {
        ModeMoments {
            mean: Complex64::new(0.0, 0.0),
            pair: Complex64::new(0.0, 0.0),
            number: n,
        }
    }

    /// Moments of `sqrt(t) a + sqrt(1-t) b` for independent `a`, `b`.
    fn mix(a: &Self, b: &Self, t: f64) -> Self {
        let (ta, tb) = (t.sqrt(), (1.0 - t).sqrt());
        ModeMoments {
            mean: a.mean * ta + b.mean * tb,
            pair: a.pair * t + b.pair * (1.0 - t) + 2.0 * ta * tb * a.mean * b.mean,
            number: t * a.number + (1.0 - t) * b.number + 2.0 * ta * tb * (a.mean.conj() * b.mean).re,
        }
    }
}

/// `(<M>, <M^2>)` for `M = e^{i varphi} A^dag B + h.c.` with independent `A`, `B`.
fn conditional_moments(a: &ModeMoments, b: &ModeMoments, varphi: f64) -> (f64, f64) {
    let rot = Complex64::from_polar(1.0, varphi);
    let mean = 2.0 * (rot * a.mean.conj() * b.mean).re;
    let pairs = 2.0 * (rot * rot * a.pair.conj() * b.pair).re;
    let second = pairs + a.number * (b.number + 1.0) + (a.number + 1.0) * b.number;
    (mean, second)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub var_m: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Samples per independently seeded substream; fixed so the result does not depend on thread count.
const MC_BLOCK: usize = 4096;
pub const MC_MIN_SAMPLES: usize = 10_000;

/// Monte Carlo estimate of `Var M` averaging exact conditional moments over the random phase.
pub fn mc_noise_oracle(alpha: f64, r: f64, noise: &NoiseParams, n_samples: usize, seed: u64) -> Result<McEstimate> {
    noise.validate()?;
    if n_samples < MC_MIN_SAMPLES {
        return Err(GyroError::InvalidParameter(format!(
            "need at least {MC_MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    // the thermal bath only adds (1 - eta) <b^dag b> = N_t / 2 photons to each detected mode
    let background = ModeMoments::thermal(0.0);
    let detected = |m: ModeMoments| {
        let mut d = ModeMoments::mix(&m, &background, noise.eta);
        d.number += 0.5 * noise.thermal_photons;
        d
    };
    let a = detected(ModeMoments::coherent(alpha));
    let b = detected(ModeMoments::squeezed_vacuum(r));
    let sigma = noise.phase_var.sqrt();
    let normal = Normal::new(0.0, 1.0).map_err(|e| GyroError::InvalidParameter(e.to_string()))?;
    let blocks = n_samples.div_ceil(MC_BLOCK);
    let partial: Vec<[NeumaierSum; 3]> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(blk as u64);
            let count = MC_BLOCK.min(n_samples - blk * MC_BLOCK);
            let mut acc = [NeumaierSum::new(); 3];
            for _ in 0..count {
                let z: f64 = normal.sample(&mut rng);
                let (m1, m2) = conditional_moments(&a, &b, sigma * z);
                acc[0] += m1;
                acc[1] += m2;
                acc[2] += m2 * m2;
            }
            acc
        })
        .collect();
    let mut tot = [NeumaierSum::new(); 3];
    for blk in &partial {
        for k in 0..3 {
            tot[k] = tot[k] + blk[k];
        }
    }
    let n = n_samples as f64;
    let mean_m = tot[0].value() / n;
    let mean_m2 = tot[1].value() / n;
    let spread = (tot[2].value() / n - mean_m2 * mean_m2).max(0.0);
    Ok(McEstimate {
        var_m: mean_m2 - mean_m * mean_m,
        std_error: (spread / (n - 1.0)).sqrt(),
        n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn noiseless_reductions() {
        let clean = NoiseParams::default();
        assert!(rel(noisy_m_variance(3.0, 0.0, &clean).unwrap(), 9.0) < 1e-15);
        for &r in &[0.3f64, 1.0, 2.0] {
            let a = 2.5;
            let expect = a * a * (-2.0 * r).exp() + r.sinh().powi(2);
            assert!(rel(noisy_m_variance(a, r, &clean).unwrap(), expect) < 1e-12);
        }
        let n: f64 = 64.0;
        assert!(rel(noisy_delta2phi(n, NoisyProbe::SqueezedOptimum, &clean).unwrap(), 0.25 / n.powf(3.5)) < 1e-15);
        assert!(rel(noisy_delta2phi(n, NoisyProbe::Coherent, &clean).unwrap(), 0.25 / n.powi(3)) < 1e-15);
    }

    #[test]
    fn printed_form_misses_the_squeezing() {
        let clean = NoiseParams::default();
        let (a, r) = (2.5f64, 1.0f64);
        let expect = a * a * (-2.0 * r).exp() + r.sinh().powi(2);
        assert!(rel(noisy_m_variance_printed(a, r, &clean).unwrap(), expect) > 0.1);
    }

    #[test]
    fn regression_value() {
        let noise = NoiseParams::new(0.9, 0.1, 0.01).unwrap();
        let v = noisy_m_variance(8f64.sqrt(), 1.0, &noise).unwrap();
        assert!(rel(v, 4.2546313802462423) < 1e-13, "{v}");
    }

    #[test]
    fn eta_zero_rejected() {
        let noise = NoiseParams {
            eta: 0.0,
            ..Default::default()
        };
        assert!(noisy_delta2phi(16.0, NoisyProbe::Coherent, &noise).is_err());
    }

    #[test]
    fn main_text_form_matches_at_small_sigma() {
        let n: f64 = 100.0;
        let s2 = 1e-6;
        let noise = NoiseParams::new(0.8, 0.0, s2).unwrap();
        let third = noise.epsilon() / (4.0 * 0.64 * n.powf(2.5));
        let main_text = s2 / (2.0 * 0.64 * n.powf(2.5));
        assert!(rel(third, main_text) < 1e-5);
    }

    #[test]
    fn mc_without_phase_noise_is_exact() {
        let noise = NoiseParams::new(0.7, 0.3, 0.0).unwrap();
        let mc = mc_noise_oracle(2.0, 0.8, &noise, 10_000, 1).unwrap();
        let exact = noisy_m_variance(2.0, 0.8, &noise).unwrap();
        assert!(rel(mc.var_m, exact) < 1e-12);
        assert!(mc.std_error < 1e-12 * exact);
    }

    #[test]
    fn mc_is_deterministic() {
        let noise = NoiseParams::new(0.9, 0.1, 0.05).unwrap();
        let a = mc_noise_oracle(2.0, 1.0, &noise, 20_000, 7).unwrap();
        let b = mc_noise_oracle(2.0, 1.0, &noise, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let c = mc_noise_oracle(2.0, 1.0, &noise, 20_000, 8).unwrap();
        assert_ne!(a.var_m, c.var_m);
        assert!(mc_noise_oracle(2.0, 1.0, &noise, 100, 7).is_err());
    }
}
