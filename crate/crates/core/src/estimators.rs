//! Resolution estimates built on the gyro channel.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{inner_states, m_moments_inner, output_states, ChannelParams};
use crate::error::{GyroError, Result};
use crate::fock::{g_moments, Basis, TwoModeState};
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorConfig {
    /// Base finite-difference step in radians.
    pub fd_step: f64,
    /// Probabilities at or below this use the zero-crossing limit `|dc/dphi|^2`.
    pub prob_floor: f64,
    /// Relative disagreement between step `h` and `h/2` that flags a bad derivative.
    pub halving_tol: f64,
    /// Slopes below `flat_threshold * max(1, <N>)` count as no response.
    pub flat_threshold: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            fd_step: 1e-5,
            prob_floor: 1e-14,
            halving_tol: 1e-3,
            flat_threshold: 1e-8,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(GyroError::InvalidParameter(format!("fd_step must be > 0, got {}", self.fd_step)));
        }
        Ok(())
    }

    /// The phase response oscillates at ~`2N` per radian; shrink the step for bright probes.
    fn step_for(&self, n_scale: f64) -> f64 {
        self.fd_step * (50.0 / n_scale.max(1.0)).min(1.0)
    }
}

/// Stencil `phi - h, phi + h, phi - h/2, phi + h/2, phi`.
fn stencil(params: &ChannelParams, h: f64) -> [ChannelParams; 5] {
    let at = |d: f64| ChannelParams::new(params.phi + d, params.phi0);
    [at(-h), at(h), at(-0.5 * h), at(0.5 * h), at(0.0)]
}

/// Central differences at `h` and `h/2` plus their Richardson combination.
fn derivatives(values: &[f64; 5], h: f64) -> (f64, f64, f64) {
    let d1 = (values[1] - values[0]) / (2.0 * h);
    let d2 = (values[3] - values[2]) / h;
    (d1, d2, (4.0 * d2 - d1) / 3.0)
}

fn mean_photons(probe: &TwoModeState) -> f64 {
    probe.expectation_diagonal(|a, b| (a + b) as f64)
}

/// Simple-moment estimate `Var(O) / (d<O>/dphi)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationEstimate {
    pub delta2phi: f64,
    pub variance: f64,
    pub slope: f64,
}

fn propagate(
    probe: &TwoModeState,
    params: &ChannelParams,
    cfg: &EstimatorConfig,
    observable: &'static str,
    moment: impl Fn(&[f64; 4]) -> (f64, f64),
) -> Result<PropagationEstimate> {
    cfg.validate()?;
    let n_scale = mean_photons(probe);
    let h = cfg.step_for(n_scale);
    let states = inner_states(probe, &stencil(params, h))?;
    let mut means = [0.0; 5];
    let mut variance = 0.0;
    for (i, s) in states.iter().enumerate() {
        let mk = m_moments_inner(s)?;
        let (mean, var) = moment(&mk);
        means[i] = mean;
        if i == 4 {
            variance = var.max(0.0);
        }
    }
    let (_, _, slope) = derivatives(&means, h);
    if slope.abs() <= cfg.flat_threshold * n_scale.max(1.0) {
        return Err(GyroError::FlatResponse { observable, slope });
    }
    Ok(PropagationEstimate {
        delta2phi: variance / (slope * slope),
        variance,
        slope,
    })
}

/// Error propagation with the photon-number difference `M`.
pub fn error_propagation_delta_phi(
    probe: &TwoModeState,
    params: &ChannelParams,
    cfg: &EstimatorConfig,
) -> Result<PropagationEstimate> {
    propagate(probe, params, cfg, "M", |m| (m[0], m[1] - m[0] * m[0]))
}

/// Error propagation with `M^2` as the observable.
pub fn m2_error_propagation(
    probe: &TwoModeState,
    params: &ChannelParams,
    cfg: &EstimatorConfig,
) -> Result<PropagationEstimate> {
    propagate(probe, params, cfg, "M^2", |m| (m[1], m[3] - m[1] * m[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherReport {
    /// Classical Fisher information of `p(n1, n2 | phi)`.
    pub fisher: f64,
    /// `4 Var(G)`.
    pub qfi: f64,
    /// `1/F`, absent when `F = 0`.
    pub bound_fisher: Option<f64>,
    /// `1/F_Q`, absent when `F_Q = 0`.
    pub bound_qfi: Option<f64>,
}

fn inverse_or_none(x: f64) -> Option<f64> {
    (x > 0.0).then(|| 1.0 / x)
}

/// `sum 4 (d sqrt(p)/dphi)^2` from output amplitudes at the stencil points.
fn amplitude_fisher(outs: &[TwoModeState], h: f64, floor: f64) -> (f64, f64, f64) {
    let mut acc = [NeumaierSum::new(); 3];
    let center = outs[4].raw();
    let at = |k: usize, i: usize| outs[k].raw()[i];
    for (i, c0) in center.iter().enumerate() {
        let dh = (at(1, i) - at(0, i)) / (2.0 * h);
        let dh2 = (at(3, i) - at(2, i)) / h;
        let dr = (4.0 * dh2 - dh) / 3.0;
        let p = c0.norm_sqr();
        let term = |d: Complex64| {
            if p > floor {
                let g = (c0.conj() * d).re;
                4.0 * g * g / p
            } else {
                // sqrt(p) ~ |c'||phi - phi*| near an isolated zero
                4.0 * d.norm_sqr()
            }
        };
        acc[0] += term(dh);
        acc[1] += term(dh2);
        acc[2] += term(dr);
    }
    (acc[0].value(), acc[1].value(), acc[2].value())
}

/// Classical Fisher information of the full counting statistics and the QFI.
pub fn fisher_information(probe: &TwoModeState, params: &ChannelParams, cfg: &EstimatorConfig) -> Result<FisherReport> {
    cfg.validate()?;
    let qfi = g_moments(probe)?.qfi();
    let h = cfg.step_for(mean_photons(probe));
    let outs = output_states(probe, &stencil(params, h))?;
    let (f_h, f_h2, fisher) = amplitude_fisher(&outs, h, cfg.prob_floor);
    let scale = f_h2.abs().max(f_h.abs());
    if scale > 0.0 {
        let rel = (f_h - f_h2).abs() / scale;
        if rel > cfg.halving_tol {
            return Err(GyroError::DerivativeUnstable { rel });
        }
    }
    let fisher = fisher.max(0.0);
    Ok(FisherReport {
        fisher,
        qfi,
        bound_fisher: inverse_or_none(fisher),
        bound_qfi: inverse_or_none(qfi),
    })
}

/// Quantum Fisher matrix for simultaneous linear (`G_L`) and nonlinear (`G_NL = N G_L`) phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiParamFisherReport {
    /// `4 [[Var G_L, Cov], [Cov, Var G_NL]]`.
    pub matrix: [[f64; 2]; 2],
    /// `(F^-1)_11`
    pub bound_linear: f64,
    /// `(F^-1)_22`
    pub bound_nonlinear: f64,
    /// `1 / (4 Var G_L)`
    pub single_bound_linear: f64,
    /// `1 / (4 Var G_NL)`
    pub single_bound_nonlinear: f64,
}

impl MultiParamFisherReport {
    pub fn determinant(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }
}

/// Relative determinant below which the matrix is treated as singular.
const SINGULAR_RTOL: f64 = 1e-12;

/// `4 x` the covariance matrix of `(G_L, G_NL)` in the probe state.
pub fn quantum_fisher_matrix(probe: &TwoModeState) -> Result<[[f64; 2]; 2]> {
    if probe.basis() != Basis::Input {
        return Err(GyroError::WrongBasis {
            expected: Basis::Input.name(),
            found: probe.basis().name(),
        });
    }
    probe.check_tail()?;
    // first[p] = <N^p G_L>, second[p] = <N^p G_L^2>
    let (first, second) = probe.linear_generator_sums();
    let mean_l = first[0];
    let mean_nl = first[1];
    let var_l = (second[0] - mean_l * mean_l).max(0.0);
    let var_nl = (second[2] - mean_nl * mean_nl).max(0.0);
    let cov = second[1] - mean_l * mean_nl;
    Ok([[4.0 * var_l, 4.0 * cov], [4.0 * cov, 4.0 * var_nl]])
}

/// Two-parameter bounds; fails with `Unidentifiable` when the matrix is singular.
pub fn multiparam_fisher(probe: &TwoModeState) -> Result<MultiParamFisherReport> {
    let matrix = quantum_fisher_matrix(probe)?;
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    let scale = matrix[0][0] * matrix[1][1];
    if !(scale > 0.0) || det <= SINGULAR_RTOL * scale {
        return Err(GyroError::Unidentifiable { det });
    }
    Ok(MultiParamFisherReport {
        matrix,
        bound_linear: matrix[1][1] / det,
        bound_nonlinear: matrix[0][0] / det,
        single_bound_linear: 1.0 / matrix[0][0],
        single_bound_nonlinear: 1.0 / matrix[1][1],
    })
}
