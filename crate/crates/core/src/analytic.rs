//! Closed-form models used as oracles and asymptotes.
//!
//! Two families of formulas live here. The `*_printed` functions reproduce the
//! published expressions literally, which correspond to a normal-ordered Kerr
//! term `a+^dag^2 a+^2 - a-^dag^2 a-^2`. The unsuffixed functions are exact for
//! the generator `G = N+^2 - N-^2` that the channel actually applies; they differ
//! from the printed ones by `N -> N + 1` in the interference phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GyroError, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
pub const HBAR: f64 = 1.054_571_817e-34;

/// Fiber-loop gyroscope hardware, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Optical angular frequency.
    pub omega: f64,
    /// Total fiber length.
    pub length: f64,
    /// Loop radius; the enclosed area is `pi R^2`.
    pub radius: f64,
    pub n_loops: u32,
    /// Kerr susceptibility, identical for both directions.
    pub chi: f64,
    pub cross_section: f64,
    pub pulse_duration: f64,
    /// Linear refractive index.
    pub n0: f64,
    /// Rotation rate, signed.
    pub rotation_rate: f64,
}

impl PhysicalParams {
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega", self.omega),
            ("length", self.length),
            ("radius", self.radius),
            ("chi", self.chi),
            ("cross_section", self.cross_section),
            ("pulse_duration", self.pulse_duration),
            ("n0", self.n0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GyroError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_loops == 0 {
            return Err(GyroError::InvalidParameter("n_loops must be >= 1".into()));
        }
        if !self.rotation_rate.is_finite() {
            return Err(GyroError::InvalidParameter("rotation_rate must be finite".into()));
        }
        Ok(())
    }

    /// Intensity-dependent index for a pulse carrying `photons` photons.
    pub fn kerr_index(&self, photons: f64) -> f64 {
        (self.n0 * self.n0 + self.kerr_coefficient() * photons).sqrt()
    }

    /// `d(n^2)/dN = mu0 hbar omega c chi / (A tau)`.
    pub fn kerr_coefficient(&self) -> f64 {
        VACUUM_PERMEABILITY * HBAR * self.omega * SPEED_OF_LIGHT * self.chi / (self.cross_section * self.pulse_duration)
    }
}

/// Nonlinear signal phase per unit of `N+^2 - N-^2`.
pub fn signal_from_rotation(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    Ok(VACUUM_PERMEABILITY * p.area() * HBAR * p.omega * p.omega * p.n_loops as f64 * p.chi * p.rotation_rate
        / (p.cross_section * p.pulse_duration * SPEED_OF_LIGHT))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SagnacPhase {
    /// `(omega/c) L (n+ - n-)`, independent of rotation.
    pub propagation: f64,
    /// `2 (omega A N / c^2) Omega (n+^2 + n-^2)`.
    pub rotation: f64,
    /// Part of `rotation` proportional to `chi`.
    pub nonlinear: f64,
}

impl SagnacPhase {
    pub fn total(&self) -> f64 {
        self.propagation + self.rotation
    }
}

fn sagnac_terms(p: &PhysicalParams, index_diff: f64, index_sq_sum: f64, kerr_sq_sum: f64) -> SagnacPhase {
    let c = SPEED_OF_LIGHT;
    let prefactor = 2.0 * p.omega * p.area() * p.n_loops as f64 / (c * c) * p.rotation_rate;
    SagnacPhase {
        propagation: p.omega / c * p.length * index_diff,
        rotation: prefactor * index_sq_sum,
        nonlinear: prefactor * kerr_sq_sum,
    }
}

/// Phase difference for given refractive indices of the two directions.
pub fn sagnac_phase_from_indices(p: &PhysicalParams, n_plus: f64, n_minus: f64) -> Result<SagnacPhase> {
    p.validate()?;
    if !(n_plus >= 1.0 && n_minus >= 1.0) {
        return Err(GyroError::InvalidParameter(format!(
            "refractive indices must be >= 1, got {n_plus}, {n_minus}"
        )));
    }
    let n0sq = p.n0 * p.n0;
    Ok(sagnac_terms(
        p,
        n_plus - n_minus,
        n_plus * n_plus + n_minus * n_minus,
        (n_plus * n_plus - n0sq) + (n_minus * n_minus - n0sq),
    ))
}

/// Phase difference for pulses carrying `photons_plus` and `photons_minus` photons.
pub fn sagnac_phase(p: &PhysicalParams, photons_plus: f64, photons_minus: f64) -> Result<SagnacPhase> {
    p.validate()?;
    if !(photons_plus >= 0.0 && photons_minus >= 0.0) {
        return Err(GyroError::InvalidParameter("photon numbers must be >= 0".into()));
    }
    let kerr = p.kerr_coefficient();
    let (n_plus, n_minus) = (p.kerr_index(photons_plus), p.kerr_index(photons_minus));
    // n+ - n- = (n+^2 - n-^2) / (n+ + n-) avoids cancelling two nearly equal indices
    let diff = kerr * (photons_plus - photons_minus) / (n_plus + n_minus);
    let excess = kerr * (photons_plus + photons_minus);
    Ok(sagnac_terms(p, diff, 2.0 * p.n0 * p.n0 + excess, excess))
}

/// First two moments of the output difference `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MMoments {
    pub mean: f64,
    pub mean_sq: f64,
}

impl MMoments {
    pub fn variance(&self) -> f64 {
        self.mean_sq - self.mean * self.mean
    }
}

/// Amplitudes of the counter-propagating modes for coherent inputs.
pub fn counter_propagating_amplitudes(alpha1: Complex64, alpha2: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ((alpha1 - i * alpha2) * s, (alpha1 + i * alpha2) * s)
}

/// Exact `<M>`, `<M^2>` for coherent `|alpha+>|alpha->` inside the loop.
pub fn coherent_moments_complex(alpha_plus: Complex64, alpha_minus: Complex64, phi: f64, phi0: f64) -> MMoments {
    let n_bar = alpha_plus.norm_sqr() + alpha_minus.norm_sqr();
    // the relative phase enters through alpha+ conj(alpha-), checked against complex-amplitude Fock runs
    let z = alpha_minus.conj() * alpha_plus;
    let (rho, theta) = z.to_polar();
    let vis1 = (-2.0 * n_bar * phi.sin().powi(2)).exp();
    let vis2 = (-2.0 * n_bar * (2.0 * phi).sin().powi(2)).exp();
    let mean = 2.0 * rho * vis1 * (n_bar * (2.0 * phi).sin() + 2.0 * phi + phi0 - theta).cos();
    let mean_sq = n_bar
        + 2.0 * rho * rho * (1.0 + vis2 * (n_bar * (4.0 * phi).sin() + 8.0 * phi + 2.0 * phi0 - 2.0 * theta).cos());
    MMoments { mean, mean_sq }
}

/// Exact moments for real `alpha+-` with `n+-` mean photons.
pub fn coherent_moments(n_plus: f64, n_minus: f64, phi: f64, phi0: f64) -> MMoments {
    coherent_moments_complex(
        Complex64::new(n_plus.sqrt(), 0.0),
        Complex64::new(n_minus.sqrt(), 0.0),
        phi,
        phi0,
    )
}

/// The published coherent moments, phase offsets `0` and `4 phi`.
pub fn coherent_moments_printed(n_plus: f64, n_minus: f64, phi: f64, phi0: f64) -> MMoments {
    let n_bar = n_plus + n_minus;
    let pm = n_plus * n_minus;
    let mean = 2.0 * pm.sqrt() * (-2.0 * n_bar * phi.sin().powi(2)).exp() * (n_bar * (2.0 * phi).sin() + phi0).cos();
    let mean_sq = n_bar
        + 2.0 * pm * (1.0 + (-2.0 * n_bar * (2.0 * phi).sin().powi(2)).exp() * (n_bar * (4.0 * phi).sin() + 4.0 * phi + 2.0 * phi0).cos());
    MMoments { mean, mean_sq }
}

/// Exact error-propagation `Var(M) / (d<M>/dphi)^2` for real `alpha+-`.
pub fn coherent_exact_delta2phi(n_plus: f64, n_minus: f64, phi: f64, phi0: f64) -> Result<f64> {
    let n_bar = n_plus + n_minus;
    let m = coherent_moments(n_plus, n_minus, phi, phi0);
    let vis = (-2.0 * n_bar * phi.sin().powi(2)).exp();
    let kappa = n_bar * (2.0 * phi).sin() + 2.0 * phi + phi0;
    let slope = 2.0
        * (n_plus * n_minus).sqrt()
        * vis
        * (-2.0 * n_bar * (2.0 * phi).sin() * kappa.cos() - (2.0 * n_bar * (2.0 * phi).cos() + 2.0) * kappa.sin());
    if slope == 0.0 {
        return Err(GyroError::FlatResponse { observable: "M", slope });
    }
    Ok(m.variance() / (slope * slope))
}

/// Which asymptotic assumptions hold at the queried point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct ValidityFlags {
    /// `sqrt(N) phi < 0.1`: total-number dispersion does not wash out the fringes.
    pub visibility: bool,
    /// `cos(2 N phi) > 1/sqrt(2)`: the signal is well inside the first fringe.
    pub small_signal: bool,
    /// `N >= 8`.
    pub large_n: bool,
}

impl ValidityFlags {
    pub fn all(&self) -> bool {
        self.visibility && self.small_signal && self.large_n
    }

    /// Names of the assumptions that fail, `;`-separated.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.visibility {
            out.push("visibility");
        }
        if !self.small_signal {
            out.push("small_signal");
        }
        if !self.large_n {
            out.push("small_n");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteReport {
    pub predicted_delta2phi: f64,
    pub asymptote: f64,
    pub flags: ValidityFlags,
}

/// Balanced coherent probe, `1 / (16 N n+ n- cos(2 N phi))` with `n+- = N/2`.
pub fn coherent_delta2phi(n_bar: f64, phi: f64) -> Result<AsymptoteReport> {
    if !(n_bar > 0.0) {
        return Err(GyroError::InvalidParameter(format!("N_bar must be > 0, got {n_bar}")));
    }
    let cos = (2.0 * n_bar * phi).cos();
    if cos <= 0.0 {
        return Err(GyroError::OutOfRegime(format!("cos(2 N phi) = {cos} <= 0")));
    }
    let half = n_bar / 2.0;
    Ok(AsymptoteReport {
        predicted_delta2phi: 1.0 / (16.0 * n_bar * half * half * cos),
        asymptote: 0.25 / n_bar.powi(3),
        flags: ValidityFlags {
            visibility: n_bar.sqrt() * phi.abs() < 0.1,
            small_signal: cos > std::f64::consts::FRAC_1_SQRT_2,
            large_n: n_bar >= 8.0,
        },
    })
}

/// Coherent light plus reduce-X squeezed vacuum at `phi0 = -pi/2`, `phi -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezedSimple {
    pub var_m: f64,
    /// `|<[M, G]>|`
    pub commutator: f64,
    pub delta2phi: f64,
}

pub fn squeezed_simple_model(alpha: f64, r: f64) -> SqueezedSimple {
    let a2 = alpha * alpha;
    let n2 = r.sinh().powi(2);
    let var_n2 = 2.0 * n2 * r.cosh().powi(2);
    let var_m = a2 * (-2.0 * r).exp() + n2;
    let commutator = 2.0 * (a2 * a2 + a2 - n2 * n2 - var_n2).abs();
    SqueezedSimple {
        var_m,
        commutator,
        delta2phi: var_m / (commutator * commutator),
    }
}

/// Large-`N` optimum of the simple squeezed estimator: `N2 = sqrt(N)/2`, `1/(4 N^3.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezedOptimum {
    pub n2: f64,
    pub delta2phi: f64,
}

pub fn squeezed_simple_optimum(n_bar: f64) -> SqueezedOptimum {
    SqueezedOptimum {
        n2: n_bar.sqrt() / 2.0,
        delta2phi: 0.25 / n_bar.powf(3.5),
    }
}

/// `E[X^k]` for a standard normal `X`.
pub fn gaussian_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    (1..k).step_by(2).map(|j| j as f64).product()
}

fn check_fraction(f: f64) -> Result<()> {
    if !(f > 0.0 && f < 1.0) {
        return Err(GyroError::InvalidParameter(format!("fraction must lie in (0, 1), got {f}")));
    }
    Ok(())
}

/// Large-`r`, large-`alpha` surrogate for coherent (x) squeezed probes.
///
/// Mode 1 is frozen at `alpha = sqrt((1-f) N)`. Mode 2 keeps only its
/// anti-squeezed quadrature, `P = 2 sqrt(N2) Y` with `Y` standard normal, so
/// `N2 ~ N2bar Y^2` and `G_L ~ alpha P`, `G_NL ~ (alpha^2 + N2bar Y^2) alpha P`.
/// Returns `4 x` the covariance matrix of `(G_L, G_NL)`.
pub fn squeezed_surrogate_matrix(fraction: f64, n_bar: f64) -> Result<[[f64; 2]; 2]> {
    check_fraction(fraction)?;
    let a2 = (1.0 - fraction) * n_bar;
    let n2 = fraction * n_bar;
    let scale = 4.0 * a2 * n2; // (alpha * 2 sqrt(N2))^2
    let m = gaussian_moment;
    // every term is odd in Y before squaring, so the means vanish
    let ll = scale * m(2);
    let ln = scale * (a2 * m(2) + n2 * m(4));
    let nn = scale * (a2 * a2 * m(2) + 2.0 * a2 * n2 * m(4) + n2 * n2 * m(6));
    Ok([[4.0 * ll, 4.0 * ln], [4.0 * ln, 4.0 * nn]])
}

/// Surrogate quantum Fisher information for the nonlinear phase.
pub fn squeezed_qfi_surrogate(fraction: f64, n_bar: f64) -> Result<f64> {
    Ok(squeezed_surrogate_matrix(fraction, n_bar)?[1][1])
}

/// `((F^-1)_11, (F^-1)_22)` of a 2x2 Fisher matrix.
pub fn inverse_diagonal(m: &[[f64; 2]; 2]) -> Result<(f64, f64)> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(det > 1e-12 * (m[0][0] * m[1][1]).abs()) {
        return Err(GyroError::Unidentifiable { det });
    }
    Ok((m[1][1] / det, m[0][0] / det))
}

/// Coherent (x) vacuum quantum Fisher matrix, Poisson moments.
pub fn coherent_multiparam_matrix(n_bar: f64) -> [[f64; 2]; 2] {
    let n = n_bar;
    let cross = n * n + n;
    let third = n * n * n + 3.0 * n * n + n;
    [[4.0 * n, 4.0 * cross], [4.0 * cross, 4.0 * third]]
}

/// Closed forms for `|n1, n2>` inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumberStateModel {
    pub mean_m: f64,
    pub mean_m2: f64,
    /// Error propagation with `M`; `None` for `n1 = n2`, where `<M>` does not depend on `phi`.
    pub delta2phi_m: Option<f64>,
    pub qfi: f64,
    /// `1 / (2 N^4)` for twin inputs.
    pub twin_m2_asymptote: Option<f64>,
}

fn check_pair(n1: usize, n2: usize) -> Result<()> {
    if n1 + n2 == 0 {
        return Err(GyroError::InvalidParameter("n1 + n2 must be >= 1".into()));
    }
    Ok(())
}

/// Exact moments; the interference phase is `2 phi N + phi0`.
pub fn number_state_model(n1: usize, n2: usize, phi: f64, phi0: f64) -> Result<NumberStateModel> {
    check_pair(n1, n2)?;
    let n = (n1 + n2) as f64;
    let d = n1 as f64 - n2 as f64;
    let q = (2 * n1 * n2 + n1 + n2) as f64;
    let lambda = 2.0 * phi * n + phi0;
    let (s, c) = lambda.sin_cos();
    // the published first term is (n1 - n2) C^2; at phi = phi0 = 0 the output is |n1, n2> and <M^2> = (n1 - n2)^2
    let mean_sq = d * d * c * c + q * s * s;
    Ok(NumberStateModel {
        mean_m: d * c,
        mean_m2: mean_sq,
        delta2phi_m: (n1 != n2).then(|| q / (4.0 * n * n * d * d)),
        qfi: 4.0 * n * n * q,
        twin_m2_asymptote: (n1 == n2).then(|| 0.5 / n.powi(4)),
    })
}

/// The published number-state formulas with `N - 1` in the phase and denominator.
pub fn number_state_model_printed(n1: usize, n2: usize, phi: f64, phi0: f64) -> Result<NumberStateModel> {
    check_pair(n1, n2)?;
    let n = (n1 + n2) as f64;
    let d = n1 as f64 - n2 as f64;
    let q = (2 * n1 * n2 + n1 + n2) as f64;
    let lambda = 2.0 * phi * (n - 1.0) + phi0;
    let (s, c) = lambda.sin_cos();
    Ok(NumberStateModel {
        mean_m: d * c,
        mean_m2: d * c * c + q * s * s,
        delta2phi_m: (n1 != n2 && n > 1.0).then(|| q / (4.0 * (n - 1.0).powi(2) * d * d)),
        qfi: 4.0 * n * n * q,
        twin_m2_asymptote: (n1 == n2).then(|| 0.5 / n.powi(4)),
    })
}

/// Exact `M^2` error propagation for the twin input `|k, k>`.
///
/// With `M = 2 (C J_z - S J_x)` and `J = j(j+1)`, `j = k`:
/// `<M^2> = 2 S^2 J`, `<M^4> = S^4 (6 J^2 - 4 J) + 8 C^2 S^2 J`.
pub fn twin_m2_delta2phi(k: usize, phi: f64, phi0: f64) -> Result<f64> {
    check_pair(k, k)?;
    let n = 2.0 * k as f64;
    let j = k as f64 * (k as f64 + 1.0);
    let (s, c) = (2.0 * phi * n + phi0).sin_cos();
    let var = s * s * (s * s * (2.0 * j * j - 4.0 * j) + 8.0 * c * c * j);
    let slope = 8.0 * n * j * s * c;
    if slope == 0.0 {
        // phi0 = 0, phi -> 0 limit
        if c == 1.0 || c == -1.0 {
            return Ok(1.0 / (8.0 * n * n * j));
        }
        return Err(GyroError::FlatResponse { observable: "M^2", slope });
    }
    Ok(var / (slope * slope))
}

/// Large-`N` twin Fock moments: `<M^2> ~ N^2 S^2 / 2`, `Var M^2 ~ S^2 (N^4 S^2 / 8 + 2 N^2 C^2)`.
pub fn twin_m2_moments_asymptotic(n_bar: f64, phi: f64, phi0: f64) -> (f64, f64) {
    let (s, c) = (2.0 * phi * (n_bar - 1.0) + phi0).sin_cos();
    let n2 = n_bar * n_bar;
    (0.5 * n2 * s * s, s * s * (n2 * n2 * s * s / 8.0 + 2.0 * n2 * c * c))
}
