//! Probe states: coherent pairs, coherent light with squeezed vacuum, and number-state pairs.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GyroError, Result};
use crate::fock::{product_state, TwoModeState};
use crate::sum::csum;

/// Which quadrature of the squeezed mode has reduced fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqueezeAxis {
    /// `a2 + a2^dag` is squeezed; `<a2^2> = -cosh r sinh r`.
    ReduceX,
    /// `i(a2^dag - a2)` is squeezed; `<a2^2> = +cosh r sinh r`.
    ReduceP,
}

impl SqueezeAxis {
    fn sign(self) -> f64 {
        match self {
            SqueezeAxis::ReduceX => -1.0,
            SqueezeAxis::ReduceP => 1.0,
        }
    }
}

impl FromStr for SqueezeAxis {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reduce-x" | "x" => Ok(SqueezeAxis::ReduceX),
            "reduce-p" | "p" => Ok(SqueezeAxis::ReduceP),
            other => Err(GyroError::InvalidParameter(format!("unknown squeeze axis '{other}'"))),
        }
    }
}

/// Declarative description of the light injected at the two input ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProbeSpec {
    CoherentPair {
        alpha1: Complex64,
        alpha2: Complex64,
    },
    /// Real coherent amplitude in mode 1, squeezed vacuum in mode 2.
    CoherentSqueezed {
        alpha: f64,
        r: f64,
        axis: SqueezeAxis,
    },
    NumberPair {
        n1: usize,
        n2: usize,
    },
}

impl ProbeSpec {
    pub fn coherent(alpha1: f64, alpha2: f64) -> Self {
        ProbeSpec::CoherentPair {
            alpha1: Complex64::new(alpha1, 0.0),
            alpha2: Complex64::new(alpha2, 0.0),
        }
    }

    /// `|sqrt((1-f) N)> (x) |sqrt(f N)>`.
    pub fn coherent_split(n_bar: f64, fraction: f64) -> Self {
        Self::coherent(((1.0 - fraction) * n_bar).sqrt(), (fraction * n_bar).sqrt())
    }

    /// Coherent light carrying `(1-f) N` photons and squeezed vacuum carrying `f N`.
    pub fn squeezed_split(n_bar: f64, fraction: f64, axis: SqueezeAxis) -> Self {
        ProbeSpec::CoherentSqueezed {
            alpha: ((1.0 - fraction) * n_bar).max(0.0).sqrt(),
            r: (fraction * n_bar).max(0.0).sqrt().asinh(),
            axis,
        }
    }

    /// `|n1, n2>` with `n2 = round(f N)`.
    pub fn number_split(n_bar: usize, fraction: f64) -> Self {
        let n2 = ((fraction * n_bar as f64).round() as usize).min(n_bar);
        ProbeSpec::NumberPair { n1: n_bar - n2, n2 }
    }

    pub fn mean_total_photons(&self) -> f64 {
        match *self {
            ProbeSpec::CoherentPair { alpha1, alpha2 } => alpha1.norm_sqr() + alpha2.norm_sqr(),
            ProbeSpec::CoherentSqueezed { alpha, r, .. } => alpha * alpha + r.sinh().powi(2),
            ProbeSpec::NumberPair { n1, n2 } => (n1 + n2) as f64,
        }
    }

    /// Photon-number mean and variance of each input mode.
    pub fn mode_moments(&self) -> [(f64, f64); 2] {
        match *self {
            ProbeSpec::CoherentPair { alpha1, alpha2 } => {
                [(alpha1.norm_sqr(), alpha1.norm_sqr()), (alpha2.norm_sqr(), alpha2.norm_sqr())]
            }
            ProbeSpec::CoherentSqueezed { alpha, r, .. } => {
                let n2 = r.sinh().powi(2);
                [(alpha * alpha, alpha * alpha), (n2, 2.0 * n2 * (n2 + 1.0))]
            }
            ProbeSpec::NumberPair { n1, n2 } => [(n1 as f64, 0.0), (n2 as f64, 0.0)],
        }
    }

    /// True when every number-basis coefficient is real.
    pub fn has_real_coefficients(&self) -> bool {
        match *self {
            ProbeSpec::CoherentPair { alpha1, alpha2 } => alpha1.im == 0.0 && alpha2.im == 0.0,
            ProbeSpec::CoherentSqueezed { .. } | ProbeSpec::NumberPair { .. } => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ProbeSpec::CoherentPair { alpha1, alpha2 } => {
                if !(alpha1.re.is_finite() && alpha1.im.is_finite() && alpha2.re.is_finite() && alpha2.im.is_finite()) {
                    return Err(GyroError::InvalidParameter("coherent amplitudes must be finite".into()));
                }
            }
            ProbeSpec::CoherentSqueezed { alpha, r, .. } => {
                if !(alpha.is_finite() && alpha >= 0.0) {
                    return Err(GyroError::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
                }
                if !(r.is_finite() && r >= 0.0) {
                    return Err(GyroError::InvalidParameter(format!("r must be >= 0, got {r}")));
                }
            }
            ProbeSpec::NumberPair { .. } => {}
        }
        Ok(())
    }

    fn mode_pmf(&self, mode: usize) -> Box<dyn Fn(usize) -> f64> {
        match *self {
            ProbeSpec::CoherentPair { alpha1, alpha2 } => {
                let mean = if mode == 0 { alpha1 } else { alpha2 }.norm_sqr();
                Box::new(move |n| poisson_pmf(mean, n))
            }
            ProbeSpec::CoherentSqueezed { alpha, r, .. } => {
                if mode == 0 {
                    let mean = alpha * alpha;
                    Box::new(move |n| poisson_pmf(mean, n))
                } else {
                    Box::new(move |n| squeezed_pmf(r, n))
                }
            }
            ProbeSpec::NumberPair { n1, n2 } => {
                let k = if mode == 0 { n1 } else { n2 };
                Box::new(move |n| if n == k { 1.0 } else { 0.0 })
            }
        }
    }
}

impl fmt::Display for ProbeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ProbeSpec::CoherentPair { alpha1, alpha2 } => {
                if alpha1.im == 0.0 && alpha2.im == 0.0 {
                    write!(f, "coherent:{},{}", alpha1.re, alpha2.re)
                } else {
                    write!(f, "coherent:{}{:+}i,{}{:+}i", alpha1.re, alpha1.im, alpha2.re, alpha2.im)
                }
            }
            ProbeSpec::CoherentSqueezed { alpha, r, axis } => {
                let axis = match axis {
                    SqueezeAxis::ReduceX => "reduce-x",
                    SqueezeAxis::ReduceP => "reduce-p",
                };
                write!(f, "squeezed:{alpha},{r},{axis}")
            }
            ProbeSpec::NumberPair { n1, n2 } => write!(f, "number:{n1},{n2}"),
        }
    }
}

/// Parses `coherent:A1,A2`, `squeezed:ALPHA,R[,AXIS]` or `number:N1,N2` (real amplitudes).
impl FromStr for ProbeSpec {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| GyroError::InvalidParameter(format!("probe '{s}' must look like kind:args")))?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| GyroError::InvalidParameter(format!("probe '{s}' is missing argument {i}")))?
                .parse::<f64>()
                .map_err(|e| GyroError::InvalidParameter(format!("probe '{s}': {e}")))
        };
        let int = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .ok_or_else(|| GyroError::InvalidParameter(format!("probe '{s}' is missing argument {i}")))?
                .parse::<usize>()
                .map_err(|e| GyroError::InvalidParameter(format!("probe '{s}': {e}")))
        };
        let spec = match kind {
            "coherent" => ProbeSpec::coherent(num(0)?, num(1)?),
            "squeezed" => ProbeSpec::CoherentSqueezed {
                alpha: num(0)?,
                r: num(1)?,
                axis: match parts.get(2) {
                    Some(a) => a.parse()?,
                    None => SqueezeAxis::ReduceX,
                },
            },
            "number" => ProbeSpec::NumberPair { n1: int(0)?, n2: int(1)? },
            other => return Err(GyroError::InvalidParameter(format!("unknown probe kind '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Truncation chosen for a probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffPlan {
    pub cutoff1: usize,
    pub cutoff2: usize,
    /// Predicted probability beyond each cutoff.
    pub tail1: f64,
    pub tail2: f64,
}

impl CutoffPlan {
    pub fn total_tail(&self) -> f64 {
        self.tail1 + self.tail2
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = crate::sum::NeumaierSum::new();
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc.value());
    }
    out
}

fn ln_factorial(n: usize) -> f64 {
    // Stirling series is accurate to ~1e-15 here; small n are summed exactly.
    if n < 64 {
        return (1..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

pub(crate) fn poisson_pmf(mean: f64, n: usize) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-mean + n as f64 * mean.ln() - ln_factorial(n)).exp()
}

fn squeezed_pmf(r: f64, n: usize) -> f64 {
    if r == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n % 2 == 1 {
        return 0.0;
    }
    let m = n / 2;
    let ln_amp = -0.5 * r.cosh().ln() + m as f64 * r.tanh().ln() + 0.5 * ln_factorial(2 * m)
        - m as f64 * std::f64::consts::LN_2
        - ln_factorial(m);
    (2.0 * ln_amp).exp()
}

/// Probability strictly beyond `cutoff` for a unimodal photon-number distribution.
fn tail_beyond(pmf: &dyn Fn(usize) -> f64, mean: f64, cutoff: usize, tol: f64) -> f64 {
    let mut acc = crate::sum::NeumaierSum::new();
    let mut n = cutoff + 1;
    let floor = tol * 1e-8;
    let mut quiet = 0;
    loop {
        let p = pmf(n);
        acc += p;
        if (n as f64) > mean && p < floor {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        n += 1;
    }
    acc.value()
}

fn plan_mode(pmf: &dyn Fn(usize) -> f64, mean: f64, var: f64, tol: f64) -> (usize, f64) {
    if var == 0.0 {
        return (mean.round() as usize, 0.0);
    }
    let sd = var.sqrt();
    let mut k = 1.0;
    loop {
        let cutoff = (mean + k * sd).ceil() as usize;
        let tail = tail_beyond(pmf, mean, cutoff, tol);
        if tail <= tol {
            return (cutoff, tail);
        }
        k += 0.5;
    }
}

/// Cutoffs with `cutoff_i >= mean_i + k sd_i`, growing `k` until the predicted tail
/// of each mode is at most half of `tail_tol`.
pub fn plan_cutoffs(spec: &ProbeSpec, tail_tol: f64) -> CutoffPlan {
    let moments = spec.mode_moments();
    let per_mode = 0.5 * tail_tol;
    let (cutoff1, tail1) = plan_mode(&*spec.mode_pmf(0), moments[0].0, moments[0].1, per_mode);
    let (cutoff2, tail2) = plan_mode(&*spec.mode_pmf(1), moments[1].0, moments[1].1, per_mode);
    CutoffPlan {
        cutoff1,
        cutoff2,
        tail1,
        tail2,
    }
}

fn check_vector_tail(v: &[Complex64], cutoff: usize, tol: f64) -> Result<()> {
    let tail = (1.0 - csum(v.iter().map(|c| c.norm_sqr()))).max(0.0);
    if tail > tol {
        return Err(GyroError::CutoffTooSmall { cutoff, tail, tol });
    }
    Ok(())
}

/// Glauber coherent amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` for `n <= cutoff`.
pub fn coherent_vector(alpha: Complex64, cutoff: usize, tail_tol: f64) -> Result<Vec<Complex64>> {
    let mut v = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    if alpha.norm_sqr() == 0.0 {
        v[0] = Complex64::new(1.0, 0.0);
        return Ok(v);
    }
    let lf = ln_factorials(cutoff);
    let (mag, arg) = (alpha.norm(), alpha.arg());
    let half_mean = 0.5 * alpha.norm_sqr();
    for (n, c) in v.iter_mut().enumerate() {
        let ln_abs = -half_mean + n as f64 * mag.ln() - 0.5 * lf[n];
        *c = Complex64::from_polar(ln_abs.exp(), n as f64 * arg);
    }
    check_vector_tail(&v, cutoff, tail_tol)?;
    Ok(v)
}

/// Squeezed-vacuum amplitudes; only even photon numbers are populated and all
/// coefficients are real for both supported axes.
pub fn squeezed_vacuum_vector(r: f64, axis: SqueezeAxis, cutoff: usize, tail_tol: f64) -> Result<Vec<Complex64>> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(GyroError::InvalidParameter(format!("r must be >= 0, got {r}")));
    }
    let mut v = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    if r == 0.0 {
        v[0] = Complex64::new(1.0, 0.0);
        return Ok(v);
    }
    let lf = ln_factorials(cutoff);
    let ln_t = r.tanh().ln();
    let ln_c0 = -0.5 * r.cosh().ln();
    let sign = axis.sign();
    for m in 0..=cutoff / 2 {
        let ln_abs = ln_c0 + m as f64 * ln_t + 0.5 * lf[2 * m] - m as f64 * std::f64::consts::LN_2 - lf[m];
        let s = if m % 2 == 1 { sign } else { 1.0 };
        v[2 * m] = Complex64::new(s * ln_abs.exp(), 0.0);
    }
    check_vector_tail(&v, cutoff, tail_tol)?;
    Ok(v)
}

/// `|n>` on `0..=cutoff`.
pub fn number_vector(n: usize, cutoff: usize) -> Result<Vec<Complex64>> {
    if n > cutoff {
        return Err(GyroError::NumberAboveCutoff { n, cutoff });
    }
    let mut v = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    v[n] = Complex64::new(1.0, 0.0);
    Ok(v)
}

/// Build the two-mode probe in the input basis with automatically sized cutoffs.
pub fn build_probe(spec: &ProbeSpec, tail_tol: f64) -> Result<TwoModeState> {
    spec.validate()?;
    let plan = plan_cutoffs(spec, tail_tol);
    build_probe_with_plan(spec, &plan, tail_tol)
}

pub fn build_probe_with_plan(spec: &ProbeSpec, plan: &CutoffPlan, tail_tol: f64) -> Result<TwoModeState> {
    let per_mode = 0.5 * tail_tol;
    let (v1, v2) = match *spec {
        ProbeSpec::CoherentPair { alpha1, alpha2 } => (
            coherent_vector(alpha1, plan.cutoff1, per_mode)?,
            coherent_vector(alpha2, plan.cutoff2, per_mode)?,
        ),
        ProbeSpec::CoherentSqueezed { alpha, r, axis } => (
            coherent_vector(Complex64::new(alpha, 0.0), plan.cutoff1, per_mode)?,
            squeezed_vacuum_vector(r, axis, plan.cutoff2, per_mode)?,
        ),
        ProbeSpec::NumberPair { n1, n2 } => (number_vector(n1, plan.cutoff1)?, number_vector(n2, plan.cutoff2)?),
    };
    let state = product_state(&v1, &v2)?.with_tail_tol(tail_tol);
    state.check_tail()?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;

    fn moments(v: &[Complex64]) -> (f64, f64) {
        let mean = csum(v.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()));
        let second = csum(v.iter().enumerate().map(|(n, c)| (n * n) as f64 * c.norm_sqr()));
        (mean, second - mean * mean)
    }

    #[test]
    fn coherent_vector_basics() {
        let v = coherent_vector(Complex64::new(0.0, 0.0), 5, TOL).unwrap();
        assert_eq!(v[0], Complex64::new(1.0, 0.0));
        assert!(v[1..].iter().all(|c| c.norm_sqr() == 0.0));

        let v = coherent_vector(Complex64::new(1.0, 0.0), 20, TOL).unwrap();
        assert!((v[0].norm_sqr() - (-1.0f64).exp()).abs() < 1e-15);
        let (mean, _) = moments(&v);
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_vector_reports_short_cutoff() {
        let err = coherent_vector(Complex64::new(3.0, 0.0), 6, TOL).unwrap_err();
        assert!(matches!(err, GyroError::CutoffTooSmall { cutoff: 6, .. }));
    }

    #[test]
    fn squeezed_vector_moments() {
        assert_eq!(
            squeezed_vacuum_vector(0.0, SqueezeAxis::ReduceX, 4, TOL).unwrap()[0],
            Complex64::new(1.0, 0.0)
        );
        for &r in &[0.3, 1.0, 1.5] {
            let v = squeezed_vacuum_vector(r, SqueezeAxis::ReduceX, 400, TOL).unwrap();
            assert!(v.iter().skip(1).step_by(2).all(|c| *c == Complex64::new(0.0, 0.0)));
            let (mean, var) = moments(&v);
            let s2 = r.sinh().powi(2);
            assert!((mean - s2).abs() < 1e-9, "r={r}: {mean} vs {s2}");
            assert!((var - 2.0 * s2 * r.cosh().powi(2)).abs() < 1e-8);
        }
        let v = squeezed_vacuum_vector(1.0, SqueezeAxis::ReduceX, 200, TOL).unwrap();
        assert!((moments(&v).0 - 1.381_097_845_541_816_3).abs() < 1e-9);
    }

    #[test]
    fn squeezed_axis_sets_sign_of_a_squared() {
        // <a^2> = sum_n c_n c_{n+2} sqrt((n+1)(n+2))
        let a2 = |v: &[Complex64]| {
            csum((0..v.len() - 2).map(|n| (v[n] * v[n + 2]).re * (((n + 1) * (n + 2)) as f64).sqrt()))
        };
        let r: f64 = 0.8;
        let x = squeezed_vacuum_vector(r, SqueezeAxis::ReduceX, 200, TOL).unwrap();
        let p = squeezed_vacuum_vector(r, SqueezeAxis::ReduceP, 200, TOL).unwrap();
        assert!((a2(&x) + r.cosh() * r.sinh()).abs() < 1e-10);
        assert!((a2(&p) - r.cosh() * r.sinh()).abs() < 1e-10);
    }

    #[test]
    fn number_vector_cases() {
        assert_eq!(number_vector(0, 0).unwrap(), vec![Complex64::new(1.0, 0.0)]);
        let v = number_vector(3, 5).unwrap();
        assert_eq!(v[3], Complex64::new(1.0, 0.0));
        assert_eq!(csum(v.iter().map(|c| c.norm_sqr())), 1.0);
        assert_eq!(number_vector(4, 3), Err(GyroError::NumberAboveCutoff { n: 4, cutoff: 3 }));
    }

    #[test]
    fn plan_cutoffs_cases() {
        let vac = plan_cutoffs(&ProbeSpec::coherent(0.0, 0.0), TOL);
        assert_eq!((vac.cutoff1, vac.cutoff2), (0, 0));

        let np = plan_cutoffs(&ProbeSpec::NumberPair { n1: 5, n2: 2 }, TOL);
        assert_eq!((np.cutoff1, np.cutoff2), (5, 2));

        // Poisson(4) tail beyond c, summed term by term from the pmf recurrence.
        let poisson_tail = |c: usize| {
            let mut p = (-4.0f64).exp();
            let mut tail = 0.0;
            for n in 1..200 {
                p *= 4.0 / n as f64;
                if n > c {
                    tail += p;
                }
            }
            tail
        };
        let minimal = (0..100).find(|&c| poisson_tail(c) <= 0.5 * TOL).unwrap();
        let plan = plan_cutoffs(&ProbeSpec::coherent(2.0, 0.0), TOL);
        assert!(poisson_tail(plan.cutoff1) <= 0.5 * TOL);
        assert!(plan.cutoff1 >= minimal && plan.cutoff1 <= minimal + 2, "{} vs {minimal}", plan.cutoff1);
        assert!((plan.tail1 - poisson_tail(plan.cutoff1)).abs() < 1e-14);
        assert_eq!(plan.cutoff2, 0);
    }

    #[test]
    fn build_probe_cases() {
        let s = build_probe(&ProbeSpec::NumberPair { n1: 2, n2: 2 }, TOL).unwrap();
        assert_eq!(s.amplitude(2, 2), Complex64::new(1.0, 0.0));

        let s = build_probe(&ProbeSpec::coherent(2.0, 0.0), TOL).unwrap();
        for n in 0..=s.cutoff1() {
            let p = s.amplitude(n, 0).norm_sqr();
            let mut pmf = (-4.0f64).exp();
            for k in 1..=n {
                pmf *= 4.0 / k as f64;
            }
            assert!((p - pmf).abs() < 1e-15);
        }

        let spec = ProbeSpec::CoherentSqueezed {
            alpha: 2.0,
            r: 1.0,
            axis: SqueezeAxis::ReduceX,
        };
        let s = build_probe(&spec, TOL).unwrap();
        let n = s.expectation_diagonal(|a, b| (a + b) as f64);
        assert!((n - (4.0 + 1.0f64.sinh().powi(2))).abs() < 1e-8);
        assert!((spec.mean_total_photons() - 5.381_097_845_541_816).abs() < 1e-12);
        assert!(s.max_imag() < 1e-14);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["coherent:2,0", "squeezed:2,1,reduce-x", "number:3,1"] {
            let spec: ProbeSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("squeezed:2,-1".parse::<ProbeSpec>().is_err());
        assert!("laser:1".parse::<ProbeSpec>().is_err());
    }
}
