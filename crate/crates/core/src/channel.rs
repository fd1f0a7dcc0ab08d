//! Signal-dependent transformation of the gyroscope: input beam splitter,
//! diagonal Kerr + bias phase on the counter-propagating modes, output beam
//! splitter, and photon counting at the output ports.
//!
//! Mode convention: `a± = (a1 ∓ i a2)/√2`. Within the photon-number sector `n`
//! the input state `|n1, n - n1>` has counter-propagating components
//! `(-i)^(n - n1) W_n[k][n1]` on `|n+ = k, n- = n - k>` with `W_n` real
//! orthogonal. `W_n` is generated from `W_{n-1}` by adding one photon.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GyroError, Result};
use crate::fock::{sector_offset, Basis, TwoModeState};
use crate::sum::{csum, NeumaierSum};

/// Nonlinear signal `phi` and fixed linear bias `phi0`, both in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    pub phi: f64,
    pub phi0: f64,
}

impl ChannelParams {
    pub fn new(phi: f64, phi0: f64) -> Self {
        ChannelParams { phi, phi0 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.phi.is_finite() && self.phi0.is_finite()) {
            return Err(GyroError::InvalidParameter("phi and phi0 must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamSplitterSense {
    /// Input ports to counter-propagating modes.
    Forward,
    /// Counter-propagating modes to output ports.
    Inverse,
}

/// Real rotation matrices `W_n`, produced sector by sector.
pub(crate) struct SectorRotations {
    n: usize,
    current: Vec<f64>,
}

impl SectorRotations {
    pub(crate) fn new() -> Self {
        SectorRotations { n: 0, current: vec![1.0] }
    }

    /// `W_n` row-major: entry `[k * (n + 1) + n1]`.
    pub(crate) fn matrix(&self) -> &[f64] {
        &self.current
    }

    /// Adds one photon through the symmetric combination of `a1^dag` and `a2^dag`
    /// (weights `sqrt(n1/n)`, `sqrt(n2/n)`). The single-operator ladders amplify
    /// rounding error geometrically in `n`; this one is a contraction.
    pub(crate) fn advance(&mut self) {
        let prev = std::mem::take(&mut self.current);
        let m = self.n;
        let n = m + 1;
        let dim = n + 1;
        let at = |k: usize, j: usize| prev[k * (m + 1) + j];
        let mut next = vec![0.0; dim * dim];
        let norm = 1.0 / (n as f64 * std::f64::consts::SQRT_2);
        for k in 0..=n {
            let sk = (k as f64).sqrt();
            let sr = ((n - k) as f64).sqrt();
            // a1^dag ~ (a+^dag + a-^dag); a2^dag ~ (a+^dag - a-^dag) once the (-i) phases are pulled out
            let up = |j: usize| if k > 0 { sk * at(k - 1, j) } else { 0.0 };
            let down = |j: usize| if k < n { sr * at(k, j) } else { 0.0 };
            for n1 in 0..=n {
                let mut acc = 0.0;
                if n1 > 0 {
                    acc += (n1 as f64).sqrt() * (up(n1 - 1) + down(n1 - 1));
                }
                if n1 < n {
                    acc += ((n - n1) as f64).sqrt() * (up(n1) - down(n1));
                }
                next[k * dim + n1] = acc * norm;
            }
        }
        self.current = next;
        self.n = n;
    }
}

/// `(-i)^m`
#[inline]
fn neg_i_pow(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

#[inline]
fn forward_sector(w: &[f64], src: &[Complex64], dst: &mut [Complex64]) {
    let n = src.len() - 1;
    let dim = n + 1;
    let phased: Vec<Complex64> = src.iter().enumerate().map(|(n1, c)| neg_i_pow(n - n1) * c).collect();
    for (k, d) in dst.iter_mut().enumerate() {
        let row = &w[k * dim..(k + 1) * dim];
        let mut re = 0.0;
        let mut im = 0.0;
        for (wk, c) in row.iter().zip(&phased) {
            re += wk * c.re;
            im += wk * c.im;
        }
        *d = Complex64::new(re, im);
    }
}

#[inline]
fn inverse_sector(w: &[f64], src: &[Complex64], dst: &mut [Complex64]) {
    let n = src.len() - 1;
    let dim = n + 1;
    let mut re = vec![0.0; dim];
    let mut im = vec![0.0; dim];
    for (k, d) in src.iter().enumerate() {
        if d.re == 0.0 && d.im == 0.0 {
            continue;
        }
        let row = &w[k * dim..(k + 1) * dim];
        for (n1, wk) in row.iter().enumerate() {
            re[n1] += wk * d.re;
            im[n1] += wk * d.im;
        }
    }
    for (n1, out) in dst.iter_mut().enumerate() {
        // i^(n - n1) = conj((-i)^(n - n1))
        *out = neg_i_pow(n - n1).conj() * Complex64::new(re[n1], im[n1]);
    }
}

/// Diagonal phase `exp(-i[phi (k^2 - (n-k)^2) + (phi0/2)(2k - n)])` on sector `n`.
#[inline]
fn phase_sector(params: &ChannelParams, n: usize, src: &[Complex64], dst: &mut [Complex64]) {
    let nf = n as f64;
    let rate = params.phi * nf + 0.5 * params.phi0;
    for (k, (s, d)) in src.iter().zip(dst.iter_mut()).enumerate() {
        let diff = 2.0 * k as f64 - nf;
        *d = s * Complex64::from_polar(1.0, -diff * rate);
    }
}

fn require_basis(state: &TwoModeState, expected: Basis) -> Result<()> {
    if state.basis() != expected {
        return Err(GyroError::WrongBasis {
            expected: expected.name(),
            found: state.basis().name(),
        });
    }
    Ok(())
}

/// Exact 50/50 beam splitter applied sector by sector.
pub fn apply_beam_splitter(state: &TwoModeState, sense: BeamSplitterSense) -> Result<TwoModeState> {
    let (from, to) = match sense {
        BeamSplitterSense::Forward => (Basis::Input, Basis::Inner),
        BeamSplitterSense::Inverse => (Basis::Inner, Basis::Output),
    };
    require_basis(state, from)?;
    state.check_tail()?;
    let nmax = state.max_total();
    let mut out = vec![Complex64::new(0.0, 0.0); sector_offset(nmax + 1)];
    let mut rot = SectorRotations::new();
    for n in 0..=nmax {
        if n > 0 {
            rot.advance();
        }
        let src = state.sector(n);
        let off = sector_offset(n);
        let dst = &mut out[off..off + n + 1];
        match sense {
            BeamSplitterSense::Forward => forward_sector(rot.matrix(), src, dst),
            BeamSplitterSense::Inverse => inverse_sector(rot.matrix(), src, dst),
        }
    }
    Ok(TwoModeState::from_sectors(to, nmax, state.tail_tol(), out))
}

/// Kerr-Sagnac phase `exp(-i phi G)` with `G = N+^2 - N-^2`, plus the linear bias.
pub fn apply_gyro_phase(state: &TwoModeState, params: &ChannelParams) -> Result<TwoModeState> {
    require_basis(state, Basis::Inner)?;
    params.validate()?;
    let nmax = state.max_total();
    let mut out = vec![Complex64::new(0.0, 0.0); sector_offset(nmax + 1)];
    for n in 0..=nmax {
        let off = sector_offset(n);
        phase_sector(params, n, state.sector(n), &mut out[off..off + n + 1]);
    }
    Ok(TwoModeState::from_sectors(Basis::Inner, nmax, state.tail_tol(), out))
}

/// Forward splitter once, then phase for each working point; states stay in the
/// counter-propagating basis. Cheap when only `M` moments are needed.
pub fn inner_states(probe: &TwoModeState, params: &[ChannelParams]) -> Result<Vec<TwoModeState>> {
    for p in params {
        p.validate()?;
    }
    let inner = apply_beam_splitter(probe, BeamSplitterSense::Forward)?;
    params.iter().map(|p| apply_gyro_phase(&inner, p)).collect()
}

/// Output-port states for several working points, sharing the rotation matrices.
pub fn output_states(probe: &TwoModeState, params: &[ChannelParams]) -> Result<Vec<TwoModeState>> {
    require_basis(probe, Basis::Input)?;
    probe.check_tail()?;
    for p in params {
        p.validate()?;
    }
    let nmax = probe.max_total();
    let len = sector_offset(nmax + 1);
    let mut outs: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); len]; params.len()];
    let mut rot = SectorRotations::new();
    let mut inner = Vec::new();
    let mut phased = Vec::new();
    for n in 0..=nmax {
        if n > 0 {
            rot.advance();
        }
        let src = probe.sector(n);
        if src.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            continue;
        }
        inner.resize(n + 1, Complex64::new(0.0, 0.0));
        phased.resize(n + 1, Complex64::new(0.0, 0.0));
        forward_sector(rot.matrix(), src, &mut inner);
        let off = sector_offset(n);
        for (p, out) in params.iter().zip(outs.iter_mut()) {
            phase_sector(p, n, &inner, &mut phased);
            inverse_sector(rot.matrix(), &phased, &mut out[off..off + n + 1]);
        }
    }
    Ok(outs
        .into_iter()
        .map(|amps| TwoModeState::from_sectors(Basis::Output, nmax, probe.tail_tol(), amps))
        .collect())
}

/// Joint output distribution `p(n1, n2 | phi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonStatistics {
    pub params: ChannelParams,
    max_total: usize,
    probs: Vec<f64>,
}

impl PhotonStatistics {
    pub fn from_output(state: &TwoModeState, params: ChannelParams) -> Self {
        PhotonStatistics {
            params,
            max_total: state.max_total(),
            probs: state.raw().iter().map(|c| c.norm_sqr()).collect(),
        }
    }

    pub fn max_total(&self) -> usize {
        self.max_total
    }

    pub fn p(&self, n1: usize, n2: usize) -> f64 {
        if n1 + n2 > self.max_total {
            return 0.0;
        }
        self.probs[sector_offset(n1 + n2) + n1]
    }

    pub fn total(&self) -> f64 {
        csum(self.probs.iter().copied())
    }

    /// Distribution of `n1 + n2`.
    pub fn total_number_distribution(&self) -> Vec<f64> {
        (0..=self.max_total)
            .map(|n| {
                let off = sector_offset(n);
                csum(self.probs[off..off + n + 1].iter().copied())
            })
            .collect()
    }

    /// Iterate `(n1, n2, p)` over the triangle `n1 + n2 <= max_total`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.max_total).flat_map(move |n| {
            let off = sector_offset(n);
            (0..=n).map(move |i| (i, n - i, self.probs[off + i]))
        })
    }

    /// Normalized raw moment `<M^k>` of `M = n1 - n2`.
    pub fn m_moment(&self, k: i32) -> f64 {
        let num = csum(self.iter().map(|(a, b, p)| p * (a as f64 - b as f64).powi(k)));
        num / self.total()
    }
}

/// First two moments of the photon-number difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MStatistics {
    pub mean: f64,
    pub mean_sq: f64,
    pub var: f64,
}

/// One full gyro pass: forward splitter, phase, inverse splitter, counting.
pub fn gyro_pass(probe: &TwoModeState, params: &ChannelParams) -> Result<PhotonStatistics> {
    let out = output_states(probe, std::slice::from_ref(params))?;
    Ok(PhotonStatistics::from_output(&out[0], *params))
}

pub fn m_statistics(stats: &PhotonStatistics) -> MStatistics {
    let mean = stats.m_moment(1);
    let mean_sq = stats.m_moment(2);
    MStatistics {
        mean,
        mean_sq,
        var: mean_sq - mean * mean,
    }
}

/// `M psi` for `M = a+^dag a- + a-^dag a+` on one counter-propagating sector.
fn apply_m_inner(src: &[Complex64], dst: &mut Vec<Complex64>) {
    let n = src.len() - 1;
    dst.clear();
    dst.extend((0..=n).map(|k| {
        let mut acc = Complex64::new(0.0, 0.0);
        // a+^dag a-: (k-1, n-k+1) -> (k, n-k)
        if k > 0 {
            acc += ((k * (n - k + 1)) as f64).sqrt() * src[k - 1];
        }
        // a-^dag a+: (k+1, n-k-1) -> (k, n-k)
        if k < n {
            acc += (((k + 1) * (n - k)) as f64).sqrt() * src[k + 1];
        }
        acc
    }));
}

/// Normalized `<M^k>` for `k = 1..=4`, evaluated directly in the
/// counter-propagating basis after the phase (the output splitter maps the
/// detected difference `n1 - n2` onto `a+^dag a- + a-^dag a+`).
pub fn m_moments_inner(state: &TwoModeState) -> Result<[f64; 4]> {
    require_basis(state, Basis::Inner)?;
    let mut acc = [NeumaierSum::new(); 4];
    let mut m1 = Vec::new();
    let mut m2 = Vec::new();
    for (n, s) in (0..=state.max_total()).map(|n| (n, state.sector(n))) {
        if n == 0 || s.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            continue;
        }
        apply_m_inner(s, &mut m1);
        apply_m_inner(&m1, &mut m2);
        let dot = |a: &[Complex64], b: &[Complex64]| csum(a.iter().zip(b).map(|(x, y)| (x.conj() * y).re));
        acc[0] += dot(s, &m1);
        acc[1] += dot(&m1, &m1);
        acc[2] += dot(&m1, &m2);
        acc[3] += dot(&m2, &m2);
    }
    let z = state.norm();
    Ok(acc.map(|a| a.value() / z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::product_state;

    fn fock(n: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); n + 1];
        v[n] = Complex64::new(1.0, 0.0);
        v
    }

    fn pair(n1: usize, n2: usize) -> TwoModeState {
        product_state(&fock(n1), &fock(n2)).unwrap()
    }

    fn unit(v: Vec<Complex64>) -> Vec<Complex64> {
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|c| c / n).collect()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn rotation_columns_orthonormal_at_large_n() {
        let mut rot = SectorRotations::new();
        for _ in 0..400 {
            rot.advance();
        }
        let w = rot.matrix();
        let dim = 401;
        let mut worst: f64 = 0.0;
        for a in (0..dim).step_by(37) {
            for b in (0..dim).step_by(41) {
                let dot: f64 = (0..dim).map(|k| w[k * dim + a] * w[k * dim + b]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn single_photon_forward() {
        let s = apply_beam_splitter(&pair(1, 0), BeamSplitterSense::Forward).unwrap();
        assert_eq!(s.basis(), Basis::Inner);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(s.amplitude(1, 0), Complex64::new(h, 0.0), 1e-15));
        assert!(close(s.amplitude(0, 1), Complex64::new(h, 0.0), 1e-15));
        let s = apply_beam_splitter(&pair(0, 1), BeamSplitterSense::Forward).unwrap();
        assert!(close(s.amplitude(1, 0), Complex64::new(0.0, -h), 1e-15));
        assert!(close(s.amplitude(0, 1), Complex64::new(0.0, h), 1e-15));
    }

    #[test]
    fn hong_ou_mandel_null() {
        let s = apply_beam_splitter(&pair(1, 1), BeamSplitterSense::Forward).unwrap();
        assert!(s.amplitude(1, 1).norm() < 1e-15);
        assert!((s.amplitude(2, 0).norm_sqr() - 0.5).abs() < 1e-15);
        assert!((s.amplitude(0, 2).norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn forward_then_inverse_is_identity() {
        let v1: Vec<Complex64> = (0..6).map(|k| Complex64::new(0.3 / (k + 1) as f64, 0.05 * k as f64)).collect();
        let v2: Vec<Complex64> = (0..4).map(|k| Complex64::new(0.2, -0.1 * k as f64)).collect();
        let s = product_state(&unit(v1), &unit(v2)).unwrap();
        let f = apply_beam_splitter(&s, BeamSplitterSense::Forward).unwrap();
        let b = apply_beam_splitter(&f, BeamSplitterSense::Inverse).unwrap();
        for n1 in 0..=5 {
            for n2 in 0..=3 {
                assert!(close(b.amplitude(n1, n2), s.amplitude(n1, n2), 1e-12));
            }
        }
        assert!((f.norm() - s.norm()).abs() < 1e-12);
    }

    #[test]
    fn basis_guard() {
        let err = apply_beam_splitter(&pair(1, 0), BeamSplitterSense::Inverse).unwrap_err();
        assert!(matches!(err, GyroError::WrongBasis { .. }));
        assert!(apply_gyro_phase(&pair(1, 0), &ChannelParams::new(0.1, 0.0)).is_err());
    }

    #[test]
    fn gyro_phase_action() {
        // (n+, n-) = (2, 1) basis state, built directly in the inner basis
        let mut amps = vec![Complex64::new(0.0, 0.0); sector_offset(4)];
        amps[sector_offset(3) + 2] = Complex64::new(1.0, 0.0);
        let s = TwoModeState::from_sectors(Basis::Inner, 3, 1e-10, amps);
        let out = apply_gyro_phase(&s, &ChannelParams::new(0.1, 0.0)).unwrap();
        assert!(close(out.amplitude(2, 1), Complex64::from_polar(1.0, -0.3), 1e-15));
        let same = apply_gyro_phase(&s, &ChannelParams::new(0.0, 0.0)).unwrap();
        assert_eq!(same, s);
    }

    #[test]
    fn single_photon_pass() {
        for &phi in &[0.0, 0.1, 0.37, 1.2] {
            let st = gyro_pass(&pair(1, 0), &ChannelParams::new(phi, 0.0)).unwrap();
            assert!((st.p(1, 0) - phi.cos().powi(2)).abs() < 1e-14);
            assert!((st.p(0, 1) - phi.sin().powi(2)).abs() < 1e-14);
            let m = m_statistics(&st);
            assert!((m.mean - (2.0 * phi).cos()).abs() < 1e-14);
        }
        // bias convention: <M> = cos(2 phi N + phi0) for N = 1
        let st = gyro_pass(&pair(1, 0), &ChannelParams::new(0.1, -0.4)).unwrap();
        assert!((m_statistics(&st).mean - (0.2f64 - 0.4).cos()).abs() < 1e-14);
    }

    #[test]
    fn zero_phase_pass_is_identity_on_statistics() {
        let st = gyro_pass(&pair(2, 1), &ChannelParams::new(0.0, 0.0)).unwrap();
        assert!((st.p(2, 1) - 1.0).abs() < 1e-14);
        let st = gyro_pass(&pair(3, 3), &ChannelParams::new(0.0, 0.0)).unwrap();
        let m = m_statistics(&st);
        assert!(m.mean.abs() < 1e-13 && m.mean_sq.abs() < 1e-13);
    }

    #[test]
    fn inner_moments_match_statistics() {
        let v1: Vec<Complex64> = (0..8).map(|k| Complex64::new(0.3 / (k + 1) as f64, 0.0)).collect();
        let v2: Vec<Complex64> = (0..5).map(|k| Complex64::new(0.25 * (k % 2) as f64 + 0.1, 0.0)).collect();
        let (v1, v2) = (unit(v1), unit(v2));
        let s = product_state(&v1, &v2).unwrap();
        let p = ChannelParams::new(0.07, -0.9);
        let st = gyro_pass(&s, &p).unwrap();
        let inner = inner_states(&s, &[p]).unwrap();
        let mk = m_moments_inner(&inner[0]).unwrap();
        for k in 1..=4 {
            let direct = st.m_moment(k);
            assert!((mk[k as usize - 1] - direct).abs() < 1e-11 * direct.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn bias_periodicity() {
        let v1: Vec<Complex64> = (0..6).map(|k| Complex64::new(0.4 / (k + 1) as f64, 0.0)).collect();
        let s = product_state(&unit(v1), &fock(2)).unwrap();
        let a = gyro_pass(&s, &ChannelParams::new(0.03, 0.5)).unwrap();
        let b = gyro_pass(&s, &ChannelParams::new(0.03, 0.5 + 2.0 * std::f64::consts::PI)).unwrap();
        for ((_, _, pa), (_, _, pb)) in a.iter().zip(b.iter()) {
            assert!((pa - pb).abs() < 1e-12);
        }
    }
}
