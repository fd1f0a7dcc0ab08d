//! The sector-wise channel against dense matrix exponentials and closed forms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlgyro::analytic::{coherent_moments_complex, counter_propagating_amplitudes};
use nlgyro::channel::{gyro_pass, inner_states, m_statistics, ChannelParams};
use nlgyro::fock::TwoModeState;
use nlgyro::probes::{build_probe, ProbeSpec};

type Mat = Vec<Vec<Complex64>>;

fn zeros(d: usize) -> Mat {
    vec![vec![Complex64::new(0.0, 0.0); d]; d]
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut c = zeros(d);
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// `exp(A)` by scaling and squaring of a 30-term Taylor series.
fn expm(a: &Mat) -> Mat {
    let d = a.len();
    let norm: f64 = a.iter().flatten().map(|z| z.norm()).sum();
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scale = 0.5f64.powi(squarings as i32);
    let scaled: Mat = a.iter().map(|r| r.iter().map(|z| z * scale).collect()).collect();
    let mut result = zeros(d);
    let mut term = zeros(d);
    for i in 0..d {
        result[i][i] = Complex64::new(1.0, 0.0);
        term[i][i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..30 {
        term = matmul(&term, &scaled);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..d {
            for j in 0..d {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// `G_L = i(a2^dag a1 - a1^dag a2)` on the sector `|n1, n - n1>`, indexed by `n1`.
fn linear_generator(n: usize) -> Mat {
    let mut g = zeros(n + 1);
    for n1 in 1..=n {
        // a2^dag a1 |n1, n2> = sqrt(n1 (n2 + 1)) |n1 - 1, n2 + 1>
        let amp = ((n1 * (n - n1 + 1)) as f64).sqrt();
        g[n1 - 1][n1] = Complex64::new(0.0, amp);
        g[n1][n1 - 1] = Complex64::new(0.0, -amp);
    }
    g
}

/// Full-pass output distribution from `exp(-i (phi n + phi0/2) G_L)` per sector.
fn dense_output(sectors: &[Vec<Complex64>], phi: f64, phi0: f64) -> Vec<Vec<f64>> {
    sectors
        .iter()
        .enumerate()
        .map(|(n, psi)| {
            let theta = phi * n as f64 + phi0 / 2.0;
            let gen: Mat = linear_generator(n)
                .into_iter()
                .map(|r| r.into_iter().map(|z| z * Complex64::new(0.0, -theta)).collect())
                .collect();
            let u = expm(&gen);
            (0..=n)
                .map(|i| (0..=n).map(|j| u[i][j] * psi[j]).sum::<Complex64>().norm_sqr())
                .collect()
        })
        .collect()
}

fn random_sectors(rng: &mut ChaCha8Rng, nmax: usize) -> Vec<Vec<Complex64>> {
    let mut sectors: Vec<Vec<Complex64>> = (0..=nmax)
        .map(|n| {
            (0..=n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let norm: f64 = sectors.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in sectors.iter_mut().flatten() {
        *z /= norm;
    }
    sectors
}

fn to_state(sectors: &[Vec<Complex64>]) -> TwoModeState {
    let nmax = sectors.len() - 1;
    let mut grid = vec![vec![Complex64::new(0.0, 0.0); nmax + 1]; nmax + 1];
    for (n, s) in sectors.iter().enumerate() {
        for (n1, z) in s.iter().enumerate() {
            grid[n1][n - n1] = *z;
        }
    }
    TwoModeState::from_grid(&grid).unwrap().with_tail_tol(1.0)
}

#[test]
fn full_pass_matches_dense_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..8 {
        let sectors = random_sectors(&mut rng, 6);
        let state = to_state(&sectors);
        let phi = rng.gen_range(-0.5..0.5);
        let phi0 = rng.gen_range(-3.0..3.0);
        let expect = dense_output(&sectors, phi, phi0);
        let stats = gyro_pass(&state, &ChannelParams::new(phi, phi0)).unwrap();
        for (n, row) in expect.iter().enumerate() {
            for (n1, p) in row.iter().enumerate() {
                let got = stats.p(n1, n - n1);
                assert!((got - p).abs() < 1e-13, "trial {trial}: p({n1},{}) = {got} vs {p}", n - n1);
            }
        }
    }
}

#[test]
fn single_photon_fringe() {
    let probe = build_probe(&ProbeSpec::NumberPair { n1: 1, n2: 0 }, 1e-12).unwrap();
    for phi in [0.0, 0.1, 0.7, 1.3] {
        let stats = gyro_pass(&probe, &ChannelParams::new(phi, 0.0)).unwrap();
        assert!((stats.p(1, 0) - phi.cos().powi(2)).abs() < 1e-14);
        assert!((stats.p(0, 1) - phi.sin().powi(2)).abs() < 1e-14);
        let m = m_statistics(&stats);
        assert!((m.mean - (2.0 * phi).cos()).abs() < 1e-14);
    }
}

#[test]
fn hong_ou_mandel_dip_inside_loop() {
    let probe = build_probe(&ProbeSpec::NumberPair { n1: 1, n2: 1 }, 1e-12).unwrap();
    let inner = &inner_states(&probe, &[ChannelParams::new(0.0, 0.0)]).unwrap()[0];
    assert!(inner.amplitude(1, 1).norm() < 1e-15);
    assert!((inner.amplitude(2, 0).norm_sqr() - 0.5).abs() < 1e-14);
    assert!((inner.amplitude(0, 2).norm_sqr() - 0.5).abs() < 1e-14);
}

#[test]
fn identity_channel_returns_input() {
    let probe = build_probe(&ProbeSpec::NumberPair { n1: 3, n2: 2 }, 1e-12).unwrap();
    let stats = gyro_pass(&probe, &ChannelParams::new(0.0, 0.0)).unwrap();
    assert!((stats.p(3, 2) - 1.0).abs() < 1e-13);
}

#[test]
fn complex_coherent_moments_fix_relative_phase_sign() {
    let a1 = Complex64::new(1.3, 0.4);
    let a2 = Complex64::new(0.7, -0.9);
    let probe = build_probe(&ProbeSpec::CoherentPair { alpha1: a1, alpha2: a2 }, 1e-13).unwrap();
    let (ap, am) = counter_propagating_amplitudes(a1, a2);
    for (phi, phi0) in [(0.0, 0.0), (0.02, 0.5), (0.05, -1.2)] {
        let m = m_statistics(&gyro_pass(&probe, &ChannelParams::new(phi, phi0)).unwrap());
        let exact = coherent_moments_complex(ap, am, phi, phi0);
        assert!((m.mean - exact.mean).abs() < 1e-9, "phi={phi} phi0={phi0}: {} vs {}", m.mean, exact.mean);
        assert!((m.mean_sq - exact.mean_sq).abs() < 1e-9 * exact.mean_sq);
    }
}
