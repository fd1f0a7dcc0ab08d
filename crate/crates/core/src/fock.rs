//! Pure two-mode states on a truncated photon-number basis.
//!
//! Every operation in this crate conserves the total photon number `N = N1 + N2`,
//! so amplitudes are stored sector by sector: sector `n` holds the `n + 1`
//! amplitudes with first-mode count `i = 0..=n` and second-mode count `n - i`.
//! A rectangular grid `n1 <= cutoff1, n2 <= cutoff2` is a sub-pattern of this
//! layout (entries outside the rectangle are zero).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GyroError, Result};
use crate::sum::{csum, NeumaierSum};

/// Default truncation tolerance for built states.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Slack allowed above unit norm.
pub const NORM_SLACK: f64 = 1e-12;

/// Which pair of modes the photon-number indices refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Basis {
    /// Input ports `a1`, `a2`.
    Input,
    /// Counter-propagating fiber modes `a+`, `a-`.
    Inner,
    /// Detected output ports.
    Output,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Input => "input",
            Basis::Inner => "counter-propagating",
            Basis::Output => "output",
        }
    }
}

#[inline]
pub(crate) fn sector_offset(n: usize) -> usize {
    n * (n + 1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    basis: Basis,
    cutoff1: usize,
    cutoff2: usize,
    max_total: usize,
    tail_tol: f64,
    amps: Vec<Complex64>,
}

/// Mean and variance of the nonlinear generator `G = N+^2 - N-^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GMoments {
    pub mean: f64,
    pub var: f64,
}

impl GMoments {
    /// Quantum Fisher information `4 Var(G)` of a pure state.
    pub fn qfi(&self) -> f64 {
        4.0 * self.var
    }
}

/// Assemble `|psi1> (x) |psi2>` in the input modes.
pub fn product_state(v1: &[Complex64], v2: &[Complex64]) -> Result<TwoModeState> {
    if v1.is_empty() || v2.is_empty() {
        return Err(GyroError::EmptyVector);
    }
    for v in [v1, v2] {
        let norm = csum(v.iter().map(|c| c.norm_sqr()));
        if norm > 1.0 + NORM_SLACK {
            return Err(GyroError::NormExceeded { norm });
        }
    }
    let cutoff1 = v1.len() - 1;
    let cutoff2 = v2.len() - 1;
    let max_total = cutoff1 + cutoff2;
    let mut amps = vec![Complex64::new(0.0, 0.0); sector_offset(max_total + 1)];
    for (n1, a) in v1.iter().enumerate() {
        for (n2, b) in v2.iter().enumerate() {
            amps[sector_offset(n1 + n2) + n1] = a * b;
        }
    }
    Ok(TwoModeState {
        basis: Basis::Input,
        cutoff1,
        cutoff2,
        max_total,
        tail_tol: DEFAULT_TAIL_TOL,
        amps,
    })
}

impl TwoModeState {
    /// Build a state directly from sector-major amplitudes.
    pub(crate) fn from_sectors(
        basis: Basis,
        max_total: usize,
        tail_tol: f64,
        amps: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(amps.len(), sector_offset(max_total + 1));
        TwoModeState {
            basis,
            cutoff1: max_total,
            cutoff2: max_total,
            max_total,
            tail_tol,
            amps,
        }
    }

    /// Dense amplitude grid `(cutoff1 + 1) x (cutoff2 + 1)` in the input modes.
    pub fn from_grid(grid: &[Vec<Complex64>]) -> Result<TwoModeState> {
        let rows = grid.len();
        if rows == 0 || grid[0].is_empty() {
            return Err(GyroError::EmptyVector);
        }
        let cols = grid[0].len();
        if grid.iter().any(|r| r.len() != cols) {
            return Err(GyroError::Dimension("ragged amplitude grid".into()));
        }
        let (cutoff1, cutoff2) = (rows - 1, cols - 1);
        let max_total = cutoff1 + cutoff2;
        let mut amps = vec![Complex64::new(0.0, 0.0); sector_offset(max_total + 1)];
        for (n1, row) in grid.iter().enumerate() {
            for (n2, c) in row.iter().enumerate() {
                amps[sector_offset(n1 + n2) + n1] = *c;
            }
        }
        let state = TwoModeState {
            basis: Basis::Input,
            cutoff1,
            cutoff2,
            max_total,
            tail_tol: DEFAULT_TAIL_TOL,
            amps,
        };
        let norm = state.norm();
        if norm > 1.0 + NORM_SLACK {
            return Err(GyroError::NormExceeded { norm });
        }
        Ok(state)
    }

    pub fn with_tail_tol(mut self, tol: f64) -> Self {
        self.tail_tol = tol;
        self
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn cutoff1(&self) -> usize {
        self.cutoff1
    }

    pub fn cutoff2(&self) -> usize {
        self.cutoff2
    }

    /// Largest total photon number representable.
    pub fn max_total(&self) -> usize {
        self.max_total
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Amplitudes of total photon number `n`, indexed by the first-mode count.
    pub fn sector(&self, n: usize) -> &[Complex64] {
        let off = sector_offset(n);
        &self.amps[off..off + n + 1]
    }

    pub(crate) fn sectors(&self) -> impl Iterator<Item = (usize, &[Complex64])> {
        (0..=self.max_total).map(move |n| (n, self.sector(n)))
    }

    pub(crate) fn raw(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitude `<n1, n2|psi>`; zero outside the truncated grid.
    pub fn amplitude(&self, n1: usize, n2: usize) -> Complex64 {
        if n1 > self.cutoff1 || n2 > self.cutoff2 || n1 + n2 > self.max_total {
            return Complex64::new(0.0, 0.0);
        }
        self.amps[sector_offset(n1 + n2) + n1]
    }

    /// Dense grid view, rows `n1`, columns `n2`.
    pub fn to_grid(&self) -> Vec<Vec<Complex64>> {
        (0..=self.cutoff1)
            .map(|n1| (0..=self.cutoff2).map(|n2| self.amplitude(n1, n2)).collect())
            .collect()
    }

    pub fn norm(&self) -> f64 {
        csum(self.amps.iter().map(|c| c.norm_sqr()))
    }

    /// Probability mass lost to truncation, `1 - sum |c|^2` (never negative).
    pub fn truncation_loss(&self) -> f64 {
        (1.0 - self.norm()).max(0.0)
    }

    /// Error when more than `tail_tol` of the norm was discarded.
    pub fn check_tail(&self) -> Result<()> {
        let lost = self.truncation_loss();
        if lost > self.tail_tol {
            return Err(GyroError::TailMass {
                lost,
                tol: self.tail_tol,
            });
        }
        Ok(())
    }

    /// Distribution of the total photon number.
    pub fn total_number_distribution(&self) -> Vec<f64> {
        self.sectors()
            .map(|(_, s)| csum(s.iter().map(|c| c.norm_sqr())))
            .collect()
    }

    /// Largest imaginary part over all amplitudes.
    pub fn max_imag(&self) -> f64 {
        self.amps.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// `<W>` for a weight function diagonal in the current basis, normalized by the norm.
    pub fn expectation_diagonal<F>(&self, weight: F) -> f64
    where
        F: Fn(usize, usize) -> f64,
    {
        let mut num = NeumaierSum::new();
        let mut den = NeumaierSum::new();
        for (n, s) in self.sectors() {
            for (i, c) in s.iter().enumerate() {
                let p = c.norm_sqr();
                if p != 0.0 {
                    num += p * weight(i, n - i);
                    den += p;
                }
            }
        }
        num.value() / den.value()
    }

    /// `<W>` for a tabulated diagonal observable with rows `n1` and columns `n2`.
    pub fn expectation_table(&self, table: &[Vec<f64>]) -> Result<f64> {
        if table.len() != self.cutoff1 + 1 || table.iter().any(|r| r.len() != self.cutoff2 + 1) {
            return Err(GyroError::Dimension(format!(
                "observable table must be {}x{}",
                self.cutoff1 + 1,
                self.cutoff2 + 1
            )));
        }
        Ok(self.expectation_diagonal(|n1, n2| table[n1][n2]))
    }

    /// `<psi|O|psi> / <psi|psi>` for a normal-ordered ladder-operator polynomial.
    pub fn expectation_operator(&self, op: &Operator) -> Complex64 {
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        for term in &op.terms {
            for (n, s) in self.sectors() {
                for (i, c) in s.iter().enumerate() {
                    if c.norm_sqr() == 0.0 {
                        continue;
                    }
                    if let Some((m1, m2, w)) = term.act(i, n - i) {
                        let bra = self.amplitude(m1, m2);
                        let v = bra.conj() * c * w * term.coeff;
                        re += v.re;
                        im += v.im;
                    }
                }
            }
        }
        Complex64::new(re.value(), im.value()) / self.norm()
    }

    /// `(G_L psi)` restricted to sector `n`, where `G_L = i(a2^dag a1 - a1^dag a2)`.
    pub(crate) fn apply_linear_generator(sector: &[Complex64], out: &mut Vec<Complex64>) {
        let n = sector.len() - 1;
        out.clear();
        out.extend((0..=n).map(|i| {
            // a2^dag a1 moves (i+1, n-i-1) -> (i, n-i); a1^dag a2 moves (i-1, n-i+1) -> (i, n-i)
            let up = if i < n {
                (((i + 1) * (n - i)) as f64).sqrt() * sector[i + 1]
            } else {
                Complex64::new(0.0, 0.0)
            };
            let down = if i > 0 {
                ((i * (n - i + 1)) as f64).sqrt() * sector[i - 1]
            } else {
                Complex64::new(0.0, 0.0)
            };
            Complex64::i() * (up - down)
        }));
    }

    /// Normalized sums `sum_n w(n) <psi_n|G_L|psi_n>` and `sum_n w(n) ||G_L psi_n||^2`
    /// for each weight power `n^p`, `p = 0..=2`.
    pub(crate) fn linear_generator_sums(&self) -> ([f64; 3], [f64; 3]) {
        let mut first = [NeumaierSum::new(); 3];
        let mut second = [NeumaierSum::new(); 3];
        let mut buf = Vec::new();
        for (n, s) in self.sectors() {
            if n == 0 || s.iter().all(|c| c.norm_sqr() == 0.0) {
                continue;
            }
            Self::apply_linear_generator(s, &mut buf);
            let mean = csum(s.iter().zip(&buf).map(|(a, b)| (a.conj() * b).re));
            let sq = csum(buf.iter().map(|b| b.norm_sqr()));
            let nf = n as f64;
            for p in 0..3 {
                let w = nf.powi(p as i32);
                first[p] += w * mean;
                second[p] += w * sq;
            }
        }
        let z = self.norm();
        (
            first.map(|s| s.value() / z),
            second.map(|s| s.value() / z),
        )
    }
}

/// Exact `<G>` and `Var(G)` for `G = N+^2 - N-^2`.
///
/// In the input basis this uses `G = N * i(a2^dag a1 - a1^dag a2)`; in the
/// counter-propagating basis `G` is diagonal with eigenvalue `n+^2 - n-^2`.
pub fn g_moments(state: &TwoModeState) -> Result<GMoments> {
    state.check_tail()?;
    match state.basis {
        Basis::Input => {
            let (first, second) = state.linear_generator_sums();
            let mean = first[1];
            let var = (second[2] - mean * mean).max(0.0);
            Ok(GMoments { mean, var })
        }
        Basis::Inner => {
            let g = |k: usize, m: usize| (k * k) as f64 - (m * m) as f64;
            let mean = state.expectation_diagonal(g);
            let second = state.expectation_diagonal(|k, m| g(k, m).powi(2));
            Ok(GMoments {
                mean,
                var: (second - mean * mean).max(0.0),
            })
        }
        Basis::Output => Err(GyroError::WrongBasis {
            expected: "input or counter-propagating",
            found: Basis::Output.name(),
        }),
    }
}

/// `<O>` dispatching on the observable kind.
pub fn expectation_observable(state: &TwoModeState, observable: &Observable<'_>) -> Result<Complex64> {
    match observable {
        Observable::Diagonal(f) => Ok(Complex64::new(state.expectation_diagonal(f), 0.0)),
        Observable::Table(t) => state.expectation_table(t).map(|v| Complex64::new(v, 0.0)),
        Observable::Operator(op) => Ok(state.expectation_operator(op)),
    }
}

pub enum Observable<'a> {
    Diagonal(&'a dyn Fn(usize, usize) -> f64),
    Table(&'a [Vec<f64>]),
    Operator(&'a Operator),
}

/// One normal-ordered monomial `coeff * a1^dag^p1 a1^q1 a2^dag^p2 a2^q2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderTerm {
    pub coeff: Complex64,
    pub create1: u32,
    pub annihilate1: u32,
    pub create2: u32,
    pub annihilate2: u32,
}

impl LadderTerm {
    pub fn new(coeff: Complex64, create1: u32, annihilate1: u32, create2: u32, annihilate2: u32) -> Self {
        LadderTerm {
            coeff,
            create1,
            annihilate1,
            create2,
            annihilate2,
        }
    }

    /// Image of `|n1, n2>`: target indices and the matrix-element weight (without `coeff`).
    fn act(&self, n1: usize, n2: usize) -> Option<(usize, usize, f64)> {
        let (q1, p1) = (self.annihilate1 as usize, self.create1 as usize);
        let (q2, p2) = (self.annihilate2 as usize, self.create2 as usize);
        if n1 < q1 || n2 < q2 {
            return None;
        }
        let mut w = 1.0;
        let mut m1 = n1;
        for _ in 0..q1 {
            w *= (m1 as f64).sqrt();
            m1 -= 1;
        }
        for _ in 0..p1 {
            m1 += 1;
            w *= (m1 as f64).sqrt();
        }
        let mut m2 = n2;
        for _ in 0..q2 {
            w *= (m2 as f64).sqrt();
            m2 -= 1;
        }
        for _ in 0..p2 {
            m2 += 1;
            w *= (m2 as f64).sqrt();
        }
        Some((m1, m2, w))
    }
}

/// Sum of normal-ordered monomials.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Operator {
    pub terms: Vec<LadderTerm>,
}

impl Operator {
    pub fn new(terms: Vec<LadderTerm>) -> Self {
        Operator { terms }
    }

    pub fn number1() -> Self {
        Operator::new(vec![LadderTerm::new(Complex64::new(1.0, 0.0), 1, 1, 0, 0)])
    }

    pub fn number2() -> Self {
        Operator::new(vec![LadderTerm::new(Complex64::new(1.0, 0.0), 0, 0, 1, 1)])
    }

    /// `G_L = i(a2^dag a1 - a1^dag a2)`.
    pub fn linear_generator() -> Self {
        let i = Complex64::i();
        Operator::new(vec![
            LadderTerm::new(i, 0, 1, 1, 0),
            LadderTerm::new(-i, 1, 0, 0, 1),
        ])
    }
}
