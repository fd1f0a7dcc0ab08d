//! Parameter sweeps, resource-split optimization, scaling fits and reports.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    coherent_delta2phi, inverse_diagonal, number_state_model, squeezed_qfi_surrogate, squeezed_simple_model,
    squeezed_surrogate_matrix, twin_m2_delta2phi, ValidityFlags,
};
use crate::channel::ChannelParams;
use crate::error::{GyroError, Result};
use crate::estimators::{
    error_propagation_delta_phi, fisher_information, m2_error_propagation, multiparam_fisher, EstimatorConfig,
};
use crate::fock::{g_moments, TwoModeState};
use crate::noise::{mc_noise_oracle, noisy_delta2phi, noisy_m_variance, NoiseParams, NoisyProbe};
use crate::probes::{build_probe_with_plan, plan_cutoffs, CutoffPlan, ProbeSpec, SqueezeAxis};

pub const SCHEMA_VERSION: u32 = 1;

/// Photon budget split between the two input modes; `fraction` is the share of mode 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeFamily {
    /// `|sqrt((1-f) N)> |sqrt(f N)>`
    Coherent,
    /// Coherent `sqrt((1-f) N)` and squeezed vacuum with `sinh^2 r = f N`.
    Squeezed,
    /// `|N - round(f N), round(f N)>`
    Number,
}

impl ProbeFamily {
    pub fn probe(self, n_bar: f64, fraction: f64, axis: SqueezeAxis) -> Result<ProbeSpec> {
        if !(n_bar >= 0.0 && n_bar.is_finite()) {
            return Err(GyroError::InvalidParameter(format!("N_bar must be >= 0, got {n_bar}")));
        }
        if !(0.0..=1.0).contains(&fraction) {
            return Err(GyroError::InvalidParameter(format!("fraction must lie in [0, 1], got {fraction}")));
        }
        Ok(match self {
            ProbeFamily::Coherent => ProbeSpec::coherent_split(n_bar, fraction),
            ProbeFamily::Squeezed => ProbeSpec::squeezed_split(n_bar, fraction, axis),
            ProbeFamily::Number => {
                if n_bar.fract() != 0.0 {
                    return Err(GyroError::InvalidParameter(format!("number probes need integer N_bar, got {n_bar}")));
                }
                ProbeSpec::number_split(n_bar as usize, fraction)
            }
        })
    }
}

impl FromStr for ProbeFamily {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" => Ok(ProbeFamily::Coherent),
            "squeezed" => Ok(ProbeFamily::Squeezed),
            "number" => Ok(ProbeFamily::Number),
            other => Err(GyroError::Config(format!("unknown probe family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    M,
    M2,
    Fisher,
    Qfi,
    Multiparam,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::M,
        EstimatorKind::M2,
        EstimatorKind::Fisher,
        EstimatorKind::Qfi,
        EstimatorKind::Multiparam,
    ];
}

impl FromStr for EstimatorKind {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" | "M" => Ok(EstimatorKind::M),
            "m2" | "M2" => Ok(EstimatorKind::M2),
            "fisher" => Ok(EstimatorKind::Fisher),
            "qfi" => Ok(EstimatorKind::Qfi),
            "multiparam" => Ok(EstimatorKind::Multiparam),
            other => Err(GyroError::Config(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_tail_tol() -> f64 {
    1e-10
}

fn default_fd_step() -> f64 {
    EstimatorConfig::default().fd_step
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tail_tol: default_tail_tol(),
            fd_step: default_fd_step(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

/// Noise section of a sweep: degraded asymptotes per `N_bar` plus a Monte Carlo cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSweep {
    pub eta: f64,
    #[serde(default)]
    pub thermal_photons: f64,
    #[serde(default)]
    pub phase_var: f64,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

impl NoiseSweep {
    pub fn params(&self) -> NoiseParams {
        NoiseParams {
            eta: self.eta,
            thermal_photons: self.thermal_photons,
            phase_var: self.phase_var,
        }
    }
}

fn default_mc_samples() -> usize {
    100_000
}

fn default_estimators() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}

fn default_budget() -> usize {
    50_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub probe: ProbeFamily,
    #[serde(default = "default_axis")]
    pub axis: SqueezeAxis,
    pub n_bar: Vec<f64>,
    pub fraction: Vec<f64>,
    pub phi: Vec<f64>,
    #[serde(default)]
    pub phi0: f64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub noise: Option<NoiseSweep>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub seed: u64,
    /// Upper bound on stored amplitudes summed over the finite-difference stencil.
    #[serde(default = "default_budget")]
    pub amplitude_budget: usize,
}

fn default_axis() -> SqueezeAxis {
    SqueezeAxis::ReduceX
}

impl SweepConfig {
    /// A single-point config with every estimator switched on.
    pub fn single(probe: ProbeFamily, n_bar: f64, fraction: f64, phi: f64, phi0: f64) -> Self {
        SweepConfig {
            probe,
            axis: default_axis(),
            n_bar: vec![n_bar],
            fraction: vec![fraction],
            phi: vec![phi],
            phi0,
            estimators: default_estimators(),
            noise: None,
            tolerances: Tolerances::default(),
            output: OutputPaths::default(),
            seed: 0,
            amplitude_budget: default_budget(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(s).map_err(|e| GyroError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GyroError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| GyroError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("n_bar", &self.n_bar), ("fraction", &self.fraction), ("phi", &self.phi)] {
            if grid.is_empty() {
                return Err(GyroError::Config(format!("grid '{name}' is empty")));
            }
            if grid.iter().any(|v| !v.is_finite()) {
                return Err(GyroError::Config(format!("grid '{name}' has non-finite values")));
            }
        }
        if self.estimators.is_empty() {
            return Err(GyroError::Config("no estimators selected".into()));
        }
        if !self.phi0.is_finite() {
            return Err(GyroError::Config("phi0 must be finite".into()));
        }
        if !(self.tolerances.tail_tol > 0.0 && self.tolerances.tail_tol < 1.0) {
            return Err(GyroError::Config(format!("tail_tol must lie in (0, 1), got {}", self.tolerances.tail_tol)));
        }
        self.estimator_config().validate()?;
        for &n in &self.n_bar {
            for &f in &self.fraction {
                self.probe.probe(n, f, self.axis)?.validate()?;
            }
        }
        if let Some(noise) = &self.noise {
            noise.params().validate()?;
        }
        Ok(())
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            fd_step: self.tolerances.fd_step,
            ..EstimatorConfig::default()
        }
    }

    fn wants(&self, kind: EstimatorKind) -> bool {
        self.estimators.contains(&kind)
    }

    /// Grid points in row order: `n_bar` outermost, then `fraction`, then `phi`.
    pub fn grid(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.n_bar.len() * self.fraction.len() * self.phi.len());
        for &n in &self.n_bar {
            for &f in &self.fraction {
                for &p in &self.phi {
                    out.push((n, f, p));
                }
            }
        }
        out
    }

    /// Refuse configurations whose truncated states would not fit the amplitude budget.
    pub fn check_budget(&self) -> Result<()> {
        let copies = if self.wants(EstimatorKind::Fisher) { 6 } else { 2 };
        for &n in &self.n_bar {
            for &f in &self.fraction {
                let spec = self.probe.probe(n, f, self.axis)?;
                let plan = plan_cutoffs(&spec, self.tolerances.tail_tol);
                let total = plan.cutoff1 + plan.cutoff2;
                let amps = (total + 1) * (total + 2) / 2 * copies;
                if amps > self.amplitude_budget {
                    return Err(GyroError::Config(format!(
                        "N_bar={n}, fraction={f} needs cutoffs ({}, {}) and ~{amps} amplitudes, above the budget of {}",
                        plan.cutoff1, plan.cutoff2, self.amplitude_budget
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One grid point. `None` numeric fields come with an entry in `reasons`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n_bar: f64,
    pub fraction: f64,
    pub phi: f64,
    pub phi0: f64,
    pub cutoff1: Option<usize>,
    pub cutoff2: Option<usize>,
    pub tail_mass: Option<f64>,
    pub d2phi_m: Option<f64>,
    pub d2phi_m2: Option<f64>,
    pub fisher: Option<f64>,
    pub qfi: Option<f64>,
    pub mp_bound_l: Option<f64>,
    pub mp_bound_nl: Option<f64>,
    pub analytic_d2phi: Option<f64>,
    /// Asymptotic assumptions that fail at this point.
    pub flags: Vec<String>,
    /// `field=reason` for every value that could not be computed.
    pub reasons: Vec<String>,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "N_bar",
    "fraction",
    "phi",
    "phi0",
    "cutoff1",
    "cutoff2",
    "tail_mass",
    "d2phi_M",
    "d2phi_M2",
    "fisher",
    "qfi",
    "mp_bound_L",
    "mp_bound_NL",
    "analytic_d2phi",
    "flags",
];

fn cell<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRow {
    fn empty(n_bar: f64, fraction: f64, phi: f64, phi0: f64) -> Self {
        SweepRow {
            n_bar,
            fraction,
            phi,
            phi0,
            cutoff1: None,
            cutoff2: None,
            tail_mass: None,
            d2phi_m: None,
            d2phi_m2: None,
            fisher: None,
            qfi: None,
            mp_bound_l: None,
            mp_bound_nl: None,
            analytic_d2phi: None,
            flags: Vec::new(),
            reasons: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.reasons.is_empty()
    }

    pub fn csv_record(&self) -> Vec<String> {
        let mut tags = self.flags.clone();
        tags.extend(self.reasons.iter().cloned());
        vec![
            self.n_bar.to_string(),
            self.fraction.to_string(),
            self.phi.to_string(),
            self.phi0.to_string(),
            cell(&self.cutoff1),
            cell(&self.cutoff2),
            cell(&self.tail_mass),
            cell(&self.d2phi_m),
            cell(&self.d2phi_m2),
            cell(&self.fisher),
            cell(&self.qfi),
            cell(&self.mp_bound_l),
            cell(&self.mp_bound_nl),
            cell(&self.analytic_d2phi),
            tags.join(";"),
        ]
    }

    pub fn get(&self, field: RowField) -> Option<f64> {
        match field {
            RowField::NBar => Some(self.n_bar),
            RowField::Fraction => Some(self.fraction),
            RowField::Phi => Some(self.phi),
            RowField::TailMass => self.tail_mass,
            RowField::D2PhiM => self.d2phi_m,
            RowField::D2PhiM2 => self.d2phi_m2,
            RowField::Fisher => self.fisher,
            RowField::Qfi => self.qfi,
            RowField::MpBoundL => self.mp_bound_l,
            RowField::MpBoundNl => self.mp_bound_nl,
            RowField::Analytic => self.analytic_d2phi,
        }
    }
}

/// Numeric columns usable in scaling fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowField {
    NBar,
    Fraction,
    Phi,
    TailMass,
    D2PhiM,
    D2PhiM2,
    Fisher,
    Qfi,
    MpBoundL,
    MpBoundNl,
    Analytic,
}

impl FromStr for RowField {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "N_bar" => RowField::NBar,
            "fraction" => RowField::Fraction,
            "phi" => RowField::Phi,
            "tail_mass" => RowField::TailMass,
            "d2phi_M" => RowField::D2PhiM,
            "d2phi_M2" => RowField::D2PhiM2,
            "fisher" => RowField::Fisher,
            "qfi" => RowField::Qfi,
            "mp_bound_L" => RowField::MpBoundL,
            "mp_bound_NL" => RowField::MpBoundNl,
            "analytic_d2phi" => RowField::Analytic,
            other => return Err(GyroError::Config(format!("unknown column '{other}'"))),
        })
    }
}

fn reason_code(e: &GyroError) -> &'static str {
    match e {
        GyroError::FlatResponse { .. } => "flat_response",
        GyroError::DerivativeUnstable { .. } => "derivative_unstable",
        GyroError::Unidentifiable { .. } => "unidentifiable",
        GyroError::OutOfRegime(_) => "out_of_regime",
        GyroError::TailMass { .. } | GyroError::CutoffTooSmall { .. } => "tail_mass",
        GyroError::InvalidParameter(_) => "invalid_parameter",
        _ => "error",
    }
}

fn record<T>(row: &mut SweepRow, field: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            row.reasons.push(format!("{field}={}", reason_code(&e)));
            None
        }
    }
}

/// Closed-form counterpart for the probe at this point, if one exists.
fn analytic_counterpart(spec: &ProbeSpec, phi: f64, phi0: f64) -> Result<Option<f64>> {
    match *spec {
        ProbeSpec::CoherentPair { alpha1, alpha2 } => {
            if alpha2.norm_sqr() == 0.0 && alpha1.im == 0.0 {
                coherent_delta2phi(alpha1.norm_sqr(), phi).map(|r| Some(r.predicted_delta2phi))
            } else {
                Ok(None)
            }
        }
        ProbeSpec::CoherentSqueezed { alpha, r, .. } => Ok(Some(squeezed_simple_model(alpha, r).delta2phi)),
        ProbeSpec::NumberPair { n1, n2 } if n1 == n2 => twin_m2_delta2phi(n1, phi, phi0).map(Some),
        ProbeSpec::NumberPair { n1, n2 } => Ok(number_state_model(n1, n2, phi, phi0)?.delta2phi_m),
    }
}

fn finite(v: f64, field: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GyroError::InvalidParameter(format!("{field} is not finite")))
    }
}

/// Evaluate one grid point with the estimators selected in `config`.
pub fn evaluate_point(config: &SweepConfig, n_bar: f64, fraction: f64, phi: f64) -> SweepRow {
    let phi0 = config.phi0;
    let mut row = SweepRow::empty(n_bar, fraction, phi, phi0);
    let spec = match config.probe.probe(n_bar, fraction, config.axis) {
        Ok(s) => s,
        Err(e) => {
            row.reasons.push(format!("probe={}", reason_code(&e)));
            return row;
        }
    };
    let tol = config.tolerances.tail_tol;
    let plan: CutoffPlan = plan_cutoffs(&spec, tol);
    let probe: TwoModeState = match build_probe_with_plan(&spec, &plan, tol) {
        Ok(p) => p,
        Err(e) => {
            row.reasons.push(format!("probe={}", reason_code(&e)));
            return row;
        }
    };
    row.cutoff1 = Some(probe.cutoff1());
    row.cutoff2 = Some(probe.cutoff2());
    let tail = probe.truncation_loss();
    row.tail_mass = Some(tail);
    if tail > tol {
        row.flags.push("tail_mass".into());
    }

    let params = ChannelParams::new(phi, phi0);
    let cfg = config.estimator_config();
    if config.wants(EstimatorKind::M) {
        let r = error_propagation_delta_phi(&probe, &params, &cfg).and_then(|e| finite(e.delta2phi, "d2phi_M"));
        row.d2phi_m = record(&mut row, "d2phi_M", r);
    }
    if config.wants(EstimatorKind::M2) {
        let r = m2_error_propagation(&probe, &params, &cfg).and_then(|e| finite(e.delta2phi, "d2phi_M2"));
        row.d2phi_m2 = record(&mut row, "d2phi_M2", r);
    }
    if config.wants(EstimatorKind::Fisher) {
        let r = fisher_information(&probe, &params, &cfg);
        if let Some(f) = record(&mut row, "fisher", r) {
            row.fisher = Some(f.fisher);
            row.qfi = Some(f.qfi);
        }
    } else if config.wants(EstimatorKind::Qfi) {
        let r = g_moments(&probe).map(|g| g.qfi());
        row.qfi = record(&mut row, "qfi", r);
    }
    if config.wants(EstimatorKind::Multiparam) {
        let r = multiparam_fisher(&probe);
        if let Some(m) = record(&mut row, "mp_bound", r) {
            row.mp_bound_l = Some(m.bound_linear);
            row.mp_bound_nl = Some(m.bound_nonlinear);
        }
    }
    match analytic_counterpart(&spec, phi, phi0) {
        Ok(v) => row.analytic_d2phi = v,
        Err(e) => row.flags.push(format!("analytic={}", reason_code(&e))),
    }
    let validity = ValidityFlags {
        visibility: n_bar.sqrt() * phi.abs() < 0.1,
        small_signal: (2.0 * n_bar * phi).cos() > std::f64::consts::FRAC_1_SQRT_2,
        large_n: n_bar >= 8.0,
    };
    row.flags.extend(validity.violations().into_iter().map(String::from));
    row
}

/// Evaluate the whole grid. Rows come back in grid order; failures are recorded per row.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    config.check_budget()?;
    Ok(config
        .grid()
        .into_par_iter()
        .map(|(n, f, p)| evaluate_point(config, n, f, p))
        .collect())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| GyroError::Io(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for row in rows {
        w.write_record(row.csv_record()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| GyroError::Io(e.to_string()))
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln y`.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(GyroError::Dimension(format!("{} x values vs {} y values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(GyroError::InvalidParameter(format!("need >= 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(GyroError::InvalidParameter("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(GyroError::InvalidParameter("x values are all equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(ScalingFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: lx.len(),
    })
}

/// Fit `y ~ x^slope` over rows where both columns are present.
pub fn fit_scaling(rows: &[SweepRow], x: RowField, y: RowField) -> Result<ScalingFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| Some((r.get(x)?, r.get(y)?))).unzip();
    fit_power_law(&xs, &ys)
}

/// Read back a CSV written by [`write_csv`] and fit two of its columns.
pub fn fit_csv(path: &Path, x: &str, y: &str) -> Result<ScalingFit> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| GyroError::Io(e.to_string()))?;
    let headers = reader.headers().map_err(|e| GyroError::Io(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| GyroError::Config(format!("column '{name}' not in {}", path.display())))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| GyroError::Io(e.to_string()))?;
        let parse = |i: usize| rec.get(i).filter(|s| !s.is_empty()).and_then(|s| s.parse::<f64>().ok());
        if let (Some(a), Some(b)) = (parse(ix), parse(iy)) {
            xs.push(a);
            ys.push(b);
        }
    }
    fit_power_law(&xs, &ys)
}

/// What [`optimize_split`] scores as a function of the squeezed fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitObjective {
    /// Maximize the exact `F_Q` of the truncated coherent (x) squeezed probe.
    QfiExact,
    /// Maximize the Gaussian surrogate `F_Q`.
    QfiSurrogate,
    /// Minimize exact `M` error propagation at `phi0 = -pi/2`, `phi = 1e-3 / N`.
    SimpleM,
    /// Minimize the closed-form simple squeezed model.
    SimpleMModel,
    /// Minimize the exact `(F^-1)_11`.
    MultiparamL,
    /// Minimize the exact `(F^-1)_22`.
    MultiparamNl,
    MultiparamLSurrogate,
    MultiparamNlSurrogate,
}

impl SplitObjective {
    fn maximize(self) -> bool {
        matches!(self, SplitObjective::QfiExact | SplitObjective::QfiSurrogate)
    }
}

impl FromStr for SplitObjective {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "qfi-exact" => SplitObjective::QfiExact,
            "qfi-surrogate" => SplitObjective::QfiSurrogate,
            "simple-m" => SplitObjective::SimpleM,
            "simple-m-model" => SplitObjective::SimpleMModel,
            "multiparam-l" => SplitObjective::MultiparamL,
            "multiparam-nl" => SplitObjective::MultiparamNl,
            "multiparam-l-surrogate" => SplitObjective::MultiparamLSurrogate,
            "multiparam-nl-surrogate" => SplitObjective::MultiparamNlSurrogate,
            other => return Err(GyroError::Config(format!("unknown objective '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeOptions {
    /// Number of coarse grid points.
    pub grid: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// Width of the final golden-section bracket.
    pub tol: f64,
    pub tail_tol: f64,
    pub axis: SqueezeAxis,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            grid: 40,
            f_min: 0.01,
            f_max: 0.95,
            tol: 1e-4,
            tail_tol: 1e-10,
            axis: SqueezeAxis::ReduceX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitOptimum {
    pub fraction: f64,
    /// Objective at `fraction`, in its natural sign.
    pub value: f64,
    pub evaluations: usize,
}

/// Objective value in its natural sign.
pub fn split_objective(n_bar: f64, fraction: f64, objective: SplitObjective, opts: &OptimizeOptions) -> Result<f64> {
    use SplitObjective::*;
    match objective {
        QfiSurrogate => return squeezed_qfi_surrogate(fraction, n_bar),
        MultiparamLSurrogate => return inverse_diagonal(&squeezed_surrogate_matrix(fraction, n_bar)?).map(|d| d.0),
        MultiparamNlSurrogate => return inverse_diagonal(&squeezed_surrogate_matrix(fraction, n_bar)?).map(|d| d.1),
        _ => {}
    }
    let spec = ProbeSpec::squeezed_split(n_bar, fraction, opts.axis);
    if objective == SimpleMModel {
        let ProbeSpec::CoherentSqueezed { alpha, r, .. } = spec else {
            unreachable!()
        };
        return Ok(squeezed_simple_model(alpha, r).delta2phi);
    }
    let probe = build_probe_with_plan(&spec, &plan_cutoffs(&spec, opts.tail_tol), opts.tail_tol)?;
    match objective {
        QfiExact => Ok(g_moments(&probe)?.qfi()),
        SimpleM => {
            let params = ChannelParams::new(1e-3 / n_bar, -std::f64::consts::FRAC_PI_2);
            Ok(error_propagation_delta_phi(&probe, &params, &EstimatorConfig::default())?.delta2phi)
        }
        MultiparamL => Ok(multiparam_fisher(&probe)?.bound_linear),
        MultiparamNl => Ok(multiparam_fisher(&probe)?.bound_nonlinear),
        _ => unreachable!(),
    }
}

/// Coarse grid over `[f_min, f_max]` then golden-section refinement around the best cell.
/// Ties go to the smaller fraction.
pub fn optimize_split(n_bar: f64, objective: SplitObjective, opts: &OptimizeOptions) -> Result<SplitOptimum> {
    if !(n_bar >= 1.0) {
        return Err(GyroError::InvalidParameter(format!("N_bar must be >= 1, got {n_bar}")));
    }
    if !(opts.grid >= 3 && opts.f_min > 0.0 && opts.f_max < 1.0 && opts.f_min < opts.f_max) {
        return Err(GyroError::InvalidParameter("need grid >= 3 and 0 < f_min < f_max < 1".into()));
    }
    let sign = if objective.maximize() { -1.0 } else { 1.0 };
    let score = |f: f64| -> f64 {
        match split_objective(n_bar, f, objective, opts) {
            Ok(v) if v.is_finite() => sign * v,
            _ => f64::INFINITY,
        }
    };
    let step = (opts.f_max - opts.f_min) / (opts.grid - 1) as f64;
    let fs: Vec<f64> = (0..opts.grid).map(|i| opts.f_min + step * i as f64).collect();
    let vals: Vec<f64> = fs.par_iter().map(|&f| score(f)).collect();
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v < vals[best] {
            best = i;
        }
    }
    if !vals[best].is_finite() {
        return Err(GyroError::NonFiniteObjective);
    }
    let mut evaluations = opts.grid;
    let mut lo = fs[best.saturating_sub(1)];
    let mut hi = fs[(best + 1).min(opts.grid - 1)];
    let (mut best_f, mut best_v) = (fs[best], vals[best]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let mut fc = score(c);
    let mut fd = score(d);
    evaluations += 2;
    while hi - lo > opts.tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = score(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = score(d);
        }
        evaluations += 1;
    }
    for (f, v) in [(c, fc), (d, fd)] {
        if v < best_v || (v == best_v && f < best_f) {
            best_f = f;
            best_v = v;
        }
    }
    Ok(SplitOptimum {
        fraction: best_f,
        value: sign * best_v,
        evaluations,
    })
}

/// A pass/fail check recorded in the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// A published constant next to the value this library measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub published: f64,
    pub measured: f64,
    pub note: String,
}

/// Published constants of the asymptotic analysis versus what the models here give.
pub fn known_discrepancies() -> Vec<Discrepancy> {
    let mut out = Vec::new();
    let opts = OptimizeOptions {
        grid: 200,
        f_min: 0.005,
        f_max: 0.995,
        tol: 1e-7,
        ..Default::default()
    };
    if let Ok(q) = optimize_split(1.0, SplitObjective::QfiSurrogate, &opts) {
        out.push(Discrepancy {
            quantity: "qfi_surrogate_optimal_fraction".into(),
            published: 0.71,
            measured: q.fraction,
            note: "Gaussian surrogate, fourth-order moments of the anti-squeezed quadrature".into(),
        });
        out.push(Discrepancy {
            quantity: "qfi_surrogate_constant".into(),
            published: 30.0,
            measured: q.value,
            note: "F_Q / N^4 at the surrogate optimum".into(),
        });
    }
    if let Ok(nl) = optimize_split(1.0, SplitObjective::MultiparamNlSurrogate, &opts) {
        out.push(Discrepancy {
            quantity: "multiparam_nl_optimal_fraction".into(),
            published: 0.8,
            measured: nl.fraction,
            note: "(F^-1)_22 of the Gaussian surrogate".into(),
        });
        out.push(Discrepancy {
            quantity: "multiparam_nl_constant".into(),
            published: 0.04,
            measured: nl.value,
            note: "N^4 (F^-1)_22 at its optimum".into(),
        });
    }
    if let Ok(l) = optimize_split(1.0, SplitObjective::MultiparamLSurrogate, &opts) {
        out.push(Discrepancy {
            quantity: "multiparam_l_optimal_fraction".into(),
            published: 0.6,
            measured: l.fraction,
            note: "(F^-1)_11 of the Gaussian surrogate; the surrogate keeps it O(1) rather than O(1/N^2)".into(),
        });
    }
    let n = 3usize;
    out.push(Discrepancy {
        quantity: "number_state_d2phi_3_1".into(),
        published: 10.0 / 144.0,
        measured: number_state_model(n, 1, 0.0, 0.3).ok().and_then(|m| m.delta2phi_m).unwrap_or(f64::NAN),
        note: "exact Kerr ordering gives (n1+n2)^2 rather than (n1+n2-1)^2 in the denominator".into(),
    });
    out
}

/// Noise-degraded asymptotes and the Monte Carlo check of the exact zero-signal variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseReport {
    pub params: NoiseParams,
    pub n_bar: f64,
    pub coherent_d2phi: f64,
    pub squeezed_d2phi: f64,
    pub var_m_exact: f64,
    pub var_m_mc: f64,
    pub mc_std_error: f64,
}

pub fn noise_report(n_bar: f64, noise: &NoiseSweep, seed: u64) -> Result<NoiseReport> {
    let n2 = n_bar.sqrt() / 2.0;
    let alpha = (n_bar - n2).max(0.0).sqrt();
    let r = n2.sqrt().asinh();
    let params = noise.params();
    let mc = mc_noise_oracle(alpha, r, &params, noise.mc_samples, seed)?;
    Ok(NoiseReport {
        params,
        n_bar,
        coherent_d2phi: noisy_delta2phi(n_bar, NoisyProbe::Coherent, &params)?,
        squeezed_d2phi: noisy_delta2phi(n_bar, NoisyProbe::SqueezedOptimum, &params)?,
        var_m_exact: noisy_m_variance(alpha, r, &params)?,
        var_m_mc: mc.var_m,
        mc_std_error: mc.std_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub version: &'static str,
    pub generated_at_unix: u64,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub verdicts: Vec<Verdict>,
    pub discrepancies: Vec<Discrepancy>,
    pub noise: Vec<NoiseReport>,
}

/// Checks that apply to every sweep.
pub fn sweep_verdicts(config: &SweepConfig, rows: &[SweepRow]) -> Vec<Verdict> {
    let mut out = Vec::new();
    let complete = rows.iter().filter(|r| r.is_complete()).count();
    out.push(Verdict {
        name: "rows_complete".into(),
        pass: complete == rows.len(),
        detail: format!("{complete}/{} rows without reason codes", rows.len()),
    });
    let within = rows.iter().filter(|r| r.tail_mass.is_some_and(|t| t <= config.tolerances.tail_tol)).count();
    out.push(Verdict {
        name: "tail_mass_within_tolerance".into(),
        pass: within == rows.len(),
        detail: format!("{within}/{} rows with tail mass <= {:e}", rows.len(), config.tolerances.tail_tol),
    });
    // every family built from a config has real number-basis coefficients
    {
        let worst = rows
            .iter()
            .filter_map(|r| match (r.fisher, r.qfi) {
                (Some(f), Some(q)) if q > 0.0 => Some((f / q - 1.0).abs()),
                _ => None,
            })
            .fold(0.0, f64::max);
        out.push(Verdict {
            name: "fisher_equals_qfi".into(),
            pass: worst <= 1e-3,
            detail: format!("max |F/F_Q - 1| = {worst:e}"),
        });
    }
    out
}

pub fn build_report(config: &SweepConfig, rows: Vec<SweepRow>) -> Result<SweepReport> {
    let noise = match &config.noise {
        Some(n) => config
            .n_bar
            .iter()
            .map(|&nb| noise_report(nb, n, config.seed))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        generated_at_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        seed: config.seed,
        tolerances: config.tolerances,
        verdicts: sweep_verdicts(config, &rows),
        discrepancies: known_discrepancies(),
        config: config.clone(),
        rows,
        noise,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| GyroError::Io(format!("{}: {e}", path.display())))
}

/// Check that each configured output path can be created before any compute happens.
pub fn check_outputs(config: &SweepConfig) -> Result<()> {
    for path in [&config.output.csv, &config.output.json].into_iter().flatten() {
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(GyroError::Io(format!("output directory {} does not exist", parent.display())));
        }
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| GyroError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Run the sweep and write whichever outputs are configured.
pub fn run_and_write(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    check_outputs(config)?;
    let rows = run_sweep(config)?;
    if let Some(path) = &config.output.csv {
        write_file(path, csv_string(&rows)?.as_bytes())?;
    }
    let report = build_report(config, rows)?;
    if let Some(path) = &config.output.json {
        let json = serde_json::to_string_pretty(&report).map_err(|e| GyroError::Io(e.to_string()))?;
        write_file(path, json.as_bytes())?;
    }
    Ok(report)
}
