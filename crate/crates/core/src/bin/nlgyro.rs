use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use nlgyro::channel::{gyro_pass, m_statistics, ChannelParams};
use nlgyro::fock::g_moments;
use nlgyro::probes::{build_probe_with_plan, plan_cutoffs, SqueezeAxis};
use nlgyro::sweep::{
    csv_string, fit_csv, noise_report, optimize_split, run_and_write, run_sweep, NoiseSweep, OptimizeOptions,
    ProbeFamily, SplitObjective, SweepConfig,
};
use nlgyro::{GyroError, Result};

#[derive(Parser, Debug)]
#[command(version, about = "Exact photon statistics and resolution bounds for a Kerr-nonlinear fiber gyroscope")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a probe and report its truncation and generator moments.
    Probe(ProbeArgs),
    /// One gyro pass; prints M statistics, optionally the full p(n1, n2) table as CSV.
    Simulate {
        #[command(flatten)]
        probe: ProbeArgs,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// All estimators at a single point, printed as one sweep row.
    Estimate {
        #[command(flatten)]
        probe: ProbeArgs,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        fd_step: Option<f64>,
    },
    /// Run a TOML-configured sweep.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tail_tol: Option<f64>,
        #[arg(long)]
        fd_step: Option<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Optimize the squeezed fraction of a coherent (x) squeezed probe.
    Optimize {
        #[arg(long)]
        n_bar: f64,
        #[arg(long, default_value = "qfi-exact", value_parser = parse_objective)]
        objective: SplitObjective,
        #[arg(long, default_value_t = 40)]
        grid: usize,
        #[arg(long, default_value_t = 0.01)]
        f_min: f64,
        #[arg(long, default_value_t = 0.95)]
        f_max: f64,
        #[arg(long, default_value_t = 1e-10)]
        tail_tol: f64,
    },
    /// Noise-degraded asymptotes with a Monte Carlo check of the variance.
    Noise {
        #[arg(long)]
        n_bar: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        thermal_photons: f64,
        #[arg(long, default_value_t = 0.0)]
        phase_var: f64,
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Power-law fit of two columns of a sweep CSV.
    Fit {
        csv: PathBuf,
        #[arg(long, default_value = "N_bar")]
        x: String,
        #[arg(long)]
        y: String,
    },
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long, value_parser = parse_family)]
    family: ProbeFamily,
    #[arg(long)]
    n_bar: f64,
    /// Share of the photon budget in mode 2.
    #[arg(long, default_value_t = 0.0)]
    fraction: f64,
    #[arg(long, default_value = "reduce-x", value_parser = parse_axis)]
    axis: SqueezeAxis,
    #[arg(long, default_value_t = 1e-10)]
    tail_tol: f64,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi0: f64,
}

fn parse_family(s: &str) -> std::result::Result<ProbeFamily, String> {
    s.parse().map_err(|e: GyroError| e.to_string())
}

fn parse_objective(s: &str) -> std::result::Result<SplitObjective, String> {
    s.parse().map_err(|e: GyroError| e.to_string())
}

fn parse_axis(s: &str) -> std::result::Result<SqueezeAxis, String> {
    match s {
        "reduce-x" => Ok(SqueezeAxis::ReduceX),
        "reduce-p" => Ok(SqueezeAxis::ReduceP),
        other => Err(format!("unknown squeeze axis '{other}' (reduce-x | reduce-p)")),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| GyroError::Io(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn single_config(probe: &ProbeArgs, point: &PointArgs) -> SweepConfig {
    let mut cfg = SweepConfig::single(probe.family, probe.n_bar, probe.fraction, point.phi, point.phi0);
    cfg.axis = probe.axis;
    cfg.tolerances.tail_tol = probe.tail_tol;
    cfg
}

/// Returns whether every requested row came back without reason codes.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Probe(p) => {
            let spec = p.family.probe(p.n_bar, p.fraction, p.axis)?;
            let plan = plan_cutoffs(&spec, p.tail_tol);
            let state = build_probe_with_plan(&spec, &plan, p.tail_tol)?;
            print_json(&json!({
                "probe": spec.to_string(),
                "mode_moments": spec.mode_moments(),
                "real_coefficients": spec.has_real_coefficients(),
                "plan": plan,
                "norm": state.norm(),
                "tail_mass": state.truncation_loss(),
                "g_moments": g_moments(&state)?,
            }))?;
            Ok(true)
        }
        Command::Simulate { probe, point, csv } => {
            let spec = probe.family.probe(probe.n_bar, probe.fraction, probe.axis)?;
            let state = build_probe_with_plan(&spec, &plan_cutoffs(&spec, probe.tail_tol), probe.tail_tol)?;
            let stats = gyro_pass(&state, &ChannelParams::new(point.phi, point.phi0))?;
            if let Some(path) = csv {
                let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&path)?));
                let io = |e: csv::Error| GyroError::Io(e.to_string());
                w.write_record(["n1", "n2", "p"]).map_err(io)?;
                for (a, b, p) in stats.iter() {
                    w.write_record([a.to_string(), b.to_string(), format!("{p:e}")]).map_err(io)?;
                }
                w.flush()?;
            }
            print_json(&json!({
                "probe": spec.to_string(),
                "total_probability": stats.total(),
                "m": m_statistics(&stats),
            }))?;
            Ok(true)
        }
        Command::Estimate { probe, point, fd_step } => {
            let mut cfg = single_config(&probe, &point);
            if let Some(h) = fd_step {
                cfg.tolerances.fd_step = h;
            }
            let rows = run_sweep(&cfg)?;
            print!("{}", csv_string(&rows)?);
            Ok(rows.iter().all(|r| r.is_complete()))
        }
        Command::Sweep {
            config,
            seed,
            tail_tol,
            fd_step,
            csv,
            json,
        } => {
            let mut cfg = SweepConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = tail_tol {
                cfg.tolerances.tail_tol = t;
            }
            if let Some(h) = fd_step {
                cfg.tolerances.fd_step = h;
            }
            if csv.is_some() {
                cfg.output.csv = csv;
            }
            if json.is_some() {
                cfg.output.json = json;
            }
            let report = run_and_write(&cfg)?;
            if cfg.output.csv.is_none() {
                print!("{}", csv_string(&report.rows)?);
            }
            for v in &report.verdicts {
                eprintln!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
            Ok(report.rows.iter().all(|r| r.is_complete()))
        }
        Command::Optimize {
            n_bar,
            objective,
            grid,
            f_min,
            f_max,
            tail_tol,
        } => {
            let opts = OptimizeOptions {
                grid,
                f_min,
                f_max,
                tail_tol,
                ..OptimizeOptions::default()
            };
            let opt = optimize_split(n_bar, objective, &opts)?;
            print_json(&json!({ "n_bar": n_bar, "objective": objective, "optimum": opt }))?;
            Ok(true)
        }
        Command::Noise {
            n_bar,
            eta,
            thermal_photons,
            phase_var,
            mc_samples,
            seed,
        } => {
            let noise = NoiseSweep {
                eta,
                thermal_photons,
                phase_var,
                mc_samples,
            };
            print_json(&noise_report(n_bar, &noise, seed)?)?;
            Ok(true)
        }
        Command::Fit { csv, x, y } => {
            let fit = fit_csv(&csv, &x, &y)?;
            print_json(&fit)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            let _ = writeln!(io::stderr(), "some rows carry reason codes");
            ExitCode::from(2)
        }
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::FAILURE
        }
    }
}
