use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use knotchord::functionals::{avg_chord_power, circle_bound, crossover_segment_circle, distortion, energy};
use knotchord::harness::{self, reproduce_figures, verify_with_files, write_sweep, write_sweep_csv, EXIT_VERIFICATION};
use knotchord::optimizer::{maximize, perturbed_circle, sweep};
use knotchord::shape::{fit_conic, width_ratio};
use knotchord::spectral::{direct_profile, FourierCurve};
use knotchord::{EnergyParams, Error, ExperimentConfig, OptimizeOptions, PolyCurve, Result};

#[derive(Parser, Debug)]
#[command(name = "knotchord", version, about = "Chord energies, circle bounds and chord-power maximizers of closed curves")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Vertex count of generated curves.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every property suite and print one line per check.
    Verify {
        #[arg(long)]
        n_curves: Option<usize>,
        /// Experiment configuration supplying defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Curve files checked for the unit-speed invariants.
        #[arg(long = "curve")]
        curves: Vec<PathBuf>,
    },
    /// O'Hara energy E_j^p of a curve.
    Energy {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        j: f64,
        #[arg(long)]
        p: f64,
    },
    /// Chord-power mean A_p of a curve.
    Apnorm {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        p: f64,
    },
    /// Arc over chord distortion of a curve.
    Distortion {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Energy of the round circle, the lower bound for E_j^p.
    Bound {
        #[arg(long)]
        j: f64,
        #[arg(long)]
        p: f64,
    },
    /// Wirtinger deficit on every grid separation, as CSV rows `s,rho`.
    Deficit {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, conflicts_with = "direct")]
        series: bool,
        #[arg(long)]
        direct: bool,
    },
    /// Maximize A_p from a perturbed circle and write the curve as JSON.
    Maximize {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Continuation sweep over an exponent grid, written as CSV.
    Sweep {
        #[arg(long)]
        p_min: f64,
        #[arg(long)]
        p_max: f64,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Exponent where the double segment overtakes the circle.
    Crossover,
    /// Width ratio and conic fit of a planar curve.
    Shape {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Sweep the exponent range and write CSV, curve files and SVG plots.
    Figures {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Either a library error or a failed verification.
enum Failure {
    Lib(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::from(harness::EXIT_OK as u8),
        Err(Failure::Verification) => ExitCode::from(EXIT_VERIFICATION as u8),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}

fn report_value(value: f64, n: Option<usize>, params: Value) -> Value {
    json!({ "value": value, "n": n, "params": params })
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn emit_json(out: Option<&Path>, value: &Value) -> Result<()> {
    write_text(out, &serde_json::to_string_pretty(value)?)
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    path.map_or_else(|| Ok(ExperimentConfig::default()), ExperimentConfig::load)
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    let g = cli.global;
    let out = g.out.as_deref();
    match cli.command {
        Command::Verify { n_curves, config, curves } => {
            let config = load_config(config.as_deref())?;
            let n_curves = n_curves.unwrap_or(config.verify.n_curves);
            let n = g.n.unwrap_or(config.verify.n);
            let report = verify_with_files(g.seed, n_curves, n, &curves)?;
            if !g.quiet {
                println!("{report}");
            }
            if let Some(path) = out {
                std::fs::write(path, report.to_json()?).map_err(|e| io_error(path, e))?;
            }
            if !report.passed() {
                return Err(Failure::Verification);
            }
        }
        Command::Energy { curve, j, p } => {
            let c = PolyCurve::load(&curve)?;
            let value = energy(&c, EnergyParams::new(j, p))?;
            emit_json(out, &report_value(value, Some(c.n()), json!({ "j": j, "p": p })))?;
        }
        Command::Apnorm { curve, p } => {
            let c = PolyCurve::load(&curve)?;
            let value = avg_chord_power(&c, p)?;
            emit_json(out, &report_value(value, Some(c.n()), json!({ "p": p })))?;
        }
        Command::Distortion { curve } => {
            let c = PolyCurve::load(&curve)?;
            emit_json(out, &report_value(distortion(&c), Some(c.n()), json!({})))?;
        }
        Command::Bound { j, p } => {
            let value = circle_bound(EnergyParams::new(j, p))?;
            emit_json(out, &report_value(value, None, json!({ "j": j, "p": p })))?;
        }
        Command::Deficit { curve, series, direct } => {
            let c = PolyCurve::load(&curve)?;
            let profile = if series || !direct {
                FourierCurve::analyze(&c).deficit_profile(c.n())
            } else {
                direct_profile(&c)
            };
            let mut text = String::from("s,rho\n");
            for (s, rho) in &profile.samples {
                text.push_str(&format!("{s:.16e},{rho:.16e}\n"));
            }
            write_text(out, text.trim_end())?;
        }
        Command::Maximize { p, max_iters } => {
            let opts = options(&g, max_iters);
            opts.validate()?;
            let init = perturbed_circle(opts.n, opts.perturb, opts.seed)?;
            let res = maximize(p, &init, &opts)?;
            if let Some(path) = out {
                res.curve.save(path)?;
            }
            let summary = json!({
                "value": res.value,
                "n": opts.n,
                "params": { "p": p, "seed": opts.seed, "max_iters": opts.max_iters },
                "iterations": res.iterations,
                "converged": res.converged,
                "diagnostic": res.diagnostic,
            });
            if out.is_none() {
                let curve: Value = serde_json::from_str(&res.curve.to_json()?).map_err(Error::from)?;
                emit_json(None, &json!({ "summary": summary, "curve": curve }))?;
            } else if !g.quiet {
                emit_json(None, &summary)?;
            }
        }
        Command::Sweep {
            p_min,
            p_max,
            step,
            max_iters,
        } => {
            let grid = harness::Grid::new(p_min, p_max, step);
            grid.validate()?;
            let records = sweep(&grid.points(), &options(&g, max_iters))?;
            match out {
                Some(path) => write_sweep_csv(&records, path)?,
                None => write_sweep(&records, std::io::stdout().lock())?,
            }
        }
        Command::Crossover => {
            write_text(out, &format!("{:.10}", crossover_segment_circle()))?;
        }
        Command::Shape { curve } => {
            let c = PolyCurve::load(&curve)?;
            let fit = fit_conic(&c)?;
            let value = json!({
                "r": finite_or_null(width_ratio(&c, 360)?),
                "efit_log10": finite_or_null(fit.residual_log10()),
                "eccentricity": fit.eccentricity,
                "elliptic": fit.elliptic,
            });
            emit_json(out, &value)?;
        }
        Command::Figures { config } => {
            let mut config = load_config(config.as_deref())?;
            if let Some(n) = g.n {
                config.figures.optimizer.n = n;
            }
            config.figures.optimizer.seed = g.seed;
            let outdir = out.map_or(config.outdir.clone(), Path::to_path_buf);
            let set = reproduce_figures(&outdir, &config.figures)?;
            if !g.quiet {
                println!("wrote {} rows to {}", set.records.len(), set.sweep_csv.display());
            }
        }
    }
    Ok(())
}

fn options(g: &Global, max_iters: Option<usize>) -> OptimizeOptions {
    let mut opts = OptimizeOptions {
        seed: g.seed,
        ..OptimizeOptions::default()
    };
    if let Some(n) = g.n {
        opts.n = n;
    }
    if let Some(m) = max_iters {
        opts.max_iters = m;
    }
    opts
}

/// JSON has no infinities; an unbounded width ratio is written as null.
fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
