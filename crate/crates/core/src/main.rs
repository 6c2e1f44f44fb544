use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use springsim::fit::{fit_optimal, EnergyModel};
use springsim::harness::config::{RunConfig, SpecsFile};
use springsim::harness::report::{read_report, REPORT_FILE};
use springsim::harness::traces::export_torque_traces;
use springsim::harness::{reference_table, run_grid, ExperimentResult, ExperimentSpec, GridReport};
use springsim::trajectory::load_trajectory;

/// Fit optimal parallel torsion springs to knee logs and measure the energy
/// they save on a simulated leg.
#[derive(Parser, Debug)]
#[command(name = "springsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one two-phase experiment described by a config file
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `out` in the config; default `out`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a grid of experiments and write report.csv
    Grid(GridArgs),
    /// Fit the optimal spring to a trajectory CSV
    Fit {
        log: PathBuf,
        /// Print machine-readable JSON instead of text
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1.0)]
        k_motor: f64,
    },
    /// Export one-cycle torque overlays (CSV + SVG) from a grid result directory
    Traces {
        result_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "source")]
struct GridSource {
    /// Built-in experiment table
    #[arg(long, value_enum)]
    table: Option<Table>,
    /// TOML file with [[experiment]] entries
    #[arg(long)]
    specs: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    source: GridSource,
    #[arg(long)]
    out: PathBuf,
    /// Motor constant K (defaults to the specs file value, else 1)
    #[arg(long)]
    k_motor: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Table {
    /// The six reference conditions (load, period, amplitude, mean height)
    Reference,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Grid(args) => cmd_grid(args),
        Command::Fit { log, json, k_motor } => cmd_fit(&log, json, k_motor),
        Command::Traces { result_dir, out } => cmd_traces(&result_dir, &out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn energy_model(k_motor: f64) -> Result<EnergyModel, Failure> {
    EnergyModel::new(k_motor).map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_run(config: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = RunConfig::load(config)?;
    let model = energy_model(cfg.k_motor.unwrap_or(1.0))?;
    let out = out.or(cfg.out).unwrap_or_else(|| PathBuf::from("out"));
    finish_grid(run_grid(&[cfg.experiment], &out, &model)?)
}

fn cmd_grid(args: GridArgs) -> Result<(), Failure> {
    let (specs, file_k): (Vec<ExperimentSpec>, Option<f64>) =
        match (args.source.table, args.source.specs) {
            (Some(Table::Reference), _) => (reference_table(), None),
            (None, Some(path)) => {
                let file = SpecsFile::load(&path)?;
                (file.experiment, file.k_motor)
            }
            (None, None) => unreachable!("clap enforces one grid source"),
        };
    if specs.is_empty() {
        return Err(Failure::Usage("the specs file lists no experiments".into()));
    }
    let model = energy_model(args.k_motor.or(file_k).unwrap_or(1.0))?;
    finish_grid(run_grid(&specs, &args.out, &model)?)
}

fn finish_grid(report: GridReport) -> Result<(), Failure> {
    println!(
        "{:<16} {:>5} {:>5} {:>5} {:>5} {:>12} {:>10} {:>8} {:>8} {:>8}",
        "label", "m", "T", "A", "h0", "E0", "Ea", "mu*", "alpha0*", "Ea/E0"
    );
    for r in report.results() {
        print_row(r);
    }
    for r in report.results().filter(|r| r.clamped) {
        eprintln!(
            "warning: {}: fitted stiffness {:.4} is negative; phase B ran without a spring",
            r.spec.label, r.mu_star
        );
    }
    let failed: Vec<String> = report.failures().map(|e| e.to_string()).collect();
    for f in &failed {
        eprintln!("failed: {f}");
    }
    println!("report: {}", report.report_path.display());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "{} experiment(s) failed",
            failed.len()
        )))
    }
}

fn print_row(r: &ExperimentResult) {
    let s = &r.spec;
    println!(
        "{:<16} {:>5} {:>5} {:>5} {:>5} {:>12.3} {:>10.4} {:>8.3} {:>8.3} {:>7.3}%",
        s.label,
        s.mass,
        s.t_period,
        s.amplitude,
        s.h0,
        r.e0,
        r.ea,
        r.mu_star,
        r.alpha0_star,
        100.0 * r.ratio
    );
}

#[derive(Serialize)]
struct FitOutput<'a> {
    log: &'a Path,
    samples: usize,
    dt: f64,
    k_motor: f64,
    mu_star: f64,
    alpha0_star: f64,
    e0: f64,
    ea: f64,
    ratio: f64,
    physical: bool,
    grad_mu: f64,
    grad_alpha0: f64,
}

fn cmd_fit(log: &Path, json: bool, k_motor: f64) -> Result<(), Failure> {
    let model = energy_model(k_motor)?;
    let traj = load_trajectory(log)?;
    let fit = fit_optimal(&traj, &model)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", log.display())))?;
    let out = FitOutput {
        log,
        samples: traj.len(),
        dt: traj.dt(),
        k_motor,
        mu_star: fit.mu_star,
        alpha0_star: fit.alpha0_star,
        e0: fit.baseline_energy,
        ea: fit.residual_energy,
        ratio: fit.predicted_ratio(),
        physical: fit.physical,
        grad_mu: fit.grad_mu,
        grad_alpha0: fit.grad_alpha0,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!(
            "log:         {} ({} samples, dt = {} s)",
            log.display(),
            out.samples,
            out.dt
        );
        println!("mu*:         {} N·m/rad", out.mu_star);
        println!("alpha0*:     {} rad", out.alpha0_star);
        println!("E0:          {}", out.e0);
        println!("Ea:          {}", out.ea);
        println!("Ea/E0:       {}", out.ratio);
        println!("physical:    {}", out.physical);
        if !out.physical {
            println!("note:        negative stiffness; no passive spring improves on none");
        }
    }
    Ok(())
}

fn cmd_traces(result_dir: &Path, out: &Path) -> Result<(), Failure> {
    let rows = read_report(&result_dir.join(REPORT_FILE))?;
    if rows.is_empty() {
        return Err(Failure::Runtime(format!(
            "{}: report has no rows",
            result_dir.join(REPORT_FILE).display()
        )));
    }
    for row in rows {
        let result = row.into_result(result_dir);
        let files = export_torque_traces(&result, out)?;
        println!(
            "{}: {} {}",
            result.spec.label,
            files.csv.display(),
            files.svg.display()
        );
    }
    Ok(())
}
