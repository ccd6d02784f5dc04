use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tedfem::config::RunConfig;
use tedfem::runner::{
    self, run_qfactor, run_sweep, run_validate_static, run_validate_thermal, RunError,
};

/// Thermoelastic-damping finite elements for longitudinally vibrating bars.
#[derive(Parser)]
#[command(name = "tedfem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path overrides, e.g. `--set loads.prestrain=0.25`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// CSV output path; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the nonlinear static solver against the closed-form bar force law.
    ValidateStatic(Common),
    /// Check the steady thermal solve against an independent ODE integration.
    ValidateThermal(Common),
    /// Quality factor of the configured bar.
    Qfactor(Common),
    /// Quality factor along the configured parameter sweep.
    Sweep(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::ValidateStatic(c)
        | Command::ValidateThermal(c)
        | Command::Qfactor(c)
        | Command::Sweep(c) => c,
    };
    match run(&cli.command, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig, RunError> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| tedfem::config::ConfigError::Parse(format!("{}: {e}", common.config.display())))?;
    Ok(RunConfig::from_json_with_overrides(&text, &common.sets)?)
}

fn out_path(common: &Common, config: &RunConfig) -> Option<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
}

fn write_out<F>(path: Option<PathBuf>, emit: F) -> Result<(), RunError>
where
    F: Fn(&mut dyn Write) -> std::io::Result<()>,
{
    match path {
        Some(p) => {
            let mut file = fs::File::create(&p)?;
            emit(&mut file)?;
            println!("wrote {}", p.display());
        }
        None => {
            let stdout = std::io::stdout();
            emit(&mut stdout.lock())?;
        }
    }
    Ok(())
}

fn run(command: &Command, common: &Common) -> Result<(), RunError> {
    let config = load_config(common)?;
    let out = out_path(common, &config);
    match command {
        Command::ValidateStatic(_) => {
            let v = run_validate_static(&config)?;
            println!(
                "static validation: {} stretches up to {:.3}, max relative force error {:.3e}",
                v.rows.len(),
                v.rows.last().map(|r| r.0).unwrap_or(0.0),
                v.max_rel_error
            );
            write_out(out, |w| runner::write_static_csv(w, &v))?;
        }
        Command::ValidateThermal(_) => {
            let v = run_validate_thermal(&config)?;
            let t_max = v.rows.iter().map(|r| r.1).fold(f64::MIN, f64::max);
            println!(
                "thermal validation: {} nodes, peak temperature {:.4} K, max relative error {:.3e}",
                v.rows.len(),
                t_max,
                v.max_rel_error
            );
            write_out(out, |w| runner::write_thermal_csv(w, &v))?;
        }
        Command::Qfactor(_) => {
            let row = run_qfactor(&config)?;
            println!(
                "L = {:.4e} m: omega = {:.8e} rad/s, Q^-1 = {:.8e}, normalized frequency shift = {:.4e}",
                row.length, row.omega_rad_s, row.q_inverse, row.dfreq_norm
            );
            let rows = vec![row];
            write_out(out, |w| runner::write_sweep_csv(w, &rows))?;
        }
        Command::Sweep(_) => {
            let jobs = common.jobs.unwrap_or_else(num_cpus);
            let rows = run_sweep(&config, jobs)?;
            let ok = rows.iter().filter(|r| r.converged).count();
            let peak = rows
                .iter()
                .filter(|r| r.converged)
                .max_by(|a, b| a.q_inverse.total_cmp(&b.q_inverse));
            println!("sweep: {} points, {} converged", rows.len(), ok);
            if let Some(p) = peak {
                println!(
                    "peak Q^-1 = {:.6e} at sweep value {:.6e}",
                    p.q_inverse, p.sweep_value
                );
            }
            write_out(out, |w| runner::write_sweep_csv(w, &rows))?;
        }
    }
    Ok(())
}

fn num_cpus() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
