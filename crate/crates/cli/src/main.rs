use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pwstab::report::{run_report, ReportOptions};
use pwstab::sweep::{run_sweep, sweep_table, SweepSpec, Vary};
use pwstab::tables::{self, Table};
use pwstab::Config;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pwstab", version, about = "Stability of periodic travelling waves of KdV-like Hamiltonian PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// Real-axis scan limit and side-band contour radius.
    #[arg(long)]
    tau_max: Option<f64>,
    /// Number of Floquet exponents.
    #[arg(long)]
    nu_steps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Full stability report as JSON.
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scan: ScanArgs,
        /// Skip the Evans-function scans.
        #[arg(long)]
        no_scans: bool,
    },
    /// Sampled profile as CSV.
    Profile {
        #[command(flatten)]
        common: Common,
    },
    /// Evans function on a real tau grid as CSV.
    Evans {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Side-band unstable counts as CSV.
    Floquet {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// One-parameter sweep of the report as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary: mu, c, lambda1 or lambda2.
        #[arg(long)]
        vary: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        /// Grid points, endpoints included (at least 2).
        #[arg(long)]
        steps: usize,
        /// Worker threads (all cores when absent).
        #[arg(long)]
        jobs: Option<usize>,
        /// Include the Evans-function scans at every point.
        #[arg(long)]
        scans: bool,
    },
    /// Direct simulation diagnostics as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Final time.
        #[arg(long)]
        tmax: Option<f64>,
        /// Perturbation sup-norm added to the profile.
        #[arg(long)]
        perturb: Option<f64>,
        /// Also fit an exponential growth rate and print it to stderr.
        #[arg(long)]
        fit: bool,
    },
}

enum Failure {
    Config(anyhow::Error),
    Compute(anyhow::Error),
}

fn load(common: &Common) -> Result<Config, Failure> {
    Config::load(&common.config).map_err(|e| Failure::Config(e.into()))
}

fn revalidate(config: &Config) -> Result<(), Failure> {
    config.validate().map_err(|e| Failure::Config(e.into()))
}

fn apply_scan(config: &mut Config, scan: &ScanArgs) -> Result<(), Failure> {
    if let Some(t) = scan.tau_max {
        config.scan.tau_max = t;
    }
    if let Some(n) = scan.nu_steps {
        config.scan.nu_steps = n;
    }
    revalidate(config)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    let io = |r: std::io::Result<()>, what: &str| r.with_context(|| format!("writing {what}")).map_err(Failure::Config);
    match out {
        Some(p) => io(std::fs::write(p, text), &p.display().to_string()),
        None => io(std::io::stdout().write_all(text.as_bytes()), "stdout"),
    }
}

fn emit_table(out: Option<&Path>, t: pwstab_core::Result<Table>) -> Result<(), Failure> {
    let t = t.map_err(|e| Failure::Compute(e.into()))?;
    emit(out, &t.to_csv_string())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Report { common, scan, no_scans } => {
            let mut config = load(&common)?;
            apply_scan(&mut config, &scan)?;
            let report = run_report(&config, &ReportOptions { scans: !no_scans, spectral: true });
            emit(common.out.as_deref(), &report.to_json())?;
            Ok(report.exit_code() as u8)
        }
        Command::Profile { common } => {
            let config = load(&common)?;
            emit_table(common.out.as_deref(), tables::profile_table(&config))?;
            Ok(0)
        }
        Command::Evans { common, scan } => {
            let mut config = load(&common)?;
            apply_scan(&mut config, &scan)?;
            emit_table(common.out.as_deref(), tables::evans_table(&config))?;
            Ok(0)
        }
        Command::Floquet { common, scan } => {
            let mut config = load(&common)?;
            apply_scan(&mut config, &scan)?;
            emit_table(common.out.as_deref(), tables::floquet_table(&config))?;
            Ok(0)
        }
        Command::Sweep { common, vary, from, to, steps, jobs, scans } => {
            let config = load(&common)?;
            let vary: Vary = vary.parse().map_err(|e: pwstab::ConfigError| Failure::Config(e.into()))?;
            let spec = SweepSpec { vary, from, to, steps };
            let opts = ReportOptions { scans, spectral: true };
            let reports = run_sweep(&config, &spec, &opts, jobs).map_err(|e| Failure::Config(e.into()))?;
            let table = sweep_table(vary, config.model.family.dim(), &reports);
            emit(common.out.as_deref(), &table.to_csv_string())?;
            Ok(0)
        }
        Command::Simulate { common, tmax, perturb, fit } => {
            let mut config = load(&common)?;
            if let Some(t) = tmax {
                config.simulation.t_max = t;
            }
            if let Some(p) = perturb {
                config.simulation.perturbation = p;
            }
            revalidate(&config)?;
            emit_table(common.out.as_deref(), tables::simulate_table(&config))?;
            if fit {
                let g = tables::growth_fit(&config).map_err(|e| Failure::Compute(e.into()))?;
                if g.no_growth {
                    eprintln!("no growth detected");
                } else {
                    eprintln!("growth rate {:.6e} (fit residual {:.3e})", g.rate, g.fit_residual);
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
