use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nfs_comb::config::{RunConfig, SweepParameter};
use nfs_comb::runner;
use nfs_comb::{io, Result};

#[derive(Parser)]
#[command(name = "nfs-comb", version, about = "Frequency combs from switched nuclear forward scattering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration (TOML, or JSON for a config.json sidecar).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a value, e.g. --set switching.t_off="1 tqb". Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (default: config output_dir, else $NFS_COMB_OUT/run).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        match &self.config {
            Some(p) => RunConfig::load(p, &self.overrides),
            None => RunConfig::with_overrides(&self.overrides),
        }
    }

    fn out_dir(&self, cfg: &RunConfig) -> PathBuf {
        runner::output_dir(cfg, self.out.as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the pulse and write field.csv with metadata.
    Simulate(ConfigArgs),
    /// Transform a field (simulated, or read with --field) and extract comb metrics.
    Spectrum {
        #[command(flatten)]
        args: ConfigArgs,
        /// Existing field CSV to analyse instead of simulating.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Evaluate the first-order analytic model.
    Analytic(ConfigArgs),
    /// Run one parameter over several values.
    Sweep {
        #[command(flatten)]
        args: ConfigArgs,
        /// t_off, t_on, xi, b0, epsilon, jitter_fraction or seed.
        #[arg(long)]
        parameter: Option<String>,
        /// Comma-separated values; times accept "1 tqb".
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        /// Maximum concurrent runs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare a numeric and an analytic field file.
    Compare {
        numeric: PathBuf,
        analytic: PathBuf,
        #[arg(long)]
        t_from: Option<f64>,
        #[arg(long)]
        t_to: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        rel_threshold: f64,
        /// Write the JSON report here as well as to stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the switching sequence f(t) as CSV.
    DumpSequence {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Reproduce a published figure (fig2 .. fig9, fig7a, fig7b).
    Scenario {
        id: String,
        /// Output root (default $NFS_COMB_OUT, else ./runs).
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn sweep_value(raw: &str) -> serde_json::Value {
    serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()))
}

fn report(dir: &Path) {
    println!("wrote {}", dir.display());
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = a.load()?;
            let dir = a.out_dir(&cfg);
            runner::run_simulate(&cfg, &dir)?;
            report(&dir);
        }
        Command::Spectrum { args, field } => {
            let cfg = args.load()?;
            let dir = args.out_dir(&cfg);
            let r = match field {
                Some(f) => runner::run_spectrum_from_field(&f, &cfg, &dir)?,
                None => runner::run_spectrum(&cfg, &dir)?,
            };
            let m = &r.analysis.metrics;
            println!("peaks: {}", m.peaks.len());
            if let Some(s) = m.mean_spacing {
                println!("mean spacing: {s:.6} rad/ns");
            }
            report(&dir);
        }
        Command::Analytic(a) => {
            let cfg = a.load()?;
            let dir = a.out_dir(&cfg);
            runner::run_analytic(&cfg, &dir)?;
            report(&dir);
        }
        Command::Sweep {
            args,
            parameter,
            values,
            jobs,
        } => {
            let cfg = args.load()?;
            let (parameter, values) = match (parameter, cfg.sweep.clone()) {
                (Some(p), _) => (p.parse::<SweepParameter>()?, values.iter().map(|v| sweep_value(v)).collect()),
                (None, Some(s)) => (s.parameter, s.values),
                (None, None) => {
                    return Err(nfs_comb::Error::Config(
                        "sweep needs --parameter/--values or a [sweep] section".into(),
                    ))
                }
            };
            let dir = args.out_dir(&cfg);
            for row in runner::run_sweep(&cfg, parameter, &values, &dir, jobs)? {
                println!(
                    "{} = {}: measured {:?}, predicted {:?}",
                    parameter.name(),
                    row.value,
                    row.delta_f_measured,
                    row.delta_f_predicted
                );
            }
            report(&dir);
        }
        Command::Compare {
            numeric,
            analytic,
            t_from,
            t_to,
            rel_threshold,
            out,
        } => {
            let window = match (t_from, t_to) {
                (None, None) => None,
                (a, b) => Some((a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY))),
            };
            let r = runner::run_compare(&numeric, &analytic, window, rel_threshold, out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Command::DumpSequence { args, dt, t_end } => {
            let cfg = args.load()?;
            let path = args.out_dir(&cfg).join(io::SEQUENCE_FILE);
            runner::dump_sequence(&cfg, &path, dt, t_end)?;
            println!("wrote {}", path.display());
        }
        Command::Scenario { id, out, jobs } => {
            let root = out.unwrap_or_else(io::default_output_root);
            runner::run_scenario(&id, &root, jobs)?;
            report(&root.join(&id));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
