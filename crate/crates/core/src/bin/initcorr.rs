use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use initcorr::harness::{
    self, parse_config, presets, run_exact, run_scenario, Overrides, ScenarioConfig, SweepAxis,
};
use initcorr::{Error, Result};

#[derive(Parser)]
#[command(name = "initcorr", version, about = "Spin-ensemble dynamics with initial system-bath correlations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the master equation with and without correlations and write the CSV.
    Simulate(RunArgs),
    /// Write the exact pure-dephasing curves.
    ExactDephasing(RunArgs),
    /// Run the master equation and the exact solution and report their deviation.
    Compare(RunArgs),
    /// Report D = max |jx_corr − jx_uncorr| across values of one parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// n, beta or s.
        #[arg(long)]
        axis: String,
        /// Comma-separated list, e.g. 1,4,10.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
    },
    /// Print the preset names.
    ListPresets,
}

#[derive(Args)]
struct RunArgs {
    /// Config file or preset name.
    scenario: String,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration step.
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    /// Final time.
    #[arg(long, allow_hyphen_values = true)]
    tmax: Option<f64>,
    /// Drop the initial-correlation term from the correlated run.
    #[arg(long)]
    no_corr_term: bool,
    /// Start the correlated run from the product state.
    #[arg(long)]
    no_corr_state: bool,
    /// Frequency quadrature nodes for the bath integrals.
    #[arg(long)]
    quad_nodes: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let path = Path::new(&self.scenario);
        let mut cfg = if path.is_file() {
            parse_config(&std::fs::read_to_string(path)?)?
        } else {
            presets::get(&self.scenario).map_err(|_| {
                Error::Config(format!(
                    "'{}' is neither a config file nor a preset; presets: {}",
                    self.scenario,
                    presets::names().collect::<Vec<_>>().join(", ")
                ))
            })?
        };
        Overrides {
            dt: self.dt,
            t_max: self.tmax,
            no_corr_term: self.no_corr_term,
            no_corr_state: self.no_corr_state,
            quad_nodes: self.quad_nodes,
            out: self.out.clone(),
        }
        .apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn output(cfg: &ScenarioConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.load()?;
            let report = run_scenario(&cfg)?;
            let mut w = output(&cfg)?;
            report.write_csv(&mut w)?;
            w.flush()?;
            eprint!("{}", report.summary());
        }
        Command::ExactDephasing(args) => {
            let cfg = args.load()?;
            let report = run_exact(&cfg)?;
            let mut w = output(&cfg)?;
            report.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Compare(args) => {
            let cfg = args.load()?;
            if cfg.model != harness::ModelKind::Dephasing {
                return Err(Error::Config(format!(
                    "model: compare needs an exact solution (dephasing), got {}",
                    cfg.model
                )));
            }
            let report = run_scenario(&cfg)?;
            if let Some(p) = &cfg.out {
                let mut w = BufWriter::new(File::create(p)?);
                report.write_csv(&mut w)?;
                w.flush()?;
            }
            print!("{}", report.summary());
        }
        Command::Sweep { run, axis, values } => {
            let axis: SweepAxis = axis.parse()?;
            if values.is_empty() {
                return Err(Error::Config("values: need at least one value".into()));
            }
            let cfg = run.load()?;
            let rows = harness::sweep(&cfg, axis, &values)?;
            let mut w = output(&cfg)?;
            harness::write_sweep_csv(axis, &rows, &mut w)?;
            w.flush()?;
        }
        Command::ListPresets => {
            for p in presets::PRESETS {
                println!("{:<7} {}", p.name, p.summary);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::FAILURE
        }
    }
}
