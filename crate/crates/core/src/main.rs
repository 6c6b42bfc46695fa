use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use d2d_secrecy::algorithms::Scheme;
use d2d_secrecy::exec::Execution;
use d2d_secrecy::harness::{median_iterations, run_monte_carlo, sweep_convergence, RunSpec, SweepParam};
use d2d_secrecy::model::{ConfigFile, SystemConfig};
use d2d_secrecy::report::{emit_results, traces_to_csv, traces_to_json, write_text, Format};
use d2d_secrecy::selftest;
use d2d_secrecy::{Error, Result};

/// Monte Carlo simulator for secrecy-rate maximization in D2D-underlaid
/// multi-antenna uplinks.
#[derive(Parser, Debug)]
#[command(name = "secrecy-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Average every scheme over random topologies of one configuration.
    Run(Common),
    /// Per-iteration objective traces of randomly sampled CU/D2D pairs.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Number of sampled pairs.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Sweep the common CU/D2D power cap in dBm.
    SweepPower(SweepArgs),
    /// Sweep the number of CUs (the RB count follows).
    SweepCus(SweepArgs),
    /// Sweep the number of D2D pairs.
    SweepD2d(SweepArgs),
    /// Run the built-in oracle suites.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Instances per suite.
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file; omitted keys take the reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    topologies: usize,
    /// Comma-separated schemes: pac_d2d, pac_no_d2d, random_rb, greedy.
    #[arg(long, value_delimiter = ',', default_value = "pac_d2d,pac_no_d2d,random_rb,greedy")]
    schemes: Vec<String>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Evaluate topologies on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated sweep values; a built-in grid when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Option<Vec<f64>>,
}

impl Common {
    fn spec(&self) -> Result<RunSpec> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?.into_system_config()?,
            None => SystemConfig::default(),
        };
        let schemes = self
            .schemes
            .iter()
            .map(|s| s.parse::<Scheme>())
            .collect::<Result<Vec<_>>>()?;
        let execution = if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        };
        Ok(RunSpec::new(base, schemes, self.topologies, self.seed).with_execution(execution))
    }

    fn format(&self) -> Result<Format> {
        self.format.parse()
    }
}

fn run_sweep(args: &SweepArgs, param: SweepParam) -> Result<()> {
    let values = args.values.clone().unwrap_or_else(|| param.default_values());
    let spec = args.common.spec()?.with_sweep(param, values);
    let records = run_monte_carlo(&spec)?;
    emit_results(&records, args.common.format()?, args.common.out.as_deref())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let records = run_monte_carlo(&common.spec()?)?;
            emit_results(&records, common.format()?, common.out.as_deref())
        }
        Command::Convergence { common, samples } => {
            let traces = sweep_convergence(&common.spec()?, samples)?;
            let text = match common.format()? {
                Format::Csv => traces_to_csv(&traces),
                Format::Json => traces_to_json(&traces)?,
            };
            write_text(&text, common.out.as_deref())?;
            eprintln!(
                "{} traces, median iterations {}, all monotone: {}",
                traces.len(),
                median_iterations(&traces),
                traces.iter().all(|t| t.is_monotone(1e-9))
            );
            Ok(())
        }
        Command::SweepPower(args) => run_sweep(&args, SweepParam::PowerDbm),
        Command::SweepCus(args) => run_sweep(&args, SweepParam::NumCus),
        Command::SweepD2d(args) => run_sweep(&args, SweepParam::NumD2d),
        Command::Selftest { seed, cases } => {
            let outcomes = selftest::run_all(seed, cases);
            for o in &outcomes {
                println!(
                    "{:<30} {:>5} cases  worst {:.3e}  {}",
                    o.name,
                    o.cases,
                    o.worst,
                    if o.passed() { "PASS" } else { "FAIL" }
                );
            }
            match outcomes.iter().filter(|o| !o.passed()).count() {
                0 => Ok(()),
                n => Err(Error::InvalidConfig(format!("{n} selftest suite(s) failed"))),
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
