#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use config::{ConfigError, RunConfig};
use manifest::Run;

#[derive(Parser)]
#[command(name = "critlim", version, about = "Limit laws for functionals of two independent Gaussian processes at Hd = 2")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct Common {
    /// Root seed for every random stream; OS entropy when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = "critlim-out")]
    out_dir: PathBuf,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo moments of the normalized functional against the limit law.
    Simulate {
        #[arg(long)]
        replicates: Option<usize>,
        /// Comma-separated values of n.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<f64>>,
        /// Also write per-replicate values to raw.csv.
        #[arg(long)]
        raw: bool,
    },
    /// Limit-law constants and moments for the configured kernel and test function.
    Constants,
    /// Randomized certification of the kernel assumptions.
    CheckAssumptions {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Draws from the limit law.
    LimitSample {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Exact enumeration checks of the permutation identities.
    CombinatoricsVerify {
        #[arg(long)]
        m: Option<usize>,
    },
    /// The log-kernel identity for differences of Gaussians in d = 4.
    Remark18,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Constants => "constants",
            Command::CheckAssumptions { .. } => "check-assumptions",
            Command::LimitSample { .. } => "limit-sample",
            Command::CombinatoricsVerify { .. } => "combinatorics-verify",
            Command::Remark18 => "remark18",
        }
    }

    fn uses_randomness(&self) -> bool {
        matches!(self, Command::Simulate { .. } | Command::CheckAssumptions { .. } | Command::LimitSample { .. })
    }

    /// Limit-law outputs are only defined in the critical case.
    fn needs_critical(&self) -> bool {
        matches!(self, Command::Simulate { .. } | Command::Constants | Command::LimitSample { .. })
    }

    fn apply(&self, cfg: &mut RunConfig) {
        match *self {
            Command::Simulate { replicates, ref n, raw } => {
                if let Some(r) = replicates {
                    cfg.simulate.replicates = r;
                }
                if let Some(n) = n {
                    cfg.simulate.n_list = n.clone();
                }
                cfg.simulate.raw |= raw;
            }
            Command::CheckAssumptions { trials: Some(t) } => cfg.assumptions.trials = t,
            Command::LimitSample { count: Some(c) } => cfg.limit_sample.count = c,
            Command::CombinatoricsVerify { m: Some(m) } => cfg.combinatorics.m = m,
            _ => {}
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(cmd) = &cli.command {
        cmd.apply(&mut cfg);
        if cmd.needs_critical() {
            cfg.kernel.critical().map_err(|e| ConfigError::Field {
                field: "kernel".into(),
                message: e.to_string(),
            })?;
        }
    }
    if let Some(seed) = cli.common.seed {
        cfg.seed = Some(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.common.dump_config {
        if cfg.seed.is_some_and(|s| s > i64::MAX as u64) {
            eprintln!("config error: seed must be at most {} to be written as TOML", i64::MAX);
            return ExitCode::from(2);
        }
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    let Some(command) = &cli.command else {
        eprintln!("error: a subcommand is required\n\n{}", Cli::command().render_usage());
        return ExitCode::from(2);
    };

    let workers = cli.common.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        eprintln!("config error: --workers must be at least 1");
        return ExitCode::from(2);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
        log::warn!("could not size the worker pool: {e}");
    }

    let (seed, source) = match cfg.seed {
        Some(s) => (s, "explicit"),
        None => {
            let s = rand::random::<u64>() >> 1;
            if command.uses_randomness() {
                log::warn!("no seed given, using OS entropy seed {s}");
            }
            (s, "entropy")
        }
    };
    let mut run = Run::new(
        &cli.common.out_dir,
        command.name(),
        cfg.hash(),
        cli.common.config.as_ref().map(|p| p.display().to_string()),
        seed,
        source,
        workers,
    );
    let result = match command {
        Command::Simulate { .. } => commands::simulate(&cfg, seed, &mut run),
        Command::Constants => commands::constants(&cfg, &mut run),
        Command::CheckAssumptions { .. } => commands::check_assumptions(&cfg, seed, &mut run),
        Command::LimitSample { .. } => commands::limit_sample(&cfg, seed, &mut run),
        Command::CombinatoricsVerify { .. } => commands::combinatorics_verify(&cfg, &mut run),
        Command::Remark18 => commands::remark18(&cfg, &mut run),
    };
    match result {
        Ok(verdict) => match run.finish() {
            Ok(path) => {
                log::info!("manifest written to {}", path.display());
                if verdict {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: cannot write outputs: {e}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
