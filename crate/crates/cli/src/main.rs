use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use khflow::app::{self, AppError, RunOptions, RunOutcome};
use khflow::config::Config;
use khflow::exec::Exec;

#[derive(Debug, Parser)]
#[command(
    name = "khflow",
    version,
    about = "Parabolic flow solver for Neumann k-Hessian problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Dotted-key override such as `problem.domain.nr=64`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory; defaults to `output.dir` of the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Evaluate nodes on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the flow to convergence and report the constant c.
    Solve(RunArgs),
    /// Probe `[subsolution].ubar` as a C-subsolution.
    CheckSub(RunArgs),
    /// Evaluate the compatibility integrals.
    CheckCompat(RunArgs),
    /// Measure Harnack ratios of the heat-type flow.
    Harnack(RunArgs),
    /// Evaluate sigma_k and its gradient on a literal tuple.
    Sigma {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        lambda: Vec<f64>,
        #[arg(long)]
        k: usize,
    },
    /// Run the randomized invariant suites.
    Selftest {
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
    },
}

fn load(args: &RunArgs) -> Result<(Config, RunOptions), AppError> {
    let mut cfg = Config::load(&args.config, &args.set)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let exec = if args.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    Ok((cfg, RunOptions { out, exec }))
}

fn run_with(args: &RunArgs, f: fn(&Config, &RunOptions) -> app::Result<RunOutcome>) -> Result<String, AppError> {
    let (cfg, opts) = load(args)?;
    Ok(f(&cfg, &opts)?.summary.to_toml())
}

fn run(cli: Cli) -> Result<String, AppError> {
    match cli.command {
        Command::Solve(a) => run_with(&a, app::solve),
        Command::CheckSub(a) => run_with(&a, app::check_sub),
        Command::CheckCompat(a) => run_with(&a, app::check_compat),
        Command::Harnack(a) => run_with(&a, app::harnack),
        Command::Sigma { lambda, k } => app::sigma_text(&lambda, k),
        Command::Selftest { config, set, out, seed } => {
            let cfg = config.map(|p| Config::load(&p, &set)).transpose()?;
            let seed = seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(42);
            let out = out
                .or_else(|| cfg.as_ref().map(|c| PathBuf::from(&c.output.dir)))
                .unwrap_or_else(|| PathBuf::from("out"));
            Ok(app::selftest(seed, &RunOptions::new(out))?.summary.to_toml())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
