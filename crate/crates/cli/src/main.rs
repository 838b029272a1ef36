mod args;
mod commands;
mod config;
mod io;

use std::process::ExitCode;

use anyhow::Result;
use clap::{CommandFactory, FromArgMatches};
use pronoun_core::Exec;

use args::{Cli, Command};

const SUBCOMMANDS: &[&str] = &[
    "symmetrize",
    "extract",
    "train-lm",
    "tune",
    "predict",
    "score",
    "align-eval",
    "reproduce-baseline",
];

fn clap_command() -> clap::Command {
    let mut cmd = Cli::command().args_override_self(true);
    for name in SUBCOMMANDS {
        cmd = cmd.mut_subcommand(*name, |s| s.args_override_self(true));
    }
    cmd
}

fn init_logging(verbose: bool) {
    let level = if verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .init();
}

#[cfg(feature = "parallel")]
fn with_exec<T: Send>(jobs: usize, f: impl FnOnce(Exec) -> T + Send) -> Result<T> {
    if jobs == 1 {
        return Ok(f(Exec::Sequential));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    log::info!("using {} worker threads", pool.current_num_threads());
    Ok(pool.install(|| f(Exec::Parallel)))
}

#[cfg(not(feature = "parallel"))]
fn with_exec<T: Send>(jobs: usize, f: impl FnOnce(Exec) -> T + Send) -> Result<T> {
    if jobs != 1 {
        log::warn!("built without parallel support; running on one thread");
    }
    Ok(f(Exec::Sequential))
}

fn dispatch(cli: &Cli, exec: Exec) -> Result<()> {
    match &cli.command {
        Command::Symmetrize(a) => commands::symmetrize(a, exec),
        Command::Extract(a) => commands::extract(a, exec),
        Command::TrainLm(a) => commands::train(a, exec),
        Command::Tune(a) => commands::tune(a, exec),
        Command::Predict(a) => commands::predict(a, exec),
        Command::Score(a) => commands::score(a, cli.seed, exec),
        Command::AlignEval(a) => commands::align_eval(a, exec),
        Command::ReproduceBaseline(a) => commands::reproduce(a, exec),
    }
}

fn main() -> ExitCode {
    let cmd = clap_command();
    let args = match config::merge(std::env::args_os().collect(), &cmd) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let matches = match cmd.clone().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => e.exit(),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if cli.dump_config {
        print!("{}", config::dump(&cmd, &matches));
        return ExitCode::SUCCESS;
    }
    init_logging(cli.verbose);
    log::info!("running {}", cli.command.name());

    match with_exec(cli.jobs, |exec| dispatch(&cli, exec)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
