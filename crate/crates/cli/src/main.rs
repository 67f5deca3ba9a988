mod args;
mod config;
mod eval;
mod obfuscate;
mod output;
mod qc;
mod selfcheck;
mod stats;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use log::LevelFilter;

use args::{Cli, Command};
use config::Config;
use output::Writer;

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Some inputs were skipped.
    Partial,
}

/// Shared state handed to every command.
pub struct Ctx {
    pub config: Config,
    pub writer: Writer,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => LevelFilter::Warn,
            1 => LevelFilter::Info,
            _ => LevelFilter::Debug,
        })
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let jobs = cli.jobs.or(config.jobs).unwrap_or(0);
    let ctx = Ctx {
        writer: Writer {
            precise: config::switch(cli.precise, config.precise),
        },
        config,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting worker pool")?;
    pool.install(|| dispatch(cli.command, &ctx))
}

fn dispatch(command: Command, ctx: &Ctx) -> Result<Status> {
    match command {
        Command::Blur(a) => obfuscate::blur(a, ctx),
        Command::Overlay(a) => obfuscate::overlay(a, ctx),
        Command::Stats(c) => stats::run(c, ctx),
        Command::Eval(c) => eval::run(c, ctx),
        Command::Qc(c) => qc::run(c, ctx),
        Command::Selfcheck(a) => selfcheck::run(a, ctx),
    }
}
