mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command};

fn run() -> Result<u8, String> {
    let cmd = Cli::command();
    let argv = config::inject_config(&cmd, std::env::args().collect())?;
    let matches = match cmd.clone().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return Ok(code);
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| e.to_string())?;
    let (name, sub_matches) = matches.subcommand().ok_or("missing subcommand")?;
    let sub = cmd.find_subcommand(name).ok_or("missing subcommand")?;
    let effective = config::effective(sub, sub_matches);

    let common = match &cli.command {
        Command::Classify(a) => &a.common,
        Command::Decompose(a) => &a.common,
        Command::Simulate(a) => &a.common,
        Command::Verify(a) => &a.common,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let result = match &cli.command {
        Command::Classify(a) => commands::classify(a, &effective),
        Command::Decompose(a) => commands::decompose_cmd(a, &effective),
        Command::Simulate(a) => commands::simulate(a, &effective),
        Command::Verify(a) => commands::verify(a, &effective),
    };
    result.map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
