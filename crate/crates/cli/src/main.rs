use std::io::IsTerminal;

use clap::Parser;
use hivewatch_cli::{exit, run, Cli};
use tracing_subscriber::filter::LevelFilter;

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::WARN,
        1 => LevelFilter::INFO,
        2 => LevelFilter::DEBUG,
        _ => LevelFilter::TRACE,
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(level)
        .with_target(false)
        .with_ansi(std::io::stderr().is_terminal())
        .init();

    match run(cli) {
        Ok(()) => std::process::exit(exit::OK),
        Err(e) => {
            eprintln!("hivewatch: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
