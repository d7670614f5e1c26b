use clap::Parser;
use sic_relay::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
