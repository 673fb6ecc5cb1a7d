use clap::Parser;

use bmjet::cli::Cli;

fn main() {
    std::process::exit(Cli::parse().run());
}
