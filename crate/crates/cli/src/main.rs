use clap::Parser;

fn main() {
    std::process::exit(charpoly_cli::run(charpoly_cli::Cli::parse()));
}
