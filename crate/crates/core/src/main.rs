use clap::Parser;

fn main() {
    let cli = spikesolve::cli::Cli::parse();
    std::process::exit(spikesolve::cli::run(cli));
}
