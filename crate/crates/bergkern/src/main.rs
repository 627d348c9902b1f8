use clap::Parser;

fn main() {
    let cli = bergkern::cli::Cli::parse();
    std::process::exit(bergkern::cli::run(cli));
}
