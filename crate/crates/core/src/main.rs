use clap::Parser;

fn main() {
    let cli = tukia::cli::Cli::parse();
    std::process::exit(tukia::cli::execute(cli));
}
