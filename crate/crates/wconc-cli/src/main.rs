use clap::Parser;

fn main() {
    let cli = wconc_cli::Cli::parse();
    std::process::exit(wconc_cli::execute(cli));
}
