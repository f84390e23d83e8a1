use clap::Parser;
use restphase_cli::args::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("RESTPHASE_LOG", "warn")).init();
    let cli = Cli::parse();
    std::process::exit(restphase_cli::execute(&cli));
}
