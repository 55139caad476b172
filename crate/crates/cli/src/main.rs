use clap::Parser;

fn main() {
    let cli = telegate_cli::Cli::parse();
    let env_seed = std::env::var("TELEGATE_SEED").ok();
    std::process::exit(telegate_cli::run(&cli, env_seed.as_deref()));
}
