use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = convo_engine::cli::Cli::parse();
    if let Err(e) = convo_engine::cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
