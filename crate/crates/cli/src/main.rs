use clap::Parser;
use twpa_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    // clap exits with 2 on usage errors, matching the config-error code
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(path) => println!("{}", path.display()),
        Err(e) => {
            eprintln!("twpa: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
