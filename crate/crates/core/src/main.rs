use clap::Parser;

use tgrd::cli::{exit_code, run, Cli, EXIT_OK};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("tgrd: {e}");
            exit_code(&e.error)
        }
    };
    std::process::exit(code);
}
