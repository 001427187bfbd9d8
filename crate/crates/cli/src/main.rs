use clap::Parser;
use dcl_cli::{configure_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads().and_then(|_| run(cli)) {
        eprintln!("dcl: {e}");
        std::process::exit(e.exit_code());
    }
}
