use clap::Parser;

use steering_lab::cli::{configure_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = configure_threads().and_then(|()| run(&cli)) {
        eprintln!("steering-lab: {err}");
        std::process::exit(err.code);
    }
}
