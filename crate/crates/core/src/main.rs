use clap::Parser;
use hmjacobi::cli::{self, Cli};

fn main() {
    let threads = std::env::var("HMJACOBI_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: could not configure {threads} worker threads: {e}");
        }
    }
    std::process::exit(cli::main_with(Cli::parse()));
}
