use clap::Parser;

use poisson_wavelet::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let msg = e.to_string().replace('\n', " ");
        eprintln!("error[{}]: {msg}", e.kind());
        std::process::exit(1);
    }
}
