use clap::Parser;

use ugto::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("ugto: {e}");
        std::process::exit(1);
    }
}
