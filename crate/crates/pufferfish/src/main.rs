// SPDX-License-Identifier: Apache-2.0

use clap::Parser;
use pufferfish::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli, &mut std::io::stdout().lock()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
