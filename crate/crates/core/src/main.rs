use std::io::Write;

use clap::Parser;

use polycap::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    // keep stdout clean for the artifact when no --out was given
    let artifact_on_stdout = cli.common.out.is_none();
    match run(cli) {
        Ok(outcome) => {
            let _ = if artifact_on_stdout {
                writeln!(std::io::stderr(), "{}", outcome.summary)
            } else {
                writeln!(std::io::stdout(), "{}", outcome.summary)
            };
            std::process::exit(outcome.code);
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            std::process::exit(failure.code);
        }
    }
}
